#include "rnm/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rnm::checkpoint {

namespace {

constexpr const char* kMagic = "rnm-checkpoint v1";

void write_doubles(std::ostream& out, const std::vector<double>& values) {
    out << values.size();
    out << std::hexfloat;
    for (double v : values) out << ' ' << v;
    out << std::defaultfloat << '\n';
}

std::vector<double> read_doubles(std::istream& in, const std::string& what) {
    size_t count = 0;
    if (!(in >> count)) throw std::runtime_error("checkpoint: missing count for " + what);
    std::vector<double> values(count);
    for (auto& v : values) {
        std::string tok;
        if (!(in >> tok)) throw std::runtime_error("checkpoint: truncated " + what);
        try {
            v = std::strtod(tok.c_str(), nullptr);
        } catch (const std::exception&) {
            throw std::runtime_error("checkpoint: malformed value in " + what);
        }
    }
    return values;
}

std::string expect_key(std::istream& in, const std::string& key) {
    std::string tok;
    if (!(in >> tok) || tok != key)
        throw std::runtime_error("checkpoint: expected '" + key + "', got '" + tok + "'");
    return tok;
}

}  // namespace

void save(const Checkpoint& ckpt, std::ostream& out) {
    out << kMagic << '\n';
    out << "mode " << ckpt.mode << '\n';
    out << "tnorm " << ckpt.tnorm << '\n';
    out << "supervision " << (ckpt.one_label ? "one_label" : "multi_label") << '\n';
    out << "layers";
    for (int d : ckpt.mlp.layer_dims) out << ' ' << d;
    out << '\n';
    out << "activations";
    for (auto a : ckpt.mlp.activations) out << ' ' << net::to_string(a);
    out << '\n';
    out << "heads";
    for (const auto& h : ckpt.head_names) out << ' ' << h;
    out << '\n';
    for (size_t l = 0; l < ckpt.mlp.weights.size(); ++l) {
        out << "weights " << l << ' ';
        write_doubles(out, ckpt.mlp.weights[l]);
    }
    out << "adam " << ckpt.adam.step << ' ' << std::hexfloat << ckpt.adam.lr << ' '
        << ckpt.adam.beta1 << ' ' << ckpt.adam.beta2 << ' ' << ckpt.adam.epsilon
        << std::defaultfloat << '\n';
    for (size_t l = 0; l < ckpt.adam.m.size(); ++l) {
        out << "adam_m " << l << ' ';
        write_doubles(out, ckpt.adam.m[l]);
        out << "adam_v " << l << ' ';
        write_doubles(out, ckpt.adam.v[l]);
    }
    out << "lambda ";
    write_doubles(out, ckpt.lambda);
    out << "end\n";
}

void save_file(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path);
    save(ckpt, out);
}

Checkpoint load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kMagic)
        throw std::runtime_error("not an rnm checkpoint (bad magic)");
    Checkpoint ckpt;
    expect_key(in, "mode");
    in >> ckpt.mode;
    expect_key(in, "tnorm");
    in >> ckpt.tnorm;
    expect_key(in, "supervision");
    std::string supervision;
    in >> supervision;
    ckpt.one_label = supervision == "one_label";
    expect_key(in, "layers");
    {
        std::getline(in, line);
        std::istringstream ls(line);
        int d;
        while (ls >> d) ckpt.mlp.layer_dims.push_back(d);
        if (ckpt.mlp.layer_dims.size() < 2)
            throw std::runtime_error("checkpoint: needs at least two layer dims");
    }
    expect_key(in, "activations");
    {
        std::getline(in, line);
        std::istringstream ls(line);
        std::string a;
        while (ls >> a) ckpt.mlp.activations.push_back(net::activation_from_string(a));
    }
    expect_key(in, "heads");
    {
        std::getline(in, line);
        std::istringstream ls(line);
        std::string h;
        while (ls >> h) ckpt.head_names.push_back(h);
    }
    size_t n_layers = ckpt.mlp.layer_dims.size() - 1;
    if (ckpt.mlp.activations.size() != n_layers - 1)
        throw std::runtime_error("checkpoint: activation count mismatch");
    ckpt.mlp.weights.resize(n_layers);
    for (size_t l = 0; l < n_layers; ++l) {
        expect_key(in, "weights");
        size_t index;
        in >> index;
        if (index != l) throw std::runtime_error("checkpoint: weights out of order");
        ckpt.mlp.weights[l] = read_doubles(in, "weights");
        size_t expected = static_cast<size_t>(ckpt.mlp.layer_dims[l] + 1) *
                          static_cast<size_t>(ckpt.mlp.layer_dims[l + 1]);
        if (ckpt.mlp.weights[l].size() != expected)
            throw std::runtime_error("checkpoint: layer " + std::to_string(l) +
                                     " has wrong weight count");
    }
    expect_key(in, "adam");
    {
        std::string tok;
        in >> ckpt.adam.step;
        in >> tok;
        ckpt.adam.lr = std::strtod(tok.c_str(), nullptr);
        in >> tok;
        ckpt.adam.beta1 = std::strtod(tok.c_str(), nullptr);
        in >> tok;
        ckpt.adam.beta2 = std::strtod(tok.c_str(), nullptr);
        in >> tok;
        ckpt.adam.epsilon = std::strtod(tok.c_str(), nullptr);
    }
    ckpt.adam.m.resize(n_layers);
    ckpt.adam.v.resize(n_layers);
    for (size_t l = 0; l < n_layers; ++l) {
        expect_key(in, "adam_m");
        size_t index;
        in >> index;
        ckpt.adam.m[l] = read_doubles(in, "adam_m");
        expect_key(in, "adam_v");
        in >> index;
        ckpt.adam.v[l] = read_doubles(in, "adam_v");
        if (ckpt.adam.m[l].size() != ckpt.mlp.weights[l].size() ||
            ckpt.adam.v[l].size() != ckpt.mlp.weights[l].size())
            throw std::runtime_error("checkpoint: adam state shape mismatch");
    }
    expect_key(in, "lambda");
    ckpt.lambda = read_doubles(in, "lambda");
    expect_key(in, "end");
    return ckpt;
}

Checkpoint load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint " + path);
    try {
        return load(in);
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

}  // namespace rnm::checkpoint
