#include "rnm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rnm::data {

std::optional<int> Dataset::pattern_index(const std::string& id) const {
    for (size_t i = 0; i < pattern_ids.size(); ++i)
        if (pattern_ids[i] == id) return static_cast<int>(i);
    return std::nullopt;
}

int Dataset::label_of(int pattern) const {
    for (int c = 0; c < n_classes; ++c)
        if (y[pattern][c]) return c;
    return -1;
}

double Dataset::feature(int pattern, int j) const {
    if (binary_features) {
        const auto& row = active_features[pattern];
        return std::binary_search(row.begin(), row.end(), j) ? 1.0 : 0.0;
    }
    return features[pattern][j];
}

void Dataset::check() const {
    size_t n = pattern_ids.size();
    auto fail = [](const std::string& msg) { throw std::runtime_error("dataset: " + msg); };
    if (binary_features) {
        if (active_features.size() != n) fail("sparse feature row count mismatch");
        for (const auto& row : active_features)
            for (int j : row)
                if (j < 0 || j >= static_cast<int>(feature_dim)) fail("feature index out of range");
    } else {
        if (features.size() != n) fail("feature row count mismatch");
        for (const auto& row : features)
            if (row.size() != feature_dim) fail("feature dimension not uniform");
    }
    if (y.size() != n || y_observed.size() != n || split.size() != n)
        fail("supervision/split shape mismatch");
    if (static_cast<int>(class_names.size()) != n_classes) fail("class name count mismatch");
    std::set<std::string> ids(pattern_ids.begin(), pattern_ids.end());
    if (ids.size() != n) fail("duplicate pattern ids");
    for (size_t i = 0; i < n; ++i) {
        if (static_cast<int>(y[i].size()) != n_classes ||
            static_cast<int>(y_observed[i].size()) != n_classes)
            fail("label row shape mismatch");
        if (one_label) {
            int positives = 0;
            bool any_observed = false, all_observed = true;
            for (int c = 0; c < n_classes; ++c) {
                positives += y[i][c];
                any_observed |= y_observed[i][c] != 0;
                all_observed &= y_observed[i][c] != 0;
            }
            if (positives != 1) fail("one-label pattern '" + pattern_ids[i] + "' has " +
                                     std::to_string(positives) + " positive classes");
            if (any_observed != all_observed)
                fail("one-label pattern '" + pattern_ids[i] + "' partially observed");
        }
    }
}

namespace {

std::vector<std::string> split_fields(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep)) fields.push_back(field);
    return fields;
}

int resolve_class(std::vector<std::string>& class_names, bool fixed, const std::string& label,
                  const std::string& where) {
    for (size_t i = 0; i < class_names.size(); ++i)
        if (class_names[i] == label) return static_cast<int>(i);
    if (fixed) {
        std::string known;
        for (const auto& c : class_names) known += (known.empty() ? "" : ", ") + c;
        throw std::runtime_error(where + ": unknown class label '" + label + "' (known: " +
                                 known + ")");
    }
    class_names.push_back(label);
    return static_cast<int>(class_names.size()) - 1;
}

void finalize_labels(Dataset& ds, const std::vector<int>& labels) {
    ds.n_classes = static_cast<int>(ds.class_names.size());
    ds.y.assign(ds.size(), std::vector<int8_t>(ds.n_classes, 0));
    ds.y_observed.assign(ds.size(), std::vector<int8_t>(ds.n_classes, 1));
    ds.split.assign(ds.size(), Split::Train);
    for (size_t i = 0; i < ds.size(); ++i) ds.y[i][labels[i]] = 1;
}

}  // namespace

Dataset load_citation(const std::string& nodes_path, const std::string& edges_path,
                      const std::vector<std::string>& class_names,
                      const std::string& evidence_predicate,
                      const std::string& pattern_domain) {
    std::ifstream nodes(nodes_path);
    if (!nodes) throw std::runtime_error("cannot open " + nodes_path);
    Dataset ds;
    ds.pattern_domain = pattern_domain;
    ds.binary_features = true;
    ds.one_label = true;
    ds.class_names = class_names;
    bool fixed_classes = !class_names.empty();

    std::vector<int> labels;
    std::map<std::string, int> index;
    std::string line;
    int line_no = 0;
    int max_word = -1;
    while (std::getline(nodes, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_fields(line, '\t');
        if (fields.size() < 2)
            throw std::runtime_error(nodes_path + ":" + std::to_string(line_no) +
                                     ": expected 'id<TAB>label<TAB>word indices'");
        const std::string& id = fields[0];
        if (index.count(id))
            throw std::runtime_error(nodes_path + ":" + std::to_string(line_no) +
                                     ": duplicate pattern id '" + id + "'");
        index[id] = static_cast<int>(ds.pattern_ids.size());
        ds.pattern_ids.push_back(id);
        labels.push_back(resolve_class(ds.class_names, fixed_classes, fields[1],
                                       nodes_path + ":" + std::to_string(line_no)));
        std::vector<int> words;
        if (fields.size() > 2) {
            std::istringstream ws(fields[2]);
            std::string tok;
            while (ws >> tok) {
                try {
                    words.push_back(std::stoi(tok));
                } catch (const std::exception&) {
                    throw std::runtime_error(nodes_path + ":" + std::to_string(line_no) +
                                             ": malformed word index '" + tok + "'");
                }
                if (words.back() < 0)
                    throw std::runtime_error(nodes_path + ":" + std::to_string(line_no) +
                                             ": negative word index");
                max_word = std::max(max_word, words.back());
            }
        }
        std::sort(words.begin(), words.end());
        words.erase(std::unique(words.begin(), words.end()), words.end());
        ds.active_features.push_back(std::move(words));
    }
    ds.feature_dim = static_cast<size_t>(max_word + 1);
    finalize_labels(ds, labels);

    std::ifstream edges(edges_path);
    if (!edges) throw std::runtime_error("cannot open " + edges_path);
    line_no = 0;
    std::set<std::pair<std::string, std::string>> seen;
    while (std::getline(edges, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_fields(line, '\t');
        if (fields.size() != 2)
            throw std::runtime_error(edges_path + ":" + std::to_string(line_no) +
                                     ": expected 'src<TAB>dst'");
        for (const auto& endpoint : fields)
            if (!index.count(endpoint))
                throw std::runtime_error(edges_path + ":" + std::to_string(line_no) +
                                         ": edge references missing node '" + endpoint + "'");
        if (!seen.insert({fields[0], fields[1]}).second) continue;
        ds.evidence.push_back({evidence_predicate, {fields[0], fields[1]}, true});
    }
    ds.check();
    return ds;
}

Dataset load_dense(const std::string& patterns_path, const std::string& links_path,
                   const std::vector<std::string>& class_names,
                   const std::string& evidence_predicate, const std::string& pattern_domain) {
    std::ifstream in(patterns_path);
    if (!in) throw std::runtime_error("cannot open " + patterns_path);
    Dataset ds;
    ds.pattern_domain = pattern_domain;
    ds.one_label = true;
    ds.class_names = class_names;
    bool fixed_classes = !class_names.empty();

    std::vector<int> labels;
    std::map<std::string, int> index;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_fields(line, '\t');
        if (fields.size() != 3)
            throw std::runtime_error(patterns_path + ":" + std::to_string(line_no) +
                                     ": expected 'id<TAB>label<TAB>values'");
        if (index.count(fields[0]))
            throw std::runtime_error(patterns_path + ":" + std::to_string(line_no) +
                                     ": duplicate pattern id '" + fields[0] + "'");
        index[fields[0]] = static_cast<int>(ds.pattern_ids.size());
        ds.pattern_ids.push_back(fields[0]);
        labels.push_back(resolve_class(ds.class_names, fixed_classes, fields[1],
                                       patterns_path + ":" + std::to_string(line_no)));
        std::vector<double> row;
        std::istringstream vs(fields[2]);
        double v;
        while (vs >> v) row.push_back(v);
        if (!ds.features.empty() && row.size() != ds.feature_dim)
            throw std::runtime_error(patterns_path + ":" + std::to_string(line_no) +
                                     ": feature dimension mismatch");
        ds.feature_dim = row.size();
        ds.features.push_back(std::move(row));
    }
    finalize_labels(ds, labels);

    if (!links_path.empty()) {
        std::ifstream edges(links_path);
        if (!edges) throw std::runtime_error("cannot open " + links_path);
        line_no = 0;
        while (std::getline(edges, line)) {
            ++line_no;
            if (line.empty() || line[0] == '#') continue;
            auto fields = split_fields(line, '\t');
            if (fields.size() != 2)
                throw std::runtime_error(links_path + ":" + std::to_string(line_no) +
                                         ": expected 'src<TAB>dst'");
            for (const auto& endpoint : fields)
                if (!index.count(endpoint))
                    throw std::runtime_error(links_path + ":" + std::to_string(line_no) +
                                             ": link references missing pattern '" + endpoint +
                                             "'");
            ds.evidence.push_back({evidence_predicate, {fields[0], fields[1]}, true});
        }
    }
    ds.check();
    return ds;
}

void write_dense(const Dataset& dataset, const std::string& patterns_path,
                 const std::string& links_path) {
    std::ofstream out(patterns_path);
    if (!out) throw std::runtime_error("cannot write " + patterns_path);
    out.precision(17);
    for (size_t i = 0; i < dataset.size(); ++i) {
        out << dataset.pattern_ids[i] << '\t' << dataset.class_names[dataset.label_of(i)] << '\t';
        for (size_t j = 0; j < dataset.feature_dim; ++j) {
            if (j) out << ' ';
            out << dataset.feature(i, j);
        }
        out << '\n';
    }
    std::ofstream links(links_path);
    if (!links) throw std::runtime_error("cannot write " + links_path);
    for (const auto& atom : dataset.evidence) {
        if (!atom.value || atom.constants.size() != 2) continue;
        links << atom.constants[0] << '\t' << atom.constants[1] << '\n';
    }
}

Dataset split_dataset(const Dataset& dataset, double train_fraction, double valid_fraction,
                      SplitMode mode, uint64_t seed) {
    if (train_fraction <= 0 || train_fraction >= 1 || valid_fraction < 0 ||
        train_fraction + valid_fraction >= 1)
        throw std::runtime_error("split fractions must lie in (0,1) with train+valid < 1");
    size_t n = dataset.size();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    size_t n_train = static_cast<size_t>(std::lround(train_fraction * n));
    size_t n_valid = static_cast<size_t>(std::lround(valid_fraction * n));
    n_train = std::max<size_t>(n_train, 1);
    if (n_train + n_valid >= n)
        throw std::runtime_error("split leaves an empty test set");

    Dataset out = dataset;
    for (size_t k = 0; k < n; ++k) {
        Split s = k < n_train             ? Split::Train
                  : k < n_train + n_valid ? Split::Valid
                                          : Split::Test;
        out.split[order[k]] = s;
    }
    for (size_t i = 0; i < n; ++i) {
        int8_t observed = out.split[i] == Split::Train ? 1 : 0;
        std::fill(out.y_observed[i].begin(), out.y_observed[i].end(), observed);
    }
    if (mode == SplitMode::SeparateWorlds) {
        std::vector<EvidenceAtom> kept;
        for (const auto& atom : dataset.evidence) {
            bool any_test = false, any_trainside = false;
            for (const auto& c : atom.constants) {
                auto idx = out.pattern_index(c);
                if (!idx) continue;
                (out.split[*idx] == Split::Test ? any_test : any_trainside) = true;
            }
            if (any_test && any_trainside) continue;  // crosses the world boundary
            kept.push_back(atom);
        }
        out.evidence = std::move(kept);
    }
    out.check();
    return out;
}

Dataset subset_dataset(const Dataset& dataset, const std::vector<bool>& keep) {
    if (keep.size() != dataset.size()) throw std::runtime_error("subset mask size mismatch");
    Dataset out;
    out.pattern_domain = dataset.pattern_domain;
    out.feature_dim = dataset.feature_dim;
    out.binary_features = dataset.binary_features;
    out.one_label = dataset.one_label;
    out.n_classes = dataset.n_classes;
    out.class_names = dataset.class_names;
    std::set<std::string> kept_ids;
    for (size_t i = 0; i < dataset.size(); ++i) {
        if (!keep[i]) continue;
        kept_ids.insert(dataset.pattern_ids[i]);
        out.pattern_ids.push_back(dataset.pattern_ids[i]);
        if (dataset.binary_features)
            out.active_features.push_back(dataset.active_features[i]);
        else
            out.features.push_back(dataset.features[i]);
        out.y.push_back(dataset.y[i]);
        out.y_observed.push_back(dataset.y_observed[i]);
        out.split.push_back(dataset.split[i]);
    }
    if (out.pattern_ids.empty()) throw std::runtime_error("subset selects no patterns");
    for (const auto& atom : dataset.evidence) {
        bool ok = true;
        for (const auto& c : atom.constants)
            if (dataset.pattern_index(c) && !kept_ids.count(c)) ok = false;
        if (ok) out.evidence.push_back(atom);
    }
    out.check();
    return out;
}

namespace {

std::vector<std::vector<double>> synthetic_digit_features(const std::vector<int>& labels,
                                                          const FollowingPairsOptions& options,
                                                          std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, options.noise_sigma);
    std::vector<std::vector<double>> features;
    features.reserve(labels.size());
    for (int label : labels) {
        std::vector<double> row(options.feature_dim);
        for (auto& v : row) v = noise(rng);
        row[label] += options.class_mean_scale;
        features.push_back(std::move(row));
    }
    return features;
}

}  // namespace

Dataset generate_following_pairs(int n_images, const NoiseSpec& noise, PairSource source,
                                 const FollowingPairsOptions& options) {
    if (n_images < 2) throw std::runtime_error("need at least 2 images");
    if (noise.predictive_fraction < 0 || noise.predictive_fraction > 1)
        throw std::runtime_error("predictive fraction must lie in [0,1]");
    std::mt19937_64 rng(noise.seed);

    Dataset ds;
    ds.pattern_domain = "images";
    ds.one_label = true;
    for (int d = 0; d < 10; ++d) ds.class_names.push_back(std::to_string(d));

    std::vector<int> labels(n_images);
    if (source == PairSource::Synthetic) {
        // balanced class coverage (round-robin digits, shuffled) so that
        // consecutive-digit pairs exist at every dataset size
        for (int i = 0; i < n_images; ++i) labels[i] = i % 10;
        std::shuffle(labels.begin(), labels.end(), rng);
        ds.feature_dim = static_cast<size_t>(options.feature_dim);
        if (options.feature_dim < 10)
            throw std::runtime_error("synthetic features need dimension >= 10");
        ds.features = synthetic_digit_features(labels, options, rng);
    } else {
        auto images = load_idx_images(options.images_path);
        auto all_labels = load_idx_labels(options.labels_path);
        if (images.size() != all_labels.size())
            throw std::runtime_error("image/label archives disagree on count");
        if (static_cast<int>(images.size()) < n_images)
            throw std::runtime_error("archive holds fewer than requested images");
        std::vector<int> order(images.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        ds.feature_dim = images.empty() ? 0 : images[0].size();
        for (int k = 0; k < n_images; ++k) {
            ds.features.push_back(images[order[k]]);
            labels[k] = all_labels[order[k]];
        }
    }
    for (int i = 0; i < n_images; ++i) ds.pattern_ids.push_back("img" + std::to_string(i));
    finalize_labels(ds, labels);

    // Links: consecutive-digit pairs first, then uniformly sampled
    // non-consecutive pairs up to the target count.
    int n_links = n_images * options.links_per_image;
    int n_good = static_cast<int>(std::lround(noise.predictive_fraction * n_links));
    std::vector<std::pair<int, int>> good, bad;
    for (int a = 0; a < n_images; ++a)
        for (int b = 0; b < n_images; ++b) {
            if (a == b) continue;
            (labels[b] == labels[a] + 1 ? good : bad).push_back({a, b});
        }
    if (static_cast<int>(good.size()) < n_good)
        throw std::runtime_error("insufficient class variety to realize predictive fraction " +
                                 std::to_string(noise.predictive_fraction) + " (" +
                                 std::to_string(good.size()) + " consecutive pairs available, " +
                                 std::to_string(n_good) + " needed)");
    if (static_cast<int>(bad.size()) < n_links - n_good)
        throw std::runtime_error("insufficient class variety for non-predictive links");
    std::shuffle(good.begin(), good.end(), rng);
    std::shuffle(bad.begin(), bad.end(), rng);
    auto add_link = [&](std::pair<int, int> link) {
        ds.evidence.push_back({"link",
                               {ds.pattern_ids[link.first], ds.pattern_ids[link.second]},
                               true});
    };
    for (int k = 0; k < n_good; ++k) add_link(good[k]);
    for (int k = 0; k < n_links - n_good; ++k) add_link(bad[k]);
    ds.check();
    return ds;
}

// ---------------------------------------------------------------------------
// idx archives

namespace {

uint32_t read_be32(std::istream& in, const std::string& path) {
    unsigned char buf[4];
    if (!in.read(reinterpret_cast<char*>(buf), 4))
        throw std::runtime_error(path + ": truncated idx header");
    return (uint32_t(buf[0]) << 24) | (uint32_t(buf[1]) << 16) | (uint32_t(buf[2]) << 8) |
           uint32_t(buf[3]);
}

void write_be32(std::ostream& out, uint32_t v) {
    unsigned char buf[4] = {static_cast<unsigned char>(v >> 24),
                            static_cast<unsigned char>(v >> 16),
                            static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<char*>(buf), 4);
}

}  // namespace

std::vector<std::vector<double>> load_idx_images(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    if (read_be32(in, path) != 0x00000803u)
        throw std::runtime_error(path + ": bad magic for an idx image archive");
    uint32_t count = read_be32(in, path);
    uint32_t rows = read_be32(in, path);
    uint32_t cols = read_be32(in, path);
    size_t dim = size_t(rows) * cols;
    std::vector<std::vector<double>> images(count, std::vector<double>(dim));
    std::vector<unsigned char> buf(dim);
    for (auto& image : images) {
        if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(dim)))
            throw std::runtime_error(path + ": truncated image data");
        for (size_t j = 0; j < dim; ++j) image[j] = buf[j] / 255.0;  // scale into [0,1]
    }
    return images;
}

std::vector<int> load_idx_labels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    if (read_be32(in, path) != 0x00000801u)
        throw std::runtime_error(path + ": bad magic for an idx label archive");
    uint32_t count = read_be32(in, path);
    std::vector<int> labels(count);
    for (auto& label : labels) {
        int c = in.get();
        if (c == EOF) throw std::runtime_error(path + ": truncated label data");
        label = c;
    }
    return labels;
}

void write_idx_images(const std::string& path, const std::vector<std::vector<double>>& images,
                      int rows, int cols) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_be32(out, 0x00000803u);
    write_be32(out, static_cast<uint32_t>(images.size()));
    write_be32(out, static_cast<uint32_t>(rows));
    write_be32(out, static_cast<uint32_t>(cols));
    for (const auto& image : images)
        for (double v : image)
            out.put(static_cast<char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
}

void write_idx_labels(const std::string& path, const std::vector<int>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_be32(out, 0x00000801u);
    write_be32(out, static_cast<uint32_t>(labels.size()));
    for (int label : labels) out.put(static_cast<char>(label));
}

}  // namespace rnm::data
