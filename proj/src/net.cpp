#include "rnm/net.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace rnm::net {

Activation activation_from_string(const std::string& name) {
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "relu") return Activation::Relu;
    throw std::runtime_error("unknown activation '" + name + "' (expected sigmoid|relu)");
}

std::string to_string(Activation a) {
    return a == Activation::Sigmoid ? "sigmoid" : "relu";
}

Mlp make_mlp(const std::vector<int>& layer_dims, const std::vector<Activation>& activations,
             uint64_t seed) {
    if (layer_dims.size() < 2) throw std::runtime_error("network needs input and output dims");
    if (activations.size() != layer_dims.size() - 2)
        throw std::runtime_error("expected one activation per hidden layer");
    Mlp mlp;
    mlp.layer_dims = layer_dims;
    mlp.activations = activations;
    std::mt19937_64 rng(seed);
    for (size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        int in = layer_dims[l], out = layer_dims[l + 1];
        double bound = std::sqrt(6.0 / (in + out));
        std::uniform_real_distribution<double> dist(-bound, bound);
        std::vector<double> w(static_cast<size_t>(in + 1) * out, 0.0);
        for (int i = 0; i < in; ++i)
            for (int j = 0; j < out; ++j) w[static_cast<size_t>(i) * out + j] = dist(rng);
        // biases start at zero
        mlp.weights.push_back(std::move(w));
    }
    return mlp;
}

InputBatch InputBatch::from_dataset(const data::Dataset& dataset,
                                    const std::vector<int>& patterns) {
    InputBatch batch;
    batch.dim = dataset.feature_dim;
    if (dataset.binary_features) {
        for (int p : patterns) batch.sparse.push_back(dataset.active_features[p]);
    } else {
        for (int p : patterns) batch.dense.push_back(dataset.features[p]);
    }
    return batch;
}

InputBatch InputBatch::from_rows(std::vector<std::vector<double>> rows) {
    InputBatch batch;
    batch.dim = rows.empty() ? 0 : rows[0].size();
    batch.dense = std::move(rows);
    return batch;
}

namespace {

inline double activate(Activation a, double z) {
    return a == Activation::Relu ? (z > 0.0 ? z : 0.0) : 1.0 / (1.0 + std::exp(-z));
}

inline double activate_grad(Activation a, double out) {
    // expressed in terms of the activation output
    return a == Activation::Relu ? (out > 0.0 ? 1.0 : 0.0) : out * (1.0 - out);
}

}  // namespace

std::vector<double> forward(const Mlp& mlp, const InputBatch& input, ForwardCache* cache) {
    if (input.dim != static_cast<size_t>(mlp.input_dim()))
        throw std::runtime_error("input dimension " + std::to_string(input.dim) +
                                 " does not match the network (" +
                                 std::to_string(mlp.input_dim()) + ")");
    size_t batch = input.size();
    if (cache) cache->activations.assign(mlp.n_layers() + 1, {});
    std::vector<double> current;  // row-major batch x dim, layers >= 1
    for (size_t l = 0; l < mlp.n_layers(); ++l) {
        int in = mlp.layer_dims[l], out = mlp.layer_dims[l + 1];
        const std::vector<double>& w = mlp.weights[l];
        std::vector<double> next(batch * static_cast<size_t>(out));
        const double* bias = &w[static_cast<size_t>(in) * out];
        for (size_t r = 0; r < batch; ++r) {
            double* row_out = &next[r * out];
            for (int j = 0; j < out; ++j) row_out[j] = bias[j];
            if (l == 0 && !input.sparse.empty()) {
                for (int i : input.sparse[r]) {
                    const double* wrow = &w[static_cast<size_t>(i) * out];
                    for (int j = 0; j < out; ++j) row_out[j] += wrow[j];
                }
            } else {
                const double* row_in =
                    l == 0 ? input.dense[r].data() : &current[r * static_cast<size_t>(in)];
                for (int i = 0; i < in; ++i) {
                    double x = row_in[i];
                    if (x == 0.0) continue;
                    const double* wrow = &w[static_cast<size_t>(i) * out];
                    for (int j = 0; j < out; ++j) row_out[j] += x * wrow[j];
                }
            }
            if (l + 1 < mlp.n_layers()) {
                Activation a = mlp.activations[l];
                for (int j = 0; j < out; ++j) row_out[j] = activate(a, row_out[j]);
            }
        }
        current = std::move(next);
        if (cache) cache->activations[l + 1] = current;
    }
    return current;
}

std::vector<std::vector<double>> backward(const Mlp& mlp, const InputBatch& input,
                                          const ForwardCache& cache,
                                          const std::vector<double>& grad_f) {
    size_t batch = input.size();
    std::vector<std::vector<double>> grads(mlp.n_layers());
    for (size_t l = 0; l < mlp.n_layers(); ++l)
        grads[l].assign(mlp.weights[l].size(), 0.0);

    std::vector<double> delta = grad_f;  // batch x out of the current layer
    for (size_t l = mlp.n_layers(); l-- > 0;) {
        int in = mlp.layer_dims[l], out = mlp.layer_dims[l + 1];
        const std::vector<double>& w = mlp.weights[l];
        std::vector<double>& g = grads[l];
        std::vector<double> prev_delta;
        if (l > 0) prev_delta.assign(batch * static_cast<size_t>(in), 0.0);
        for (size_t r = 0; r < batch; ++r) {
            const double* d = &delta[r * static_cast<size_t>(out)];
            double* gbias = &g[static_cast<size_t>(in) * out];
            for (int j = 0; j < out; ++j) gbias[j] += d[j];
            if (l == 0 && !input.sparse.empty()) {
                for (int i : input.sparse[r]) {
                    double* grow = &g[static_cast<size_t>(i) * out];
                    for (int j = 0; j < out; ++j) grow[j] += d[j];
                }
            } else {
                const double* row_in = l == 0 ? input.dense[r].data()
                                              : &cache.activations[l][r * static_cast<size_t>(in)];
                for (int i = 0; i < in; ++i) {
                    double x = row_in[i];
                    if (x != 0.0) {
                        double* grow = &g[static_cast<size_t>(i) * out];
                        for (int j = 0; j < out; ++j) grow[j] += x * d[j];
                    }
                }
            }
            if (l > 0) {
                // chain through the previous layer's activation
                const double* acts = &cache.activations[l][r * static_cast<size_t>(in)];
                double* pd = &prev_delta[r * static_cast<size_t>(in)];
                Activation a = mlp.activations[l - 1];
                for (int i = 0; i < in; ++i) {
                    double sum = 0.0;
                    const double* wrow = &w[static_cast<size_t>(i) * out];
                    for (int j = 0; j < out; ++j) sum += wrow[j] * d[j];
                    pd[i] = sum * activate_grad(a, acts[i]);
                }
            }
        }
        delta = std::move(prev_delta);
    }
    return grads;
}

std::vector<double> prob_one_label(const std::vector<double>& f) {
    double max = *std::max_element(f.begin(), f.end());
    std::vector<double> p(f.size());
    double z = 0.0;
    for (size_t i = 0; i < f.size(); ++i) z += (p[i] = std::exp(f[i] - max));
    for (auto& v : p) v /= z;
    return p;
}

std::vector<double> prob_multi_label(const std::vector<double>& f) {
    std::vector<double> p(f.size());
    for (size_t i = 0; i < f.size(); ++i) p[i] = 1.0 / (1.0 + std::exp(-f[i]));
    return p;
}

Phi0 phi0(const std::vector<int8_t>& y, const std::vector<double>& f, SupervisionMode mode) {
    if (y.size() != f.size()) throw std::runtime_error("phi0: shape mismatch");
    if (mode == SupervisionMode::OneLabel) {
        int positives = 0;
        for (int8_t v : y) positives += v;
        if (positives >= 2) return {true, 0.0};
    }
    double dot = 0.0;
    for (size_t i = 0; i < y.size(); ++i)
        if (y[i]) dot += f[i];
    return {false, dot};
}

std::vector<std::vector<double>> grad_w_supervised(const Mlp& mlp, const InputBatch& input,
                                                   const ForwardCache& cache,
                                                   const std::vector<double>& y_targets,
                                                   const std::vector<double>& expected_y) {
    if (y_targets.size() != expected_y.size() ||
        y_targets.size() != input.size() * static_cast<size_t>(mlp.output_dim()))
        throw std::runtime_error("grad_w_supervised: shape mismatch");
    std::vector<double> grad_f(y_targets.size());
    for (size_t i = 0; i < grad_f.size(); ++i) grad_f[i] = y_targets[i] - expected_y[i];
    return backward(mlp, input, cache, grad_f);
}

AdamState make_adam(const Mlp& mlp, double lr) {
    AdamState state;
    state.lr = lr;
    for (const auto& w : mlp.weights) {
        state.m.emplace_back(w.size(), 0.0);
        state.v.emplace_back(w.size(), 0.0);
    }
    return state;
}

void adam_step(AdamState& state, Mlp& mlp, const std::vector<std::vector<double>>& grads) {
    if (grads.size() != mlp.weights.size()) throw std::runtime_error("adam_step: layer mismatch");
    ++state.step;
    double bc1 = 1.0 - std::pow(state.beta1, state.step);
    double bc2 = 1.0 - std::pow(state.beta2, state.step);
    for (size_t l = 0; l < grads.size(); ++l) {
        if (grads[l].size() != mlp.weights[l].size())
            throw std::runtime_error("adam_step: shape mismatch");
        for (size_t k = 0; k < grads[l].size(); ++k) {
            double g = grads[l][k];
            if (!std::isfinite(g)) throw std::runtime_error("adam_step: non-finite gradient");
            double& m = state.m[l][k];
            double& v = state.v[l][k];
            m = state.beta1 * m + (1.0 - state.beta1) * g;
            v = state.beta2 * v + (1.0 - state.beta2) * g * g;
            mlp.weights[l][k] +=
                state.lr * (m / bc1) / (std::sqrt(v / bc2) + state.epsilon);
        }
    }
}

double supervised_loss(const std::vector<double>& f, const std::vector<double>& y_targets,
                       size_t batch, size_t classes, SupervisionMode mode) {
    double loss = 0.0;
    for (size_t r = 0; r < batch; ++r) {
        const double* fr = &f[r * classes];
        const double* yr = &y_targets[r * classes];
        if (mode == SupervisionMode::OneLabel) {
            double max = fr[0];
            for (size_t c = 1; c < classes; ++c) max = std::max(max, fr[c]);
            double z = 0.0, dot = 0.0;
            for (size_t c = 0; c < classes; ++c) {
                z += std::exp(fr[c] - max);
                dot += yr[c] * (fr[c] - max);
            }
            loss += std::log(z) - dot;
        } else {
            for (size_t c = 0; c < classes; ++c) {
                // -log sigmoid(+-f) = log(1 + exp(-+f)), stabilized
                double sign = yr[c] > 0.5 ? 1.0 : -1.0;
                double z = -sign * fr[c];
                loss += z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
            }
        }
    }
    return loss;
}

}  // namespace rnm::net
