#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rnm/dataset.hpp"

namespace rnm::net {

enum class Activation { Sigmoid, Relu };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);

// Feed-forward network with a linear output layer; any squashing of the
// scores f comes from the probabilistic layer on top, not from the net.
// Layer l maps layer_dims[l] -> layer_dims[l+1]; weights[l] is row-major
// (in x out) with the bias row appended at the end.
struct Mlp {
    std::vector<int> layer_dims;
    std::vector<Activation> activations;  // one per hidden layer
    std::vector<std::vector<double>> weights;

    int input_dim() const { return layer_dims.front(); }
    int output_dim() const { return layer_dims.back(); }
    size_t n_layers() const { return layer_dims.size() - 1; }
};

// Glorot-uniform init over a seeded generator.
Mlp make_mlp(const std::vector<int>& layer_dims, const std::vector<Activation>& activations,
             uint64_t seed);

// Batched input rows; binary-sparse rows keep the first layer proportional to
// the active feature count.
struct InputBatch {
    size_t dim = 0;
    std::vector<std::vector<double>> dense;  // either this...
    std::vector<std::vector<int>> sparse;    // ...or sorted active indices

    size_t size() const { return dense.empty() ? sparse.size() : dense.size(); }
    static InputBatch from_dataset(const data::Dataset& dataset,
                                   const std::vector<int>& patterns);
    static InputBatch from_rows(std::vector<std::vector<double>> rows);
};

struct ForwardCache {
    // post-activation outputs per layer, [0] unused (inputs stay in the batch)
    std::vector<std::vector<double>> activations;
};

// Row-major B x output_dim scores.
std::vector<double> forward(const Mlp& mlp, const InputBatch& input,
                            ForwardCache* cache = nullptr);

// Weight gradients of sum_i grad_f[i] * f_i via backprop; grad_f is row-major
// B x output_dim. Requires the cache produced by the matching forward call.
std::vector<std::vector<double>> backward(const Mlp& mlp, const InputBatch& input,
                                          const ForwardCache& cache,
                                          const std::vector<double>& grad_f);

// p(class i) = exp(f_i) / sum_j exp(f_j), log-sum-exp stabilized.
std::vector<double> prob_one_label(const std::vector<double>& f);
// p(y_i = 1) = sigmoid(f_i), independently per class.
std::vector<double> prob_multi_label(const std::vector<double>& f);

enum class SupervisionMode { OneLabel, MultiLabel };

// The supervised potential phi_0(y, f) = f . y, with the one-label mutual
// exclusivity sentinel (never a floating -inf).
struct Phi0 {
    bool minus_infinity = false;
    double value = 0.0;
};
Phi0 phi0(const std::vector<int8_t>& y, const std::vector<double>& f, SupervisionMode mode);

// Log-likelihood gradient over the weights:
//   d log p0 / d w = sum_i (df_i/dw) (y_i - E[y'_i]),
// with expected_y the model expectation (softmax/sigmoid of f when the
// supervised piece stands alone). Row-major B x output_dim inputs.
std::vector<std::vector<double>> grad_w_supervised(const Mlp& mlp, const InputBatch& input,
                                                   const ForwardCache& cache,
                                                   const std::vector<double>& y_targets,
                                                   const std::vector<double>& expected_y);

struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    long step = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
};

AdamState make_adam(const Mlp& mlp, double lr);

// One bias-corrected Adam step along +grads (callers maximizing a
// log-likelihood pass its gradient directly). Throws on non-finite gradients.
void adam_step(AdamState& state, Mlp& mlp, const std::vector<std::vector<double>>& grads);

// -log p0 of the batch under the mode's closed-form distribution.
double supervised_loss(const std::vector<double>& f, const std::vector<double>& y_targets,
                       size_t batch, size_t classes, SupervisionMode mode);

}  // namespace rnm::net
