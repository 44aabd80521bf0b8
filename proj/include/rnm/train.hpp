#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rnm/dataset.hpp"
#include "rnm/fuzzy.hpp"
#include "rnm/grounding.hpp"
#include "rnm/infer.hpp"
#include "rnm/kb.hpp"
#include "rnm/net.hpp"

namespace rnm::train {

enum class TrainMode { Baseline, RnmEm, Sbr, Ltn };
enum class LikelihoodMode { PL, PPL, Auto };

TrainMode mode_from_string(const std::string& name);
std::string to_string(TrainMode mode);
LikelihoodMode likelihood_from_string(const std::string& name);

struct OptimizerConfig {
    double lr = 1e-3;
    int epochs_per_step = 5;      // supervised epochs per M-step
    size_t batch_size = 128;      // used above the full-batch threshold
    size_t full_batch_threshold = 5000;
};

struct NetConfig {
    std::vector<int> hidden_dims = {100};
    net::Activation activation = net::Activation::Sigmoid;
};

struct TrainConfig {
    TrainMode mode = TrainMode::RnmEm;
    LikelihoodMode likelihood = LikelihoodMode::Auto;
    double epsilon = 1e-4;      // log-odds clip for the closed-form lambda
    int max_iterations = 100;
    double lambda_tol = 1e-3;
    int val_patience = 3;       // E-steps without validation improvement
    int auto_ppl_threshold = 20;  // cliques above this use pseudo-likelihood
    fuzzy::TNorm tnorm = fuzzy::TNorm::Product;
    bool prune = true;
    infer::MapConfig map;
    OptimizerConfig optimizer;
    NetConfig net;
    uint64_t seed = 0;
};

struct IterationRecord {
    int iteration = 0;
    std::vector<double> lambda;
    std::vector<double> avg_sat;  // NaN where undefined (no groundings)
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double val_accuracy = -1.0;  // -1 when there is no validation split
};

struct TrainState {
    std::vector<double> lambda;
    net::Mlp mlp;
    net::AdamState adam;
    int iterations = 0;
    grounding::World map_world;  // last E-step completion (y* U y^T)
    std::vector<IterationRecord> log;
};

// --- Piecewise-likelihood primitives -------------------------------------

// Z^l_c = n_minus + n_plus * e^lambda.
double local_partition(const grounding::ConstraintStats& stats, double lambda);
double log_local_partition(const grounding::ConstraintStats& stats, double lambda);

// E[phi_c] = n_plus e^lambda / (n_minus + n_plus e^lambda).
double expected_satisfaction(const grounding::ConstraintStats& stats, double lambda);

// lambda_c = log(avg/(1-avg)) - log(n_plus/n_minus), avg clipped into
// [epsilon, 1-epsilon]. Requires a non-degenerate truth table.
double lambda_closed_form(double avg_sat, const grounding::ConstraintStats& stats,
                          double epsilon = 1e-4);

// d/d lambda of sum_g log p^PL: Phi_c(y) - |G_c| E[phi_c], over the
// materialized groundings.
double grad_lambda(const grounding::FormulaGrounding& grounding,
                   const grounding::ConstraintStats& stats, const grounding::World& world,
                   double lambda);

// sum_g log p^PL_c of the observed world.
double pl_log_likelihood(const grounding::FormulaGrounding& grounding,
                         const grounding::ConstraintStats& stats,
                         const grounding::World& world, double lambda);

// One pseudo-likelihood factor: exp(lambda Phi_c(y)) normalized over the two
// values of atom_index (an atom of formula c), all other atoms clamped.
double pseudo_likelihood_prob(const grounding::FormulaGrounding& grounding,
                              const grounding::World& world, int atom_index, double lambda);

// log p^PPL_c: sum of log factors over every atom of every grounding scope.
double ppl_log_likelihood(const grounding::FormulaGrounding& grounding,
                          const grounding::World& world, double lambda);

// argmax_lambda of the pseudo-likelihood, by Newton with bisection fallback
// (the objective is concave); used where truth tables are unavailable.
double lambda_ppl_optimum(const grounding::FormulaGrounding& grounding,
                          const grounding::World& world, double lambda_cap = 30.0);

// --- Training loops --------------------------------------------------------

// Algorithm: init lambda=0 (or the @fixed values), random w; iterate
// E (forward + MAP completion of unobserved atoms) and M (closed-form lambda
// per formula, Adam backprop epochs for w) until max |d lambda| < lambda_tol
// and the validation accuracy has stalled for val_patience E-steps (without a
// validation split the loop runs to max_iterations). Baseline mode drops all
// formulas first and degenerates to supervised training.
TrainState em_train(const kb::KnowledgeBase& kb, const data::Dataset& dataset,
                    const TrainConfig& config);

// Frozen-lambda training: maximizes log p0 + sum_c lambda_c Phi^s_c over the
// squashed network outputs (mean-aggregated surrogates). Every formula must
// carry a @fixed weight. SBR applies MAP at evaluation time, LTN does not;
// the training loop is shared.
TrainState sbr_ltn_train(const kb::KnowledgeBase& kb, const data::Dataset& dataset,
                         const TrainConfig& config);

// The SBR/LTN objective log p0(supervised) + sum_c lambda_c * mean Phi^s_c
// over the squashed scores of every pattern, with its ascent gradient over
// the weights when grads is non-null.
double sbr_objective(const grounding::GroundNetwork& network, const data::Dataset& dataset,
                     const net::Mlp& mlp, const std::vector<double>& lambda,
                     fuzzy::TNorm tnorm, std::vector<std::vector<double>>* grads = nullptr);

// --- Shared helpers --------------------------------------------------------

std::vector<int> supervised_patterns(const data::Dataset& dataset);
std::vector<int> patterns_of_split(const data::Dataset& dataset, data::Split split);

// Row-major pattern x head scores for the listed patterns.
std::vector<double> forward_patterns(const net::Mlp& mlp, const data::Dataset& dataset,
                                     const std::vector<int>& patterns);

// Fraction of the listed patterns whose decode (argmax / 0.5 threshold of f)
// matches the dataset truth.
double forward_accuracy(const net::Mlp& mlp, const data::Dataset& dataset,
                        const std::vector<int>& patterns);

// Accuracy of a crisp world against the dataset truth on the given patterns.
double world_accuracy(const grounding::GroundAtomTable& table, const grounding::World& world,
                      const data::Dataset& dataset, const std::vector<int>& patterns);

}  // namespace rnm::train
