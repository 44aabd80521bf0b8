#include "rnm/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rnm::train {

TrainMode mode_from_string(const std::string& name) {
    if (name == "baseline") return TrainMode::Baseline;
    if (name == "rnm_em" || name == "rnm") return TrainMode::RnmEm;
    if (name == "sbr") return TrainMode::Sbr;
    if (name == "ltn") return TrainMode::Ltn;
    throw std::runtime_error("unknown mode '" + name + "' (baseline|rnm_em|sbr|ltn)");
}

std::string to_string(TrainMode mode) {
    switch (mode) {
        case TrainMode::Baseline: return "baseline";
        case TrainMode::RnmEm: return "rnm_em";
        case TrainMode::Sbr: return "sbr";
        case TrainMode::Ltn: return "ltn";
    }
    return "?";
}

LikelihoodMode likelihood_from_string(const std::string& name) {
    if (name == "pl") return LikelihoodMode::PL;
    if (name == "ppl") return LikelihoodMode::PPL;
    if (name == "auto") return LikelihoodMode::Auto;
    throw std::runtime_error("unknown likelihood '" + name + "' (pl|ppl|auto)");
}

// ---------------------------------------------------------------------------
// Piecewise-likelihood primitives

double local_partition(const grounding::ConstraintStats& stats, double lambda) {
    return static_cast<double>(stats.n_minus) +
           static_cast<double>(stats.n_plus) * std::exp(lambda);
}

double log_local_partition(const grounding::ConstraintStats& stats, double lambda) {
    // log(n- + n+ e^l), stabilized for large |lambda|
    if (stats.n_plus == 0) return std::log(static_cast<double>(stats.n_minus));
    if (stats.n_minus == 0) return std::log(static_cast<double>(stats.n_plus)) + lambda;
    double a = std::log(static_cast<double>(stats.n_minus));
    double b = std::log(static_cast<double>(stats.n_plus)) + lambda;
    double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double expected_satisfaction(const grounding::ConstraintStats& stats, double lambda) {
    if (stats.n_plus == 0) return 0.0;
    if (stats.n_minus == 0) return 1.0;
    // sigmoid(lambda + log(n+/n-))
    double z = lambda + std::log(static_cast<double>(stats.n_plus) /
                                 static_cast<double>(stats.n_minus));
    return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

double lambda_closed_form(double avg_sat, const grounding::ConstraintStats& stats,
                          double epsilon) {
    if (stats.n_plus == 0 || stats.n_minus == 0)
        throw std::runtime_error("formula " + std::to_string(stats.formula) +
                                 " has a degenerate truth table (tautology or "
                                 "contradiction); its weight is unidentifiable");
    if (epsilon <= 0 || epsilon >= 0.5)
        throw std::runtime_error("epsilon must lie in (0, 0.5)");
    double avg = std::clamp(avg_sat, epsilon, 1.0 - epsilon);
    return std::log(avg / (1.0 - avg)) -
           std::log(static_cast<double>(stats.n_plus) / static_cast<double>(stats.n_minus));
}

double grad_lambda(const grounding::FormulaGrounding& grounding,
                   const grounding::ConstraintStats& stats, const grounding::World& world,
                   double lambda) {
    double satisfied = grounding::potential_value(grounding, world) -
                       static_cast<double>(grounding.n_const_true);
    return satisfied -
           static_cast<double>(grounding.groundings.size()) *
               expected_satisfaction(stats, lambda);
}

double pl_log_likelihood(const grounding::FormulaGrounding& grounding,
                         const grounding::ConstraintStats& stats,
                         const grounding::World& world, double lambda) {
    double satisfied = grounding::potential_value(grounding, world) -
                       static_cast<double>(grounding.n_const_true);
    return lambda * satisfied - static_cast<double>(grounding.groundings.size()) *
                                    log_local_partition(stats, lambda);
}

namespace {

// Per-atom scopes: which groundings reference atom i, for flip deltas.
std::vector<std::pair<int, int>> atom_occurrences(const grounding::FormulaGrounding& fg,
                                                  int atom_index) {
    std::vector<std::pair<int, int>> occ;  // (grounding, slot)
    for (size_t g = 0; g < fg.groundings.size(); ++g) {
        const auto& atoms = fg.groundings[g].atom_indices;
        for (size_t s = 0; s < atoms.size(); ++s)
            if (atoms[s] == atom_index) occ.push_back({static_cast<int>(g), static_cast<int>(s)});
    }
    return occ;
}

// Phi(flip y_i) - Phi(y), restricted to the groundings touching atom i.
double flip_delta(const grounding::FormulaGrounding& fg, const grounding::World& world,
                  int atom_index) {
    double delta = 0.0;
    std::vector<uint8_t> values;
    for (const auto& [g, slot] : atom_occurrences(fg, atom_index)) {
        const auto& grounded = fg.groundings[g];
        values.resize(grounded.atom_indices.size());
        for (size_t s = 0; s < grounded.atom_indices.size(); ++s)
            values[s] = world.truth(grounded.atom_indices[s]) ? 1 : 0;
        double base = grounded.evaluator.eval(values) ? 1.0 : 0.0;
        values[slot] ^= 1;
        double flipped = grounded.evaluator.eval(values) ? 1.0 : 0.0;
        values[slot] ^= 1;
        delta += flipped - base;
    }
    return delta;
}

// Every distinct atom referenced by the formula's groundings, in slot order.
std::vector<int> formula_scope(const grounding::FormulaGrounding& fg) {
    std::vector<int> scope;
    for (const auto& g : fg.groundings)
        for (int a : g.atom_indices)
            if (std::find(scope.begin(), scope.end(), a) == scope.end()) scope.push_back(a);
    return scope;
}

}  // namespace

double pseudo_likelihood_prob(const grounding::FormulaGrounding& grounding,
                              const grounding::World& world, int atom_index, double lambda) {
    // factor = e^{l Phi(y)} / (e^{l Phi(y_i=0)} + e^{l Phi(y_i=1)})
    //        = 1 / (1 + e^{l (Phi(flip) - Phi(y))})
    double delta = flip_delta(grounding, world, atom_index);
    double z = lambda * delta;
    return z >= 0 ? 1.0 / (1.0 + std::exp(z)) : std::exp(-z) / (1.0 + std::exp(-z));
}

double ppl_log_likelihood(const grounding::FormulaGrounding& grounding,
                          const grounding::World& world, double lambda) {
    double total = 0.0;
    for (int atom : formula_scope(grounding))
        total += std::log(pseudo_likelihood_prob(grounding, world, atom, lambda));
    return total;
}

double lambda_ppl_optimum(const grounding::FormulaGrounding& grounding,
                          const grounding::World& world, double lambda_cap) {
    // maximize sum_i -log(1 + e^{l d_i}) with d_i the flip delta of atom i;
    // concave in l, solved by Newton with a bisection guard.
    std::vector<double> deltas;
    for (int atom : formula_scope(grounding)) {
        double d = flip_delta(grounding, world, atom);
        if (d != 0.0) deltas.push_back(d);
    }
    if (deltas.empty()) return 0.0;
    auto dg = [&](double l) {
        double s = 0.0;
        for (double d : deltas) {
            double z = l * d;
            double sig = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
            s -= d * sig;
        }
        return s;
    };
    double lo = -lambda_cap, hi = lambda_cap;
    if (dg(lo) <= 0) return lo;
    if (dg(hi) >= 0) return hi;
    double l = 0.0;
    for (int it = 0; it < 200; ++it) {
        double g = dg(l);
        if (std::abs(g) < 1e-12) break;
        (g > 0 ? lo : hi) = l;
        double h = 0.0;
        for (double d : deltas) {
            double z = l * d;
            double sig = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
            h -= d * d * sig * (1.0 - sig);
        }
        double next = h < -1e-300 ? l - g / h : (lo + hi) / 2;
        if (!(next > lo && next < hi)) next = (lo + hi) / 2;
        l = next;
        if (hi - lo < 1e-13) break;
    }
    return l;
}

// ---------------------------------------------------------------------------
// Shared helpers

std::vector<int> supervised_patterns(const data::Dataset& dataset) {
    std::vector<int> patterns;
    for (size_t p = 0; p < dataset.size(); ++p) {
        bool any = false;
        for (int8_t m : dataset.y_observed[p]) any |= m != 0;
        if (any) patterns.push_back(static_cast<int>(p));
    }
    return patterns;
}

std::vector<int> patterns_of_split(const data::Dataset& dataset, data::Split split) {
    std::vector<int> patterns;
    for (size_t p = 0; p < dataset.size(); ++p)
        if (dataset.split[p] == split) patterns.push_back(static_cast<int>(p));
    return patterns;
}

std::vector<double> forward_patterns(const net::Mlp& mlp, const data::Dataset& dataset,
                                     const std::vector<int>& patterns) {
    return net::forward(mlp, net::InputBatch::from_dataset(dataset, patterns));
}

namespace {

int decode_row(const double* f, int classes) {
    int best = 0;
    for (int c = 1; c < classes; ++c)
        if (f[c] > f[best]) best = c;
    return best;
}

}  // namespace

double forward_accuracy(const net::Mlp& mlp, const data::Dataset& dataset,
                        const std::vector<int>& patterns) {
    if (patterns.empty()) return 0.0;
    std::vector<double> f = forward_patterns(mlp, dataset, patterns);
    int classes = mlp.output_dim();
    size_t correct = 0;
    for (size_t r = 0; r < patterns.size(); ++r) {
        const double* row = &f[r * static_cast<size_t>(classes)];
        if (dataset.one_label) {
            correct += decode_row(row, classes) == dataset.label_of(patterns[r]) ? 1 : 0;
        } else {
            bool all = true;
            for (int c = 0; c < classes; ++c)
                all &= (row[c] >= 0.0 ? 1 : 0) == dataset.y[patterns[r]][c];
            correct += all ? 1 : 0;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(patterns.size());
}

double world_accuracy(const grounding::GroundAtomTable& table, const grounding::World& world,
                      const data::Dataset& dataset, const std::vector<int>& patterns) {
    if (patterns.empty()) return 0.0;
    std::vector<bool> wanted(dataset.size(), false);
    for (int p : patterns) wanted[p] = true;
    size_t correct = 0, total = 0;
    for (int p : patterns) {
        bool all = true;
        for (int a : table.groups[p])
            all &= world.values[a] == dataset.y[table.atoms[a].pattern][table.atoms[a].head];
        correct += all ? 1 : 0;
        ++total;
    }
    return static_cast<double>(correct) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// Training loops

namespace {

struct SupervisedTrainer {
    const data::Dataset& dataset;
    std::vector<int> patterns;
    net::SupervisionMode mode;
    std::vector<std::vector<int>> batches;

    SupervisedTrainer(const data::Dataset& ds, const OptimizerConfig& opt)
        : dataset(ds),
          patterns(supervised_patterns(ds)),
          mode(ds.one_label ? net::SupervisionMode::OneLabel
                            : net::SupervisionMode::MultiLabel) {
        if (patterns.size() <= opt.full_batch_threshold) {
            batches.push_back(patterns);
        } else {
            for (size_t start = 0; start < patterns.size(); start += opt.batch_size) {
                size_t end = std::min(start + opt.batch_size, patterns.size());
                batches.emplace_back(patterns.begin() + start, patterns.begin() + end);
            }
        }
    }

    std::vector<double> targets(const std::vector<int>& batch, int classes) const {
        std::vector<double> y(batch.size() * static_cast<size_t>(classes), 0.0);
        for (size_t r = 0; r < batch.size(); ++r)
            for (int c = 0; c < classes; ++c)
                y[r * classes + c] = dataset.y[batch[r]][c];
        return y;
    }

    // One pass over the supervised patterns, maximizing log p0.
    void epoch(net::Mlp& mlp, net::AdamState& adam) const {
        int classes = mlp.output_dim();
        for (const auto& batch : batches) {
            if (batch.empty()) continue;
            net::InputBatch input = net::InputBatch::from_dataset(dataset, batch);
            net::ForwardCache cache;
            std::vector<double> f = net::forward(mlp, input, &cache);
            std::vector<double> expected(f.size());
            for (size_t r = 0; r < batch.size(); ++r) {
                std::vector<double> row(f.begin() + r * classes, f.begin() + (r + 1) * classes);
                std::vector<double> p = mode == net::SupervisionMode::OneLabel
                                            ? net::prob_one_label(row)
                                            : net::prob_multi_label(row);
                std::copy(p.begin(), p.end(), expected.begin() + r * classes);
            }
            auto grads =
                net::grad_w_supervised(mlp, input, cache, targets(batch, classes), expected);
            net::adam_step(adam, mlp, grads);
        }
    }

    double loss(const net::Mlp& mlp) const {
        if (patterns.empty()) return 0.0;
        int classes = mlp.output_dim();
        std::vector<double> f = forward_patterns(mlp, dataset, patterns);
        return net::supervised_loss(f, targets(patterns, classes), patterns.size(),
                                    static_cast<size_t>(classes), mode);
    }
};

net::Mlp build_net(const TrainConfig& config, const data::Dataset& dataset, size_t n_heads) {
    std::vector<int> dims;
    dims.push_back(static_cast<int>(dataset.feature_dim));
    for (int h : config.net.hidden_dims) dims.push_back(h);
    dims.push_back(static_cast<int>(n_heads));
    std::vector<net::Activation> acts(config.net.hidden_dims.size(), config.net.activation);
    return net::make_mlp(dims, acts, config.seed);
}

bool uses_ppl(const TrainConfig& config, const grounding::FormulaGrounding& fg) {
    switch (config.likelihood) {
        case LikelihoodMode::PL: return false;
        case LikelihoodMode::PPL: return true;
        case LikelihoodMode::Auto:
            return !fg.table_counts || fg.n_free_atoms > config.auto_ppl_threshold;
    }
    return false;
}

}  // namespace

TrainState em_train(const kb::KnowledgeBase& kb_in, const data::Dataset& dataset,
                    const TrainConfig& config) {
    kb::KnowledgeBase kb = kb_in;
    if (config.mode == TrainMode::Baseline) kb.formulas.clear();
    if (config.mode == TrainMode::Sbr || config.mode == TrainMode::Ltn)
        throw std::runtime_error("em_train handles baseline|rnm_em; use sbr_ltn_train");

    grounding::GroundingOptions gopt;
    gopt.prune = config.prune;
    grounding::GroundNetwork network = grounding::ground_network(kb, dataset, gopt);
    const size_t n_heads = network.table.heads.size();

    TrainState state;
    state.mlp = build_net(config, dataset, n_heads);
    state.adam = net::make_adam(state.mlp, config.optimizer.lr);
    state.lambda.resize(kb.formulas.size());
    std::vector<bool> trainable(kb.formulas.size(), false);
    for (size_t c = 0; c < kb.formulas.size(); ++c) {
        state.lambda[c] = network.stats[c].lambda;
        trainable[c] = kb.formulas[c].weight_mode == kb::WeightMode::Trainable;
    }

    const grounding::World observed = grounding::observed_world(network.table, dataset);
    bool fully_observed = true;
    for (int8_t v : observed.values) fully_observed &= v != grounding::World::kUnknown;
    state.map_world = observed;

    SupervisedTrainer trainer(dataset, config.optimizer);
    std::vector<int> all_patterns(dataset.size());
    for (size_t p = 0; p < dataset.size(); ++p) all_patterns[p] = static_cast<int>(p);
    std::vector<int> val_patterns = patterns_of_split(dataset, data::Split::Valid);

    double best_val = -1.0;
    int val_stall = 0;
    for (int iteration = 1; iteration <= config.max_iterations; ++iteration) {
        // Expectation: complete the unobserved atoms by MAP under current f.
        grounding::World world = observed;
        if (!fully_observed) {
            std::vector<double> f = forward_patterns(state.mlp, dataset, all_patterns);
            std::vector<double> f_atom = infer::atom_scores(network.table, f, n_heads);
            infer::MapConfig map_config = config.map;
            map_config.tnorm = config.tnorm;
            map_config.seed = config.seed * 0x9E3779B97F4A7C15ull + static_cast<uint64_t>(iteration);
            world =
                infer::map_inference(network, f_atom, state.lambda, observed, map_config).world;
        }
        state.map_world = world;

        // Maximization: closed-form lambda on y* U y^T, then w backprop epochs.
        IterationRecord record;
        record.iteration = iteration;
        double max_delta = 0.0;
        record.avg_sat.assign(kb.formulas.size(),
                              std::numeric_limits<double>::quiet_NaN());
        for (size_t c = 0; c < kb.formulas.size(); ++c) {
            const auto& fg = network.by_formula[c];
            if (!trainable[c] || fg.groundings.empty()) continue;
            double updated = state.lambda[c];
            if (uses_ppl(config, fg)) {
                updated = lambda_ppl_optimum(fg, world);
            } else {
                if (!fg.table_counts)
                    throw std::runtime_error(
                        "formula " + std::to_string(fg.formula) +
                        " has no uniform truth table; piecewise likelihood cannot "
                        "set its weight (use likelihood=ppl)");
                record.avg_sat[c] = grounding::average_satisfaction(fg, world);
                updated = lambda_closed_form(record.avg_sat[c], network.stats[c],
                                             config.epsilon);
            }
            max_delta = std::max(max_delta, std::abs(updated - state.lambda[c]));
            state.lambda[c] = updated;
        }
        for (int e = 0; e < config.optimizer.epochs_per_step; ++e)
            trainer.epoch(state.mlp, state.adam);

        record.lambda = state.lambda;
        record.train_loss = trainer.loss(state.mlp);
        record.train_accuracy = forward_accuracy(state.mlp, dataset, trainer.patterns);
        if (!val_patterns.empty()) {
            // validation atoms are unobserved during training; score the MAP
            // completion when it exists, the plain forward decode otherwise
            record.val_accuracy =
                fully_observed
                    ? forward_accuracy(state.mlp, dataset, val_patterns)
                    : world_accuracy(network.table, world, dataset, val_patterns);
        }
        state.log.push_back(record);
        state.iterations = iteration;

        if (!std::isfinite(record.train_loss))
            throw std::runtime_error("training loss diverged (non-finite)");

        bool lambda_converged = max_delta < config.lambda_tol && iteration > 1;
        if (!val_patterns.empty()) {
            if (record.val_accuracy > best_val + 1e-12) {
                best_val = record.val_accuracy;
                val_stall = 0;
            } else {
                ++val_stall;
            }
            if (lambda_converged && val_stall >= config.val_patience) break;
        }
        // No validation split: run to max_iterations (the convergence rule
        // requires both conditions).
    }
    return state;
}

double sbr_objective(const grounding::GroundNetwork& network, const data::Dataset& dataset,
                     const net::Mlp& mlp, const std::vector<double>& lambda,
                     fuzzy::TNorm tnorm, std::vector<std::vector<double>>* grads) {
    const int classes = mlp.output_dim();
    net::SupervisionMode mode = dataset.one_label ? net::SupervisionMode::OneLabel
                                                  : net::SupervisionMode::MultiLabel;
    std::vector<int> all_patterns(dataset.size());
    for (size_t p = 0; p < dataset.size(); ++p) all_patterns[p] = static_cast<int>(p);
    net::InputBatch input = net::InputBatch::from_dataset(dataset, all_patterns);

    net::ForwardCache cache;
    std::vector<double> f = net::forward(mlp, input, &cache);
    // squash scores into [0,1] per pattern
    std::vector<double> squashed(f.size());
    for (size_t r = 0; r < all_patterns.size(); ++r) {
        std::vector<double> row(f.begin() + r * classes, f.begin() + (r + 1) * classes);
        std::vector<double> p = mode == net::SupervisionMode::OneLabel
                                    ? net::prob_one_label(row)
                                    : net::prob_multi_label(row);
        std::copy(p.begin(), p.end(), squashed.begin() + r * classes);
    }
    std::vector<double> atom_values(network.table.size(), 0.0);
    for (size_t a = network.table.n_learnable; a < network.table.size(); ++a)
        atom_values[a] = network.table.atoms[a].evidence_value ? 1.0 : 0.0;
    for (size_t a = 0; a < network.table.n_learnable; ++a) {
        const auto& atom = network.table.atoms[a];
        atom_values[a] = squashed[static_cast<size_t>(atom.pattern) * classes + atom.head];
    }
    // constraint term and dPhi^s/datom, weighted by the fixed rule strengths
    double objective = 0.0;
    std::vector<double> atom_grad(network.table.size(), 0.0);
    for (size_t c = 0; c < network.by_formula.size(); ++c) {
        if (lambda[c] == 0.0 || network.by_formula[c].groundings.empty()) continue;
        objective += lambda[c] *
                     fuzzy::surrogate_mean(network.by_formula[c], atom_values, tnorm,
                                           grads ? &atom_grad : nullptr, lambda[c]);
    }
    // supervised log-likelihood
    double supervised_ll = 0.0;
    for (size_t r = 0; r < all_patterns.size(); ++r) {
        int pattern = all_patterns[r];
        if (!dataset.y_observed[pattern][0] && dataset.one_label) continue;
        for (int c = 0; c < classes; ++c) {
            if (!dataset.y_observed[pattern][c]) continue;
            double p = squashed[r * classes + c];
            if (dataset.one_label) {
                if (dataset.y[pattern][c]) supervised_ll += std::log(std::max(p, 1e-300));
            } else {
                supervised_ll +=
                    std::log(std::max(dataset.y[pattern][c] ? p : 1.0 - p, 1e-300));
            }
        }
    }
    objective += supervised_ll;
    if (!grads) return objective;

    // chain through the squashing into f, add the supervised term
    std::vector<double> grad_f(f.size(), 0.0);
    for (size_t r = 0; r < all_patterns.size(); ++r) {
        int pattern = all_patterns[r];
        const double* p = &squashed[r * classes];
        double* g = &grad_f[r * classes];
        std::vector<double> ga(classes, 0.0);
        for (int c = 0; c < classes; ++c) ga[c] = atom_grad[network.table.groups[pattern][c]];
        if (mode == net::SupervisionMode::OneLabel) {
            double inner = 0.0;
            for (int c = 0; c < classes; ++c) inner += ga[c] * p[c];
            for (int c = 0; c < classes; ++c) g[c] = p[c] * (ga[c] - inner);
        } else {
            for (int c = 0; c < classes; ++c) g[c] = ga[c] * p[c] * (1.0 - p[c]);
        }
        if (!dataset.one_label) {
            for (int c = 0; c < classes; ++c)
                if (dataset.y_observed[pattern][c]) g[c] += dataset.y[pattern][c] - p[c];
        } else if (dataset.y_observed[pattern][0]) {
            for (int c = 0; c < classes; ++c) g[c] += dataset.y[pattern][c] - p[c];
        }
    }
    *grads = net::backward(mlp, input, cache, grad_f);
    return objective;
}

TrainState sbr_ltn_train(const kb::KnowledgeBase& kb, const data::Dataset& dataset,
                         const TrainConfig& config) {
    for (const auto& formula : kb.formulas)
        if (formula.weight_mode != kb::WeightMode::Fixed)
            throw std::runtime_error("formula " + std::to_string(formula.id) +
                                     " has a trainable weight; SBR/LTN require @fixed rules");

    grounding::GroundingOptions gopt;
    gopt.prune = config.prune;
    grounding::GroundNetwork network = grounding::ground_network(kb, dataset, gopt);
    const size_t n_heads = network.table.heads.size();

    TrainState state;
    state.mlp = build_net(config, dataset, n_heads);
    state.adam = net::make_adam(state.mlp, config.optimizer.lr);
    for (const auto& stats : network.stats) state.lambda.push_back(stats.lambda);
    state.map_world = grounding::observed_world(network.table, dataset);

    std::vector<int> val_patterns = patterns_of_split(dataset, data::Split::Valid);
    SupervisedTrainer loss_helper(dataset, config.optimizer);

    double best_val = -1.0;
    int val_stall = 0;
    for (int iteration = 1; iteration <= config.max_iterations; ++iteration) {
        for (int e = 0; e < config.optimizer.epochs_per_step; ++e) {
            std::vector<std::vector<double>> grads;
            sbr_objective(network, dataset, state.mlp, state.lambda, config.tnorm, &grads);
            net::adam_step(state.adam, state.mlp, grads);
        }

        IterationRecord record;
        record.iteration = iteration;
        record.lambda = state.lambda;
        record.avg_sat.assign(kb.formulas.size(), std::numeric_limits<double>::quiet_NaN());
        record.train_loss = loss_helper.loss(state.mlp);
        record.train_accuracy = forward_accuracy(state.mlp, dataset, loss_helper.patterns);
        if (!val_patterns.empty())
            record.val_accuracy = forward_accuracy(state.mlp, dataset, val_patterns);
        state.log.push_back(record);
        state.iterations = iteration;
        if (!std::isfinite(record.train_loss))
            throw std::runtime_error("training loss diverged (non-finite)");

        if (!val_patterns.empty()) {
            if (record.val_accuracy > best_val + 1e-12) {
                best_val = record.val_accuracy;
                val_stall = 0;
            } else if (++val_stall >= config.val_patience && iteration > 1) {
                break;
            }
        }
    }
    return state;
}

}  // namespace rnm::train
