#include "rnm/infer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace rnm::infer {

void RelaxedWorld::sync() {
    for (const auto& group : groups) {
        double max = -1e300;
        for (int k : group) max = std::max(max, logits[k]);
        double z = 0.0;
        for (int k : group) z += std::exp(logits[k] - max);
        for (int k : group) values[free_atoms[k]] = std::exp(logits[k] - max) / z;
    }
    for (int k : independent)
        values[free_atoms[k]] = 1.0 / (1.0 + std::exp(-logits[k]));
}

RelaxedWorld make_relaxed(const grounding::GroundAtomTable& table,
                          const grounding::World& world) {
    RelaxedWorld relaxed;
    relaxed.values.resize(table.size());
    for (size_t a = 0; a < table.size(); ++a)
        relaxed.values[a] = world.known(static_cast<int>(a)) ? world.values[a] : 0.5;

    std::vector<int> atom_to_free(table.size(), -1);
    auto add_free = [&](int atom) {
        atom_to_free[atom] = static_cast<int>(relaxed.free_atoms.size());
        relaxed.free_atoms.push_back(atom);
        relaxed.logits.push_back(0.0);
        return atom_to_free[atom];
    };

    if (table.one_label) {
        for (const auto& group : table.groups) {
            size_t unknown = 0;
            for (int a : group) unknown += world.known(a) ? 0 : 1;
            if (unknown == 0) continue;
            if (unknown != group.size())
                throw std::runtime_error(
                    "one-label group is partially observed; cannot relax it");
            std::vector<int> block;
            for (int a : group) block.push_back(add_free(a));
            relaxed.groups.push_back(std::move(block));
        }
    } else {
        for (size_t a = 0; a < table.n_learnable; ++a)
            if (!world.known(static_cast<int>(a)))
                relaxed.independent.push_back(add_free(static_cast<int>(a)));
    }
    relaxed.sync();
    return relaxed;
}

std::vector<double> atom_scores(const grounding::GroundAtomTable& table,
                                const std::vector<double>& f, size_t n_heads) {
    std::vector<double> scores(table.size(), 0.0);
    for (size_t a = 0; a < table.n_learnable; ++a) {
        const auto& atom = table.atoms[a];
        scores[a] = f[static_cast<size_t>(atom.pattern) * n_heads + atom.head];
    }
    return scores;
}

double map_objective(const grounding::GroundNetwork& network, const RelaxedWorld& relaxed,
                     const std::vector<double>& f_atom, const std::vector<double>& lambda,
                     fuzzy::TNorm t) {
    double objective = 0.0;
    for (int a : relaxed.free_atoms) objective += f_atom[a] * relaxed.values[a];
    for (size_t c = 0; c < network.by_formula.size(); ++c) {
        if (lambda[c] == 0.0) continue;
        objective +=
            lambda[c] * fuzzy::surrogate_potential(network.by_formula[c], relaxed.values, t);
    }
    return objective;
}

std::vector<double> map_gradient_atoms(const grounding::GroundNetwork& network,
                                       const RelaxedWorld& relaxed,
                                       const std::vector<double>& f_atom,
                                       const std::vector<double>& lambda, fuzzy::TNorm t) {
    std::vector<double> grad(relaxed.values.size(), 0.0);
    for (size_t c = 0; c < network.by_formula.size(); ++c) {
        if (lambda[c] == 0.0) continue;
        fuzzy::surrogate_potential(network.by_formula[c], relaxed.values, t, &grad, lambda[c]);
    }
    for (int a : relaxed.free_atoms) grad[a] += f_atom[a];
    return grad;
}

std::vector<double> map_gradient(const grounding::GroundNetwork& network,
                                 const RelaxedWorld& relaxed,
                                 const std::vector<double>& f_atom,
                                 const std::vector<double>& lambda, fuzzy::TNorm t) {
    std::vector<double> atom_grad = map_gradient_atoms(network, relaxed, f_atom, lambda, t);
    std::vector<double> grad(relaxed.logits.size(), 0.0);
    for (const auto& group : relaxed.groups) {
        double inner = 0.0;
        for (int k : group) inner += atom_grad[relaxed.free_atoms[k]] *
                                     relaxed.values[relaxed.free_atoms[k]];
        for (int k : group) {
            double p = relaxed.values[relaxed.free_atoms[k]];
            grad[k] = p * (atom_grad[relaxed.free_atoms[k]] - inner);
        }
    }
    for (int k : relaxed.independent) {
        double p = relaxed.values[relaxed.free_atoms[k]];
        grad[k] = atom_grad[relaxed.free_atoms[k]] * p * (1.0 - p);
    }
    return grad;
}

double discrete_objective(const grounding::GroundNetwork& network,
                          const grounding::World& world, const std::vector<double>& f_atom,
                          const std::vector<int>& scored_atoms,
                          const std::vector<double>& lambda) {
    double objective = 0.0;
    for (int a : scored_atoms)
        if (world.truth(a)) objective += f_atom[a];
    for (size_t c = 0; c < network.by_formula.size(); ++c) {
        if (lambda[c] == 0.0) continue;
        objective += lambda[c] * grounding::potential_value(network.by_formula[c], world);
    }
    return objective;
}

namespace {

grounding::World decode(const grounding::World& observed, const RelaxedWorld& relaxed) {
    grounding::World world = observed;
    for (const auto& group : relaxed.groups) {
        int best = group[0];
        for (int k : group)
            if (relaxed.logits[k] > relaxed.logits[best]) best = k;
        for (int k : group)
            world.values[relaxed.free_atoms[k]] = (k == best) ? 1 : 0;
    }
    for (int k : relaxed.independent)
        world.values[relaxed.free_atoms[k]] = relaxed.logits[k] >= 0.0 ? 1 : 0;
    return world;
}

// Greedy discrete coordinate ascent after decoding: reassign one-label groups
// and flip independent atoms while the discrete objective improves. Escapes
// the plateaus of the fuzzy relaxation without ever lowering the objective;
// with lambda = 0 the decoded argmax/threshold world is already optimal and
// stays untouched.
class Polisher {
public:
    Polisher(const grounding::GroundNetwork& network, const RelaxedWorld& relaxed,
             const std::vector<double>& f_atom, const std::vector<double>& lambda)
        : network_(network), relaxed_(relaxed), f_atom_(f_atom), lambda_(lambda) {
        touching_.resize(network.table.size());
        for (size_t c = 0; c < network.by_formula.size(); ++c) {
            if (lambda[c] == 0.0) continue;
            const auto& groundings = network.by_formula[c].groundings;
            for (size_t g = 0; g < groundings.size(); ++g)
                for (int a : groundings[g].atom_indices)
                    touching_[a].push_back({static_cast<int>(c), static_cast<int>(g)});
        }
    }

    void run(grounding::World& world) const {
        for (int pass = 0; pass < 100; ++pass) {
            bool improved = false;
            for (const auto& group : relaxed_.groups) improved |= improve_group(world, group);
            for (int k : relaxed_.independent)
                improved |= improve_flip(world, relaxed_.free_atoms[k]);
            if (!improved) return;
        }
    }

private:
    double local_objective(const grounding::World& world, const std::vector<int>& atoms,
                           const std::vector<std::pair<int, int>>& cliques) const {
        double value = 0.0;
        for (int a : atoms)
            if (world.values[a]) value += f_atom_[a];
        std::vector<uint8_t> slot_values;
        for (const auto& [c, g] : cliques) {
            const auto& grounded = network_.by_formula[c].groundings[g];
            slot_values.resize(grounded.atom_indices.size());
            for (size_t s = 0; s < grounded.atom_indices.size(); ++s)
                slot_values[s] = world.values[grounded.atom_indices[s]];
            if (grounded.evaluator.eval(slot_values)) value += lambda_[c];
        }
        return value;
    }

    std::vector<std::pair<int, int>> cliques_of(const std::vector<int>& atoms) const {
        std::vector<std::pair<int, int>> cliques;
        for (int a : atoms)
            cliques.insert(cliques.end(), touching_[a].begin(), touching_[a].end());
        std::sort(cliques.begin(), cliques.end());
        cliques.erase(std::unique(cliques.begin(), cliques.end()), cliques.end());
        return cliques;
    }

    bool improve_group(grounding::World& world, const std::vector<int>& group) const {
        std::vector<int> atoms;
        for (int k : group) atoms.push_back(relaxed_.free_atoms[k]);
        auto cliques = cliques_of(atoms);
        int current = -1;
        for (size_t i = 0; i < atoms.size(); ++i)
            if (world.values[atoms[i]]) current = static_cast<int>(i);
        double base = local_objective(world, atoms, cliques);
        int best = current;
        double best_value = base;
        for (size_t candidate = 0; candidate < atoms.size(); ++candidate) {
            if (static_cast<int>(candidate) == current) continue;
            for (size_t i = 0; i < atoms.size(); ++i)
                world.values[atoms[i]] = i == candidate ? 1 : 0;
            double value = local_objective(world, atoms, cliques);
            if (value > best_value + 1e-12) {
                best_value = value;
                best = static_cast<int>(candidate);
            }
        }
        for (size_t i = 0; i < atoms.size(); ++i)
            world.values[atoms[i]] = static_cast<int>(i) == best ? 1 : 0;
        return best != current;
    }

    bool improve_flip(grounding::World& world, int atom) const {
        std::vector<int> atoms = {atom};
        auto cliques = cliques_of(atoms);
        double base = local_objective(world, atoms, cliques);
        world.values[atom] ^= 1;
        double flipped = local_objective(world, atoms, cliques);
        if (flipped > base + 1e-12) return true;
        world.values[atom] ^= 1;
        return false;
    }

    const grounding::GroundNetwork& network_;
    const RelaxedWorld& relaxed_;
    const std::vector<double>& f_atom_;
    const std::vector<double>& lambda_;
    std::vector<std::vector<std::pair<int, int>>> touching_;
};

}  // namespace

MapResult map_inference(const grounding::GroundNetwork& network,
                        const std::vector<double>& f_atom, const std::vector<double>& lambda,
                        const grounding::World& observed, const MapConfig& config) {
    if (config.steps < 1) throw std::runtime_error("map_inference needs steps >= 1");
    RelaxedWorld relaxed = make_relaxed(network.table, observed);
    MapResult result;
    if (relaxed.free_atoms.empty()) {
        result.world = observed;
        result.objective = discrete_objective(network, observed, f_atom, {}, lambda);
        result.relaxed = relaxed.values;
        return result;
    }

    Polisher polisher(network, relaxed, f_atom, lambda);
    bool first_candidate = true;
    auto consider = [&](grounding::World world, const RelaxedWorld& state,
                        const std::vector<double>& trace) {
        polisher.run(world);
        double objective =
            discrete_objective(network, world, f_atom, relaxed.free_atoms, lambda);
        if (!std::isfinite(objective))
            throw std::runtime_error("map_inference: non-finite objective");
        if (first_candidate || objective > result.objective) {
            result.world = world;
            result.objective = objective;
            result.relaxed = state.values;
            result.trace = trace;
            first_candidate = false;
        }
    };

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> init_noise(0.0, 1.0);
    for (int restart = 0; restart <= config.restarts; ++restart) {
        RelaxedWorld state = relaxed;
        if (restart == 0) {
            // f-initialized start: the step-0 decode already realizes the
            // lambda = 0 argmax solution exactly.
            for (size_t k = 0; k < state.free_atoms.size(); ++k)
                state.logits[k] = f_atom[state.free_atoms[k]];
        } else {
            for (auto& logit : state.logits) logit = init_noise(rng);
        }
        state.sync();
        if (restart == 0) consider(decode(observed, state), state, {});

        // Adam ascent over the logits
        std::vector<double> m(state.logits.size(), 0.0), v(state.logits.size(), 0.0);
        std::vector<double> trace;
        trace.reserve(static_cast<size_t>(config.steps));
        for (int step = 1; step <= config.steps; ++step) {
            std::vector<double> grad =
                map_gradient(network, state, f_atom, lambda, config.tnorm);
            double bc1 = 1.0 - std::pow(0.9, step);
            double bc2 = 1.0 - std::pow(0.999, step);
            for (size_t k = 0; k < grad.size(); ++k) {
                if (!std::isfinite(grad[k]))
                    throw std::runtime_error("map_inference: non-finite gradient");
                m[k] = 0.9 * m[k] + 0.1 * grad[k];
                v[k] = 0.999 * v[k] + 0.001 * grad[k] * grad[k];
                state.logits[k] += config.lr * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + 1e-8);
            }
            state.sync();
            trace.push_back(map_objective(network, state, f_atom, lambda, config.tnorm));
        }
        consider(decode(observed, state), state, trace);
    }
    return result;
}

}  // namespace rnm::infer
