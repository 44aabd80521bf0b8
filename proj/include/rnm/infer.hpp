#pragma once

#include <cstdint>
#include <vector>

#include "rnm/fuzzy.hpp"
#include "rnm/grounding.hpp"
#include "rnm/net.hpp"

namespace rnm::infer {

struct MapConfig {
    int steps = 200;
    double lr = 0.1;
    int restarts = 3;  // random restarts on top of the f-initialized start
    uint64_t seed = 0;
    fuzzy::TNorm tnorm = fuzzy::TNorm::Product;
};

// Relaxation of the unobserved output variables. One-label groups are
// parametrized by a softmax over free logits (the group always sums to one,
// which realizes the -infinity mutual-exclusivity potential structurally);
// independent atoms by a sigmoid each. Evidence and observed atoms stay
// pinned at their crisp values.
struct RelaxedWorld {
    std::vector<double> values;            // per table atom, in [0,1]
    std::vector<int> free_atoms;           // optimized atom indices
    std::vector<double> logits;            // parallel to free_atoms
    std::vector<std::vector<int>> groups;  // softmax blocks (indices into free_atoms)
    std::vector<int> independent;          // sigmoid entries (indices into free_atoms)

    void sync();  // logits -> values
};

// Builds the parametrization for every unknown atom of `world`; one-label
// groups come from the table. Groups must be unknown as a block.
RelaxedWorld make_relaxed(const grounding::GroundAtomTable& table,
                          const grounding::World& world);

// f value per learnable table atom (f of its pattern at its head), given
// row-major pattern x head network scores.
std::vector<double> atom_scores(const grounding::GroundAtomTable& table,
                                const std::vector<double>& f, size_t n_heads);

// sum_k f_k y_k over the free atoms + sum_c lambda_c Phi^s_c(y).
double map_objective(const grounding::GroundNetwork& network, const RelaxedWorld& relaxed,
                     const std::vector<double>& f_atom, const std::vector<double>& lambda,
                     fuzzy::TNorm t);

// d objective / d y_k = f_k + sum_c lambda_c dPhi^s_c/dy_k over the free
// atoms (raw, before the softmax/sigmoid chain).
std::vector<double> map_gradient_atoms(const grounding::GroundNetwork& network,
                                       const RelaxedWorld& relaxed,
                                       const std::vector<double>& f_atom,
                                       const std::vector<double>& lambda, fuzzy::TNorm t);

// Chains the raw atom gradient through the parametrization; parallel to
// relaxed.logits.
std::vector<double> map_gradient(const grounding::GroundNetwork& network,
                                 const RelaxedWorld& relaxed,
                                 const std::vector<double>& f_atom,
                                 const std::vector<double>& lambda, fuzzy::TNorm t);

// f . y over the given atoms + sum_c lambda_c Phi_c of a crisp world.
double discrete_objective(const grounding::GroundNetwork& network,
                          const grounding::World& world, const std::vector<double>& f_atom,
                          const std::vector<int>& scored_atoms,
                          const std::vector<double>& lambda);

struct MapResult {
    grounding::World world;       // crisp; evidence/observed atoms untouched
    double objective = 0.0;       // discrete objective of the returned world
    std::vector<double> relaxed;  // final relaxed values of the best restart
    std::vector<double> trace;    // objective per ascent step (best restart)
};

// Projected gradient ascent over the relaxation, decoded to crisp values
// (argmax within each one-label group, 0.5 threshold for independent atoms);
// the best candidate across the f-initialized start and `restarts` random
// starts wins by discrete objective. Deterministic for a fixed config.seed.
MapResult map_inference(const grounding::GroundNetwork& network,
                        const std::vector<double>& f_atom, const std::vector<double>& lambda,
                        const grounding::World& observed, const MapConfig& config);

}  // namespace rnm::infer
