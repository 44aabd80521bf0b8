#pragma once

// Test-only oracles: exhaustive-enumeration MAP and partition function,
// finite differences, and random instance generators. These stay independent
// of the gradient/closed-form paths they check.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "rnm/dataset.hpp"
#include "rnm/grounding.hpp"
#include "rnm/kb.hpp"

namespace rnm::oracle {

using Rng = std::mt19937_64;

// Multi-label (or one-label) dataset whose classes are the given unary
// predicate names; features are 1-dim placeholders, labels all class 0.
data::Dataset toy_dataset(int n_patterns, const std::vector<std::string>& class_names,
                          bool one_label = false);

// KB text over unary learnable predicates A0..A{k-1} on domain `patterns`
// plus one random universally quantified rule; callers append more rules.
std::string toy_kb_header(int n_classes);

// Random rule body over the given predicate names applied to variable x,
// as KB text ("rule: forall x : ..."). max_leaves <= 6 keeps n_c small.
std::string random_rule_text(Rng& rng, const std::vector<std::string>& preds, int max_leaves);

// Exact argmax of sum f.y (free atoms) + sum_c lambda_c Phi_c over all crisp
// completions of `observed`; respects one-label group structure. Throws above
// 2^24 combinations.
grounding::World brute_force_map(const grounding::GroundNetwork& network,
                                 const std::vector<double>& f_atom,
                                 const std::vector<double>& lambda,
                                 const grounding::World& observed,
                                 double* best_objective = nullptr);

// Exact partition function over the same completion space:
// Z = sum_y exp(sum f.y + sum_c lambda_c Phi_c(y)).
double brute_force_partition(const grounding::GroundNetwork& network,
                             const std::vector<double>& f_atom,
                             const std::vector<double>& lambda,
                             const grounding::World& observed);

double central_difference(const std::function<double(double)>& f, double x, double h);

double relative_error(double got, double want);

}  // namespace rnm::oracle
