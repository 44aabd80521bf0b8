#pragma once

#include <string>
#include <vector>

#include "rnm/expr.hpp"
#include "rnm/grounding.hpp"

namespace rnm::fuzzy {

enum class TNorm { Product, Goedel, Lukasiewicz };

TNorm tnorm_from_string(const std::string& name);
std::string to_string(TNorm t);

// The connective tables of the three fundamental t-norm fuzzy logics.
// NOT is the strong negation 1-a everywhere; IMPLIES is the residuum.
// For unary NOT, b is ignored.
double tnorm_apply(TNorm t, expr::Op op, double a, double b = 0.0);

// A grounded formula body over relaxed atom values is just a compiled Expr
// evaluated with the t-norm tables instead of the Boolean ones.
using FuzzyExpr = expr::Expr;

// Value plus an element of the subdifferential with respect to each slot
// (exact gradient wherever the expression is smooth; min/max kinks break
// ties toward the first argument in AST order).
struct EvalGrad {
    double value = 0.0;
    std::vector<double> grad;
};

double fuzzy_eval(const FuzzyExpr& e, TNorm t, const std::vector<double>& values);
EvalGrad fuzzy_eval_grad(const FuzzyExpr& e, TNorm t, const std::vector<double>& values);

// Phi^s_c = sum over materialized groundings of the fuzzy body value, plus the
// folded constant-true count, so it collapses to potential_value on crisp
// worlds. If grad is non-null, grad_scale * dPhi^s/dy_a is accumulated into
// (*grad)[a] for every referenced atom a.
double surrogate_potential(const grounding::FormulaGrounding& fg,
                           const std::vector<double>& atom_values, TNorm t,
                           std::vector<double>* grad = nullptr, double grad_scale = 1.0);

// Mean-aggregated variant used by the SBR/LTN objectives:
// (1/|G_c|) * sum_g fuzzy(g). Undefined (throws) without materialized
// groundings.
double surrogate_mean(const grounding::FormulaGrounding& fg,
                      const std::vector<double>& atom_values, TNorm t,
                      std::vector<double>* grad = nullptr, double grad_scale = 1.0);

enum class Aggregation { Mean, TNormIterated, TConormIterated };

// forall as arithmetic mean or iterated AND; exists as iterated OR.
double aggregate_quantifier(kb::Quantifier q, const std::vector<double>& values,
                            Aggregation mode, TNorm t);

}  // namespace rnm::fuzzy
