#include "rnm/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rnm::fuzzy {

namespace {
constexpr double kDivisionFloor = 1e-12;  // Product residuum b/a clamp
}

TNorm tnorm_from_string(const std::string& name) {
    if (name == "product") return TNorm::Product;
    if (name == "goedel" || name == "godel") return TNorm::Goedel;
    if (name == "lukasiewicz") return TNorm::Lukasiewicz;
    throw std::runtime_error("unknown t-norm '" + name +
                             "' (expected product|goedel|lukasiewicz)");
}

std::string to_string(TNorm t) {
    switch (t) {
        case TNorm::Product: return "product";
        case TNorm::Goedel: return "goedel";
        case TNorm::Lukasiewicz: return "lukasiewicz";
    }
    return "?";
}

double tnorm_apply(TNorm t, expr::Op op, double a, double b) {
    switch (op) {
        case expr::Op::Not:
            return 1.0 - a;
        case expr::Op::And:
            switch (t) {
                case TNorm::Product: return a * b;
                case TNorm::Goedel: return std::min(a, b);
                case TNorm::Lukasiewicz: return std::max(0.0, a + b - 1.0);
            }
            break;
        case expr::Op::Or:
            switch (t) {
                case TNorm::Product: return a + b - a * b;
                case TNorm::Goedel: return std::max(a, b);
                case TNorm::Lukasiewicz: return std::min(1.0, a + b);
            }
            break;
        case expr::Op::Implies:
            switch (t) {
                case TNorm::Product: return a <= b || a < kDivisionFloor ? 1.0 : b / a;
                case TNorm::Goedel: return a <= b ? 1.0 : b;
                case TNorm::Lukasiewicz: return std::min(1.0, 1.0 - a + b);
            }
            break;
        default:
            break;
    }
    throw std::runtime_error("tnorm_apply: not a connective");
}

namespace {

struct Evaluator {
    const FuzzyExpr& e;
    TNorm t;
    const std::vector<double>& values;
    std::vector<double> node_value;

    void forward() {
        node_value.resize(e.nodes.size());
        for (size_t i = 0; i < e.nodes.size(); ++i) {
            const expr::Node& node = e.nodes[i];
            // nodes are stored with children before parents
            switch (node.op) {
                case expr::Op::Const: node_value[i] = node.value ? 1.0 : 0.0; break;
                case expr::Op::Var: node_value[i] = values[node.var]; break;
                case expr::Op::Not:
                    node_value[i] = 1.0 - node_value[node.lhs];
                    break;
                default:
                    node_value[i] =
                        tnorm_apply(t, node.op, node_value[node.lhs], node_value[node.rhs]);
            }
        }
    }

    // Reverse pass; adjoints of min/max kinks follow the first argument.
    void backward(std::vector<double>& grad) {
        std::vector<double> adjoint(e.nodes.size(), 0.0);
        adjoint[e.root] = 1.0;
        for (size_t k = e.nodes.size(); k-- > 0;) {
            const expr::Node& node = e.nodes[k];
            double w = adjoint[k];
            if (w == 0.0 && node.op != expr::Op::Var) continue;
            double a = node.lhs >= 0 ? node_value[node.lhs] : 0.0;
            double b = node.rhs >= 0 ? node_value[node.rhs] : 0.0;
            switch (node.op) {
                case expr::Op::Const: break;
                case expr::Op::Var: grad[node.var] += w; break;
                case expr::Op::Not: adjoint[node.lhs] -= w; break;
                case expr::Op::And:
                    switch (t) {
                        case TNorm::Product:
                            adjoint[node.lhs] += w * b;
                            adjoint[node.rhs] += w * a;
                            break;
                        case TNorm::Goedel:
                            adjoint[a <= b ? node.lhs : node.rhs] += w;
                            break;
                        case TNorm::Lukasiewicz:
                            if (a + b - 1.0 > 0.0) {
                                adjoint[node.lhs] += w;
                                adjoint[node.rhs] += w;
                            }
                            break;
                    }
                    break;
                case expr::Op::Or:
                    switch (t) {
                        case TNorm::Product:
                            adjoint[node.lhs] += w * (1.0 - b);
                            adjoint[node.rhs] += w * (1.0 - a);
                            break;
                        case TNorm::Goedel:
                            adjoint[a >= b ? node.lhs : node.rhs] += w;
                            break;
                        case TNorm::Lukasiewicz:
                            if (a + b < 1.0) {
                                adjoint[node.lhs] += w;
                                adjoint[node.rhs] += w;
                            }
                            break;
                    }
                    break;
                case expr::Op::Implies:
                    switch (t) {
                        case TNorm::Product:
                            if (a > b && a >= kDivisionFloor) {
                                adjoint[node.lhs] += -w * b / (a * a);
                                adjoint[node.rhs] += w / a;
                            }
                            break;
                        case TNorm::Goedel:
                            if (a > b) adjoint[node.rhs] += w;
                            break;
                        case TNorm::Lukasiewicz:
                            if (b < a) {
                                adjoint[node.lhs] -= w;
                                adjoint[node.rhs] += w;
                            }
                            break;
                    }
                    break;
            }
        }
    }
};

}  // namespace

double fuzzy_eval(const FuzzyExpr& e, TNorm t, const std::vector<double>& values) {
    Evaluator ev{e, t, values, {}};
    ev.forward();
    return ev.node_value[e.root];
}

EvalGrad fuzzy_eval_grad(const FuzzyExpr& e, TNorm t, const std::vector<double>& values) {
    Evaluator ev{e, t, values, {}};
    ev.forward();
    EvalGrad out;
    out.value = ev.node_value[e.root];
    out.grad.assign(static_cast<size_t>(e.n_vars), 0.0);
    ev.backward(out.grad);
    return out;
}

namespace {

double surrogate_sum(const grounding::FormulaGrounding& fg,
                     const std::vector<double>& atom_values, TNorm t,
                     std::vector<double>* grad, double grad_scale, bool include_const) {
    double total = include_const ? static_cast<double>(fg.n_const_true) : 0.0;
    std::vector<double> local;
    std::vector<double> local_grad;
    for (const auto& g : fg.groundings) {
        local.resize(g.atom_indices.size());
        for (size_t s = 0; s < g.atom_indices.size(); ++s)
            local[s] = atom_values[g.atom_indices[s]];
        if (!grad) {
            total += fuzzy_eval(g.evaluator, t, local);
            continue;
        }
        Evaluator ev{g.evaluator, t, local, {}};
        ev.forward();
        total += ev.node_value[g.evaluator.root];
        local_grad.assign(local.size(), 0.0);
        ev.backward(local_grad);
        for (size_t s = 0; s < g.atom_indices.size(); ++s)
            (*grad)[g.atom_indices[s]] += grad_scale * local_grad[s];
    }
    return total;
}

}  // namespace

double surrogate_potential(const grounding::FormulaGrounding& fg,
                           const std::vector<double>& atom_values, TNorm t,
                           std::vector<double>* grad, double grad_scale) {
    return surrogate_sum(fg, atom_values, t, grad, grad_scale, true);
}

double surrogate_mean(const grounding::FormulaGrounding& fg,
                      const std::vector<double>& atom_values, TNorm t,
                      std::vector<double>* grad, double grad_scale) {
    if (fg.groundings.empty())
        throw std::runtime_error("formula " + std::to_string(fg.formula) +
                                 " has no materialized groundings to aggregate");
    double inv = 1.0 / static_cast<double>(fg.groundings.size());
    return inv * surrogate_sum(fg, atom_values, t, grad, grad_scale * inv, false);
}

double aggregate_quantifier(kb::Quantifier q, const std::vector<double>& values,
                            Aggregation mode, TNorm t) {
    if (values.empty()) throw std::runtime_error("cannot aggregate an empty grounding set");
    switch (mode) {
        case Aggregation::Mean: {
            if (q != kb::Quantifier::Forall)
                throw std::runtime_error("mean aggregation is defined for forall");
            double sum = 0.0;
            for (double v : values) sum += v;
            return sum / static_cast<double>(values.size());
        }
        case Aggregation::TNormIterated: {
            if (q != kb::Quantifier::Forall)
                throw std::runtime_error("t-norm aggregation is defined for forall");
            double acc = values[0];
            for (size_t i = 1; i < values.size(); ++i)
                acc = tnorm_apply(t, expr::Op::And, acc, values[i]);
            return acc;
        }
        case Aggregation::TConormIterated: {
            if (q != kb::Quantifier::Exists)
                throw std::runtime_error("t-conorm aggregation is defined for exists");
            double acc = values[0];
            for (size_t i = 1; i < values.size(); ++i)
                acc = tnorm_apply(t, expr::Op::Or, acc, values[i]);
            return acc;
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace rnm::fuzzy
