#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rnm::expr {

enum class Op : uint8_t { Const, Var, Not, And, Or, Implies };

struct Node {
    Op op = Op::Const;
    int lhs = -1;
    int rhs = -1;
    int var = -1;      // Op::Var: slot index
    bool value = false;  // Op::Const
};

// A compiled propositional expression over variable slots 0..n_vars-1.
// Immutable after construction; shared by the boolean grounding evaluator and
// the fuzzy relaxation.
struct Expr {
    std::vector<Node> nodes;
    int root = -1;
    int n_vars = 0;

    bool is_constant() const { return nodes[root].op == Op::Const; }
    bool constant_value() const { return nodes[root].value; }

    bool eval(const std::vector<uint8_t>& values) const;

    static Expr constant(bool value);
    static Expr variable(int slot, int n_vars);
    static Expr negation(Expr operand);
    static Expr binary(Op op, Expr lhs, Expr rhs);
};

// Substitutes fixed truth values for a subset of slots and simplifies with the
// t-norm-safe identities (true is the AND unit, false the OR unit, x=>true and
// false=>x are true, true=>x is x); these hold exactly under Product, Goedel
// and Lukasiewicz semantics, so the residual's fuzzy value equals the
// original's with constants plugged in. Remaining slots are renumbered
// densely; `slot_map[old]` gives the new slot (-1 if folded or unused).
Expr partial_eval(const Expr& e, const std::vector<std::optional<bool>>& known,
                  std::vector<int>* slot_map = nullptr);

// Rewrites every Var slot through `mapping` (collapsing duplicates is allowed).
Expr remap_vars(const Expr& e, const std::vector<int>& mapping, int n_vars);

// (n_plus, n_minus) over exhaustive enumeration of the 2^n_vars assignments.
std::pair<uint64_t, uint64_t> truth_table_counts(const Expr& e);

// Canonical postorder byte signature; equal signatures imply identical
// structure (used to share truth tables across groundings).
std::string signature(const Expr& e);

}  // namespace rnm::expr
