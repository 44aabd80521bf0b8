#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rnm/dataset.hpp"
#include "rnm/expr.hpp"
#include "rnm/kb.hpp"

namespace rnm::grounding {

// One binary output variable y_i: a predicate applied to concrete constants.
struct GroundAtom {
    int predicate = -1;
    std::vector<int> constants;  // per-arg index into the effective domain
    bool learnable = false;
    int pattern = -1;  // learnable: pattern index in the dataset
    int head = -1;     // learnable: network output head
    bool evidence_value = false;
};

struct HeadSpec {
    int predicate = -1;
    int class_constant = -1;  // -1 for unary predicates
    std::string name;
};

// Bijection (predicate, constant tuple) <-> index into y. Learnable atoms
// occupy the dense prefix 0..n_learnable-1 in lexicographic (predicate,
// constants) order; true evidence atoms follow. Unlisted evidence atoms are
// closed-world false.
struct GroundAtomTable {
    const kb::KnowledgeBase* kb = nullptr;
    std::vector<kb::DomainDecl> domains;  // effective: declared + dataset constants
    std::vector<GroundAtom> atoms;
    size_t n_learnable = 0;
    std::vector<HeadSpec> heads;
    bool one_label = false;
    std::vector<std::vector<int>> groups;  // per pattern, its learnable atom indices

    // -1 when the atom is not materialized (evidence known false).
    int find(int predicate, const std::vector<int>& constants) const;
    std::string atom_name(int index) const;
    size_t size() const { return atoms.size(); }

private:
    friend GroundAtomTable build_atom_table(const kb::KnowledgeBase&, const data::Dataset&);
    std::map<std::pair<int, std::vector<int>>, int> index_;
};

// Assignment vector over the atom table; kUnknown marks unobserved atoms.
struct World {
    static constexpr int8_t kUnknown = -1;
    std::vector<int8_t> values;

    bool known(int atom) const { return values[atom] != kUnknown; }
    bool truth(int atom) const;
};

// One clique: the grounded formula restricted to its free (unfolded) atoms.
struct GroundedFormula {
    int formula = -1;
    std::vector<int> atom_indices;  // distinct atoms, slot order
    expr::Expr evaluator;           // total on {0,1}^{|atom_indices|}
};

// Per-formula truth-table bookkeeping for the shared local partition
// Z^l_c = n_minus + n_plus * e^lambda.
struct ConstraintStats {
    int formula = -1;
    uint64_t n_plus = 0;
    uint64_t n_minus = 0;
    size_t n_groundings = 0;  // materialized cliques |G_c|
    double lambda = 0.0;
};

// All groundings of one formula plus the folded-away remainder.
struct FormulaGrounding {
    int formula = -1;
    std::vector<GroundedFormula> groundings;
    uint64_t n_const_true = 0;   // groundings forced true by evidence/builtins
    uint64_t n_const_false = 0;  // forced false (possible only for UNSAT residuals)
    uint64_t n_total = 0;        // all prefix-variable assignments
    // Truth-table counts of the shared residual structure; present when all
    // materialized groundings agree and the table is small enough to
    // enumerate. The closed-form lambda update requires it.
    std::optional<std::pair<uint64_t, uint64_t>> table_counts;
    bool uniform = true;
    int n_free_atoms = 0;
};

struct GroundingOptions {
    bool prune = true;          // fold evidence values into the cliques
    uint64_t cap = 10'000'000;  // enumeration cap; exceeding it is an error
    int stats_max_atoms = 20;   // skip truth tables above this clique size
};

GroundAtomTable build_atom_table(const kb::KnowledgeBase& kb, const data::Dataset& dataset);

FormulaGrounding ground_formula(const kb::KnowledgeBase& kb, const kb::Formula& formula,
                                const GroundAtomTable& table,
                                const GroundingOptions& options = {});

// (n_plus, n_minus) of the formula body over its syntactic non-builtin atoms.
std::pair<uint64_t, uint64_t> truth_table_counts(const kb::KnowledgeBase& kb,
                                                 const kb::Formula& formula);

// Phi_c(y): number of satisfied groundings, folded constants included.
// Throws if a referenced atom is unobserved.
double potential_value(const FormulaGrounding& grounding, const World& world);

// Satisfied / materialized count restricted to the residual event space; this
// is the Avg(Phi_c, y) driving the closed-form lambda update.
double average_satisfaction(const FormulaGrounding& grounding, const World& world);

struct GroundNetwork {
    GroundAtomTable table;
    std::vector<FormulaGrounding> by_formula;
    std::vector<ConstraintStats> stats;  // one per formula with table counts
};

GroundNetwork ground_network(const kb::KnowledgeBase& kb, const data::Dataset& dataset,
                             const GroundingOptions& options = {});

// World pre-filled with evidence values and the observed supervision labels.
World observed_world(const GroundAtomTable& table, const data::Dataset& dataset);
// As above but with every learnable atom filled from the dataset's ground
// truth (for fully-observed training and for computing test accuracy).
World full_world(const GroundAtomTable& table, const data::Dataset& dataset);

// Debug dump: "atom <idx> <pred>(<consts>)" and "clique <c> <idx...>" lines.
std::string dump_ground_network(const GroundNetwork& network);

}  // namespace rnm::grounding
