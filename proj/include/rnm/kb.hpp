#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// First-order knowledge base: domain declarations, predicate signatures and
// quantified formulas parsed from the line-oriented KB text format.

namespace rnm::kb {

struct SourcePos {
    int line = 0;
    int column = 0;
};

class KbError : public std::runtime_error {
public:
    KbError(SourcePos pos, const std::string& message)
        : std::runtime_error(format(pos, message)), pos_(pos) {}
    SourcePos pos() const { return pos_; }

private:
    static std::string format(SourcePos pos, const std::string& message) {
        return "line " + std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " +
               message;
    }
    SourcePos pos_;
};

struct DomainDecl {
    std::string name;
    std::vector<std::string> constants;  // order defines grounding index order

    std::optional<int> index_of(const std::string& constant) const;
};

enum class PredicateKind { Learnable, Evidence, Builtin };

struct PredicateSig {
    std::string name;
    int arity = 0;
    std::vector<std::string> arg_domains;  // |arg_domains| == arity
    PredicateKind kind = PredicateKind::Learnable;
};

enum class Connective { Atom, Not, And, Or, Implies };

// Expression tree node. Nodes live in Formula::nodes; children are indices.
struct BodyNode {
    Connective op = Connective::Atom;
    int lhs = -1;
    int rhs = -1;
    // Atom payload (op == Atom)
    int predicate = -1;              // index into KnowledgeBase::predicates
    std::vector<int> args;           // >=0: prefix variable slot, <0: -(constant_id+1)
    std::vector<std::string> arg_names;  // as written (variables or constants)
    SourcePos pos;
};

enum class Quantifier { Forall, Exists };

struct QuantifiedVar {
    Quantifier quantifier = Quantifier::Forall;
    std::string variable;
    int domain = -1;  // index into KnowledgeBase::domains
};

enum class WeightMode { Trainable, Fixed };

struct Formula {
    int id = -1;
    std::vector<QuantifiedVar> prefix;
    std::vector<BodyNode> nodes;  // nodes[root] is the body root
    int root = -1;
    WeightMode weight_mode = WeightMode::Trainable;
    double fixed_weight = 0.0;
    std::string source_text;  // pretty-printed canonical form

    int atom_count() const;          // all atoms in the body
    int non_builtin_atom_count(const std::vector<PredicateSig>& preds) const;
};

struct KnowledgeBase {
    std::vector<DomainDecl> domains;
    std::vector<PredicateSig> predicates;
    std::vector<Formula> formulas;

    std::optional<int> domain_index(const std::string& name) const;
    std::optional<int> predicate_index(const std::string& name) const;
};

struct ParseOptions {
    int clique_limit = 8;            // max non-builtin atoms per formula
    bool allow_large_cliques = false;  // lifted when pseudo-likelihood is enabled
};

// Parses the KB text format (one statement per line, '#' comments):
//   domain <name> = {c1, c2, ...}
//   pred <name>(<dom>,...) [learnable|evidence]
//   rule [@fixed(<float>)]: <formula>
// Throws KbError (first error, with line/column) on malformed input.
KnowledgeBase parse_kb(const std::string& text, const ParseOptions& options = {});

// Structural re-validation of an already-built KB. Returns one human-readable
// diagnostic per violated invariant; empty means well-formed.
std::vector<std::string> validate_kb(const KnowledgeBase& kb,
                                     const ParseOptions& options = {});

std::string pretty_print(const KnowledgeBase& kb);
std::string pretty_print_formula(const KnowledgeBase& kb, const Formula& formula);

// Structural equality (names, signatures, formula trees); used by round-trip tests.
bool structurally_equal(const KnowledgeBase& a, const KnowledgeBase& b);

// Builtin predicates evaluable at grounding time. `succ(i,j)` holds iff
// j = i + 1 over integer-named constants, `eq(i,j)` iff both name the same value.
bool is_builtin_name(const std::string& name);
bool eval_builtin(const std::string& name, const std::vector<std::string>& constants);

}  // namespace rnm::kb
