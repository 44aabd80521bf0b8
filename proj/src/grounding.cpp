#include "rnm/grounding.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace rnm::grounding {

using kb::Connective;
using kb::PredicateKind;

int GroundAtomTable::find(int predicate, const std::vector<int>& constants) const {
    auto it = index_.find({predicate, constants});
    return it == index_.end() ? -1 : it->second;
}

std::string GroundAtomTable::atom_name(int index) const {
    const GroundAtom& atom = atoms[index];
    const kb::PredicateSig& sig = kb->predicates[atom.predicate];
    std::string out = sig.name;
    if (!atom.constants.empty()) {
        out += "(";
        for (size_t i = 0; i < atom.constants.size(); ++i) {
            if (i) out += ",";
            int dom = *kb->domain_index(sig.arg_domains[i]);
            // effective domains share indices with declared ones
            out += domains[dom].constants[atom.constants[i]];
        }
        out += ")";
    }
    return out;
}

bool World::truth(int atom) const {
    if (values[atom] == kUnknown)
        throw std::runtime_error("unobserved atom " + std::to_string(atom) +
                                 " encountered in a crisp evaluation");
    return values[atom] != 0;
}

GroundAtomTable build_atom_table(const kb::KnowledgeBase& kb, const data::Dataset& dataset) {
    GroundAtomTable table;
    table.kb = &kb;
    table.domains = kb.domains;
    table.one_label = dataset.one_label;

    auto pattern_domain = kb.domain_index(dataset.pattern_domain);
    if (!pattern_domain)
        throw std::runtime_error("dataset pattern domain '" + dataset.pattern_domain +
                                 "' is not declared in the KB");
    // Effective pattern domain: declared constants plus the dataset patterns.
    std::vector<int> pattern_to_constant(dataset.size(), -1);
    {
        kb::DomainDecl& dom = table.domains[*pattern_domain];
        for (size_t p = 0; p < dataset.size(); ++p) {
            auto existing = dom.index_of(dataset.pattern_ids[p]);
            if (existing) {
                pattern_to_constant[p] = *existing;
            } else {
                dom.constants.push_back(dataset.pattern_ids[p]);
                pattern_to_constant[p] = static_cast<int>(dom.constants.size()) - 1;
            }
        }
        if (dom.constants.size() != dataset.size())
            throw std::runtime_error("pattern domain '" + dataset.pattern_domain +
                                     "' declares constants with no dataset pattern");
    }
    std::vector<int> constant_to_pattern(dataset.size());
    for (size_t p = 0; p < dataset.size(); ++p) constant_to_pattern[pattern_to_constant[p]] =
        static_cast<int>(p);

    // Network heads, in predicate declaration order.
    for (size_t pi = 0; pi < kb.predicates.size(); ++pi) {
        const kb::PredicateSig& sig = kb.predicates[pi];
        if (sig.kind != PredicateKind::Learnable) continue;
        if (sig.arity == 1 && sig.arg_domains[0] == dataset.pattern_domain) {
            table.heads.push_back({static_cast<int>(pi), -1, sig.name});
        } else if (sig.arity == 2 && sig.arg_domains[0] == dataset.pattern_domain) {
            int class_dom = *kb.domain_index(sig.arg_domains[1]);
            const auto& constants = kb.domains[class_dom].constants;
            if (constants.empty())
                throw std::runtime_error("class domain '" + sig.arg_domains[1] +
                                         "' of learnable predicate '" + sig.name +
                                         "' declares no constants");
            for (size_t c = 0; c < constants.size(); ++c)
                table.heads.push_back({static_cast<int>(pi), static_cast<int>(c), constants[c]});
        } else {
            throw std::runtime_error(
                "learnable predicate '" + sig.name +
                "' must be unary over the pattern domain or (pattern, class) binary");
        }
    }
    if (static_cast<int>(table.heads.size()) != dataset.n_classes)
        throw std::runtime_error("KB defines " + std::to_string(table.heads.size()) +
                                 " output heads but the dataset has " +
                                 std::to_string(dataset.n_classes) + " classes");
    for (size_t h = 0; h < table.heads.size(); ++h)
        if (!dataset.class_names.empty() && dataset.class_names[h] != table.heads[h].name)
            throw std::runtime_error("head " + std::to_string(h) + " is '" +
                                     table.heads[h].name + "' but the dataset class is '" +
                                     dataset.class_names[h] + "'");

    // Learnable atoms, lexicographic in (predicate, constants).
    table.groups.assign(dataset.size(), {});
    for (size_t pi = 0; pi < kb.predicates.size(); ++pi) {
        const kb::PredicateSig& sig = kb.predicates[pi];
        if (sig.kind != PredicateKind::Learnable) continue;
        int head_base = 0;
        for (const auto& head : table.heads) {
            if (head.predicate == static_cast<int>(pi)) break;
            ++head_base;
        }
        size_t n_patterns = dataset.size();
        if (sig.arity == 1) {
            for (size_t c = 0; c < n_patterns; ++c) {
                GroundAtom atom;
                atom.predicate = static_cast<int>(pi);
                atom.constants = {static_cast<int>(c)};
                atom.learnable = true;
                atom.pattern = constant_to_pattern[c];
                atom.head = head_base;
                table.index_[{atom.predicate, atom.constants}] =
                    static_cast<int>(table.atoms.size());
                table.atoms.push_back(std::move(atom));
            }
        } else {
            int class_dom = *kb.domain_index(sig.arg_domains[1]);
            size_t n_values = table.domains[class_dom].constants.size();
            for (size_t c = 0; c < n_patterns; ++c)
                for (size_t v = 0; v < n_values; ++v) {
                    GroundAtom atom;
                    atom.predicate = static_cast<int>(pi);
                    atom.constants = {static_cast<int>(c), static_cast<int>(v)};
                    atom.learnable = true;
                    atom.pattern = constant_to_pattern[c];
                    atom.head = head_base + static_cast<int>(v);
                    table.index_[{atom.predicate, atom.constants}] =
                        static_cast<int>(table.atoms.size());
                    table.atoms.push_back(std::move(atom));
                }
        }
    }
    table.n_learnable = table.atoms.size();
    for (size_t a = 0; a < table.n_learnable; ++a)
        table.groups[table.atoms[a].pattern].push_back(static_cast<int>(a));

    // Evidence atoms from the dataset (closed world: unlisted atoms are false).
    for (const auto& ev : dataset.evidence) {
        auto pi = kb.predicate_index(ev.predicate);
        if (!pi)
            throw std::runtime_error("evidence predicate '" + ev.predicate +
                                     "' is not declared in the KB");
        const kb::PredicateSig& sig = kb.predicates[*pi];
        if (sig.kind != PredicateKind::Evidence)
            throw std::runtime_error("predicate '" + ev.predicate +
                                     "' carries dataset evidence but is not declared evidence");
        if (static_cast<int>(ev.constants.size()) != sig.arity)
            throw std::runtime_error("evidence atom for '" + ev.predicate +
                                     "' has wrong arity");
        std::vector<int> constants;
        for (size_t i = 0; i < ev.constants.size(); ++i) {
            int dom = *kb.domain_index(sig.arg_domains[i]);
            auto ci = table.domains[dom].index_of(ev.constants[i]);
            if (!ci)
                throw std::runtime_error("evidence constant '" + ev.constants[i] +
                                         "' is not in domain '" + sig.arg_domains[i] + "'");
            constants.push_back(*ci);
        }
        int existing = table.find(static_cast<int>(*pi), constants);
        if (existing >= 0) {
            if (table.atoms[existing].evidence_value != ev.value)
                throw std::runtime_error("evidence atom '" + table.atom_name(existing) +
                                         "' listed with conflicting truth values");
            continue;
        }
        GroundAtom atom;
        atom.predicate = static_cast<int>(*pi);
        atom.constants = std::move(constants);
        atom.learnable = false;
        atom.evidence_value = ev.value;
        table.index_[{atom.predicate, atom.constants}] = static_cast<int>(table.atoms.size());
        table.atoms.push_back(std::move(atom));
    }
    return table;
}

// ---------------------------------------------------------------------------
// Formula templates

namespace {

struct ArgRef {
    int slot = -1;      // grounding-variable slot, or
    int constant = -1;  // constant index
    int domain = -1;    // domain of the constant / variable
};

struct Occurrence {
    int predicate = -1;
    std::vector<ArgRef> args;
};

// Body compiled over atom occurrences: leading universal variables stay as
// grounding slots, everything from the first existential onward is expanded
// into the expression (forall as AND, exists as OR over the domain).
struct Template {
    std::vector<Occurrence> occurrences;
    expr::Expr body;  // vars = occurrence indices
    std::vector<int> grounding_vars;  // indices into formula.prefix
};

class TemplateBuilder {
public:
    TemplateBuilder(const kb::KnowledgeBase& kb, const kb::Formula& formula,
                    const std::vector<kb::DomainDecl>& domains, size_t occurrence_cap)
        : kb_(kb), formula_(formula), domains_(domains), occurrence_cap_(occurrence_cap) {}

    Template build() {
        size_t split = 0;
        while (split < formula_.prefix.size() &&
               formula_.prefix[split].quantifier == kb::Quantifier::Forall)
            ++split;
        for (size_t i = 0; i < split; ++i) result_.grounding_vars.push_back(static_cast<int>(i));
        inner_first_ = split;
        inner_values_.assign(formula_.prefix.size(), -1);
        result_.body = expand(inner_first_);
        return std::move(result_);
    }

private:
    // Expands inner variables [index..end) recursively, then compiles the body.
    expr::Expr expand(size_t index) {
        if (index == formula_.prefix.size()) return compile(formula_.root);
        const kb::QuantifiedVar& qv = formula_.prefix[index];
        const auto& constants = domains_[qv.domain].constants;
        if (constants.empty())
            throw std::runtime_error("domain '" + domains_[qv.domain].name +
                                     "' is empty; cannot expand quantifier over '" +
                                     qv.variable + "'");
        expr::Op op = qv.quantifier == kb::Quantifier::Forall ? expr::Op::And : expr::Op::Or;
        expr::Expr acc;
        for (size_t c = 0; c < constants.size(); ++c) {
            inner_values_[index] = static_cast<int>(c);
            expr::Expr piece = expand(index + 1);
            acc = c == 0 ? std::move(piece) : expr::Expr::binary(op, std::move(acc), std::move(piece));
        }
        inner_values_[index] = -1;
        return acc;
    }

    expr::Expr compile(int node_index) {
        const kb::BodyNode& node = formula_.nodes[node_index];
        switch (node.op) {
            case Connective::Atom: {
                Occurrence occ;
                occ.predicate = node.predicate;
                const kb::PredicateSig& sig = kb_.predicates[node.predicate];
                for (size_t i = 0; i < node.args.size(); ++i) {
                    ArgRef ref;
                    int arg = node.args[i];
                    int var_domain = -1;
                    if (arg >= 0) var_domain = formula_.prefix[arg].domain;
                    ref.domain = sig.kind == PredicateKind::Builtin
                                     ? var_domain
                                     : *kb_.domain_index(sig.arg_domains[i]);
                    if (arg < 0) {
                        ref.constant = -arg - 1;
                    } else if (arg >= static_cast<int>(inner_first_)) {
                        ref.constant = inner_values_[arg];  // expanded inner variable
                    } else {
                        ref.slot = arg;
                    }
                    occ.args.push_back(ref);
                }
                if (result_.occurrences.size() >= occurrence_cap_)
                    throw std::runtime_error(
                        "quantifier expansion exceeds the occurrence cap (" +
                        std::to_string(occurrence_cap_) + "); formula " +
                        std::to_string(formula_.id) + " grounds too many atoms per clique");
                int var = static_cast<int>(result_.occurrences.size());
                result_.occurrences.push_back(std::move(occ));
                return expr::Expr::variable(var, var + 1);
            }
            case Connective::Not:
                return expr::Expr::negation(compile(node.lhs));
            case Connective::And:
                return expr::Expr::binary(expr::Op::And, compile(node.lhs), compile(node.rhs));
            case Connective::Or:
                return expr::Expr::binary(expr::Op::Or, compile(node.lhs), compile(node.rhs));
            case Connective::Implies:
                return expr::Expr::binary(expr::Op::Implies, compile(node.lhs), compile(node.rhs));
        }
        throw std::logic_error("unreachable");
    }

    const kb::KnowledgeBase& kb_;
    const kb::Formula& formula_;
    const std::vector<kb::DomainDecl>& domains_;
    size_t occurrence_cap_;
    size_t inner_first_ = 0;
    std::vector<int> inner_values_;
    Template result_;
};

}  // namespace

std::pair<uint64_t, uint64_t> truth_table_counts(const kb::KnowledgeBase& kb,
                                                 const kb::Formula& formula) {
    TemplateBuilder builder(kb, formula, kb.domains, 4096);
    Template tmpl = builder.build();
    // Distinct (predicate, argument pattern) occurrences are one variable each.
    std::map<std::pair<int, std::vector<std::pair<int, int>>>, int> atom_slots;
    std::vector<int> occ_to_slot(tmpl.occurrences.size());
    for (size_t o = 0; o < tmpl.occurrences.size(); ++o) {
        const Occurrence& occ = tmpl.occurrences[o];
        if (kb.predicates[occ.predicate].kind == PredicateKind::Builtin)
            throw std::runtime_error(
                "formula-level truth table is undefined for builtin atoms; ground first");
        std::vector<std::pair<int, int>> key;
        for (const auto& arg : occ.args) key.push_back({arg.slot, arg.constant});
        auto [it, inserted] =
            atom_slots.insert({{occ.predicate, key}, static_cast<int>(atom_slots.size())});
        occ_to_slot[o] = it->second;
    }
    expr::Expr merged =
        expr::remap_vars(tmpl.body, occ_to_slot, static_cast<int>(atom_slots.size()));
    return expr::truth_table_counts(merged);
}

namespace {

struct GroundingAccumulator {
    const kb::KnowledgeBase& kb;
    const GroundAtomTable& table;
    const GroundingOptions& options;
    const Template& tmpl;
    FormulaGrounding& out;
    std::unordered_map<std::string, std::pair<uint64_t, uint64_t>> table_cache;
    std::string shared_signature;
    uint64_t enumerated = 0;

    // assignment: grounding-var slot -> constant index
    void visit(const std::vector<int>& assignment) {
        ++enumerated;
        size_t n_occ = tmpl.occurrences.size();
        std::vector<std::optional<bool>> known(n_occ);
        std::vector<int> occ_to_atom_slot(n_occ, 0);
        std::vector<int> slot_atoms;  // atom table indices per dedup slot
        std::map<std::pair<int, std::vector<int>>, int> slots;
        for (size_t o = 0; o < n_occ; ++o) {
            const Occurrence& occ = tmpl.occurrences[o];
            const kb::PredicateSig& sig = kb.predicates[occ.predicate];
            std::vector<int> constants;
            constants.reserve(occ.args.size());
            for (const auto& arg : occ.args)
                constants.push_back(arg.slot >= 0 ? assignment[arg.slot] : arg.constant);
            if (sig.kind == PredicateKind::Builtin) {
                std::vector<std::string> names;
                for (size_t i = 0; i < constants.size(); ++i)
                    names.push_back(table.domains[occ.args[i].domain].constants[constants[i]]);
                known[o] = kb::eval_builtin(sig.name, names);
                continue;
            }
            if (sig.kind == PredicateKind::Evidence && options.prune) {
                int idx = table.find(occ.predicate, constants);
                known[o] = idx >= 0 && table.atoms[idx].evidence_value;
                continue;
            }
            int idx = table.find(occ.predicate, constants);
            if (idx < 0) {
                if (sig.kind == PredicateKind::Evidence) {
                    // no-prune mode materializes evidence variables; an atom
                    // absent from the table is still closed-world false
                    known[o] = false;
                    continue;
                }
                throw std::runtime_error("grounded atom of '" + sig.name +
                                         "' missing from the atom table");
            }
            auto [it, inserted] =
                slots.insert({{occ.predicate, constants}, static_cast<int>(slot_atoms.size())});
            if (inserted) slot_atoms.push_back(idx);
            occ_to_atom_slot[o] = it->second;
        }
        std::vector<int> slot_map;
        expr::Expr residual = fold_occurrences(known, occ_to_atom_slot,
                                               static_cast<int>(slot_atoms.size()), &slot_map);
        if (residual.is_constant()) {
            (residual.constant_value() ? out.n_const_true : out.n_const_false) += 1;
            return;
        }
        // Residuals that are tautologies or contradictions over their atoms
        // (duplicate-atom merges can create them, e.g. A => A) carry no
        // information; fold them like evidence-forced constants.
        if (residual.n_vars <= options.stats_max_atoms) {
            auto counts = table_counts_of(residual);
            if (counts.second == 0) {
                out.n_const_true += 1;
                return;
            }
            if (counts.first == 0) {
                out.n_const_false += 1;
                return;
            }
        }
        GroundedFormula grounded;
        grounded.formula = out.formula;
        grounded.atom_indices.resize(static_cast<size_t>(residual.n_vars));
        for (size_t s = 0; s < slot_map.size(); ++s)
            if (slot_map[s] >= 0) grounded.atom_indices[slot_map[s]] = slot_atoms[s];
        grounded.evaluator = std::move(residual);
        track_structure(grounded.evaluator);
        out.groundings.push_back(std::move(grounded));
    }

    std::pair<uint64_t, uint64_t> table_counts_of(const expr::Expr& evaluator) {
        std::string sig = expr::signature(evaluator);
        auto it = table_cache.find(sig);
        if (it == table_cache.end())
            it = table_cache.insert({sig, expr::truth_table_counts(evaluator)}).first;
        return it->second;
    }

    // Substitute known occurrence values, then merge duplicate atoms and
    // renumber the survivors densely.
    expr::Expr fold_occurrences(const std::vector<std::optional<bool>>& known,
                                const std::vector<int>& occ_to_atom_slot, int n_slots,
                                std::vector<int>* slot_map) {
        std::vector<int> occ_new_slots;
        expr::Expr folded = expr::partial_eval(tmpl.body, known, &occ_new_slots);
        if (folded.is_constant()) {
            slot_map->assign(static_cast<size_t>(n_slots), -1);
            return folded;
        }
        std::vector<int> residual_to_atom(folded.n_vars, -1);
        for (size_t o = 0; o < known.size(); ++o)
            if (!known[o] && occ_new_slots[o] >= 0)
                residual_to_atom[occ_new_slots[o]] = occ_to_atom_slot[o];
        expr::Expr merged = expr::remap_vars(folded, residual_to_atom, n_slots);
        std::vector<std::optional<bool>> none(static_cast<size_t>(n_slots));
        return expr::partial_eval(merged, none, slot_map);
    }

    void track_structure(const expr::Expr& evaluator) {
        std::string sig = expr::signature(evaluator);
        if (out.groundings.empty()) {
            shared_signature = sig;
            out.n_free_atoms = evaluator.n_vars;
        } else if (sig != shared_signature) {
            out.uniform = false;
        }
    }
};

}  // namespace

FormulaGrounding ground_formula(const kb::KnowledgeBase& kb, const kb::Formula& formula,
                                const GroundAtomTable& table, const GroundingOptions& options) {
    FormulaGrounding out;
    out.formula = formula.id;
    TemplateBuilder builder(kb, formula, table.domains, 4096);
    Template tmpl = builder.build();

    uint64_t n_total = 1;
    for (int var : tmpl.grounding_vars) {
        uint64_t dom = table.domains[formula.prefix[var].domain].constants.size();
        if (dom == 0)
            throw std::runtime_error("domain '" +
                                     table.domains[formula.prefix[var].domain].name +
                                     "' is empty; formula " + std::to_string(formula.id) +
                                     " has no groundings");
        if (n_total > uint64_t{1} << 50)
            throw std::runtime_error("grounding count overflows sanity bounds");
        n_total *= dom;
    }
    out.n_total = n_total;

    GroundingAccumulator acc{kb, table, options, tmpl, out, {}, {}, 0};

    // Driver selection: an evidence occurrence whose falsity forces the whole
    // body true lets us enumerate only the tuples of its (sparse) relation.
    int driver = -1;
    if (options.prune) {
        for (size_t o = 0; o < tmpl.occurrences.size(); ++o) {
            if (kb.predicates[tmpl.occurrences[o].predicate].kind != PredicateKind::Evidence)
                continue;
            std::vector<std::optional<bool>> known(tmpl.occurrences.size());
            known[o] = false;
            expr::Expr folded = expr::partial_eval(tmpl.body, known, nullptr);
            if (folded.is_constant() && folded.constant_value()) {
                driver = static_cast<int>(o);
                break;
            }
        }
    }

    size_t n_vars = formula.prefix.size();
    std::vector<int> assignment(n_vars, -1);
    auto enumerate_free = [&](auto&& self, size_t gi) -> void {
        if (gi == tmpl.grounding_vars.size()) {
            if (acc.enumerated >= options.cap)
                throw std::runtime_error("grounding cap (" + std::to_string(options.cap) +
                                         ") exceeded by formula " + std::to_string(formula.id));
            acc.visit(assignment);
            return;
        }
        int var = tmpl.grounding_vars[gi];
        if (assignment[var] >= 0) {  // bound by the driver tuple
            self(self, gi + 1);
            return;
        }
        size_t dom = table.domains[formula.prefix[var].domain].constants.size();
        for (size_t c = 0; c < dom; ++c) {
            assignment[var] = static_cast<int>(c);
            self(self, gi + 1);
        }
        assignment[var] = -1;
    };

    if (driver >= 0) {
        const Occurrence& occ = tmpl.occurrences[driver];
        for (size_t a = table.n_learnable; a < table.atoms.size(); ++a) {
            const GroundAtom& atom = table.atoms[a];
            if (atom.predicate != occ.predicate || !atom.evidence_value) continue;
            // unify tuple against the occurrence argument pattern
            std::fill(assignment.begin(), assignment.end(), -1);
            bool ok = true;
            for (size_t i = 0; i < occ.args.size() && ok; ++i) {
                const ArgRef& arg = occ.args[i];
                if (arg.slot >= 0) {
                    if (assignment[arg.slot] >= 0 && assignment[arg.slot] != atom.constants[i])
                        ok = false;
                    else
                        assignment[arg.slot] = atom.constants[i];
                } else if (arg.constant != atom.constants[i]) {
                    ok = false;
                }
            }
            if (!ok) continue;
            enumerate_free(enumerate_free, 0);
        }
        // every assignment not reached has a false driver atom, hence is true
        out.n_const_true += n_total - acc.enumerated;
    } else {
        if (n_total > options.cap)
            throw std::runtime_error("grounding count " + std::to_string(n_total) +
                                     " exceeds the cap (" + std::to_string(options.cap) +
                                     ") for formula " + std::to_string(formula.id) +
                                     (options.prune ? "" : " (try pruning)"));
        enumerate_free(enumerate_free, 0);
    }

    if (out.uniform && !out.groundings.empty()) {
        auto it = acc.table_cache.find(acc.shared_signature);
        if (it != acc.table_cache.end()) out.table_counts = it->second;
    }
    return out;
}

double potential_value(const FormulaGrounding& grounding, const World& world) {
    double value = static_cast<double>(grounding.n_const_true);
    std::vector<uint8_t> values;
    for (const auto& g : grounding.groundings) {
        values.resize(g.atom_indices.size());
        for (size_t s = 0; s < g.atom_indices.size(); ++s)
            values[s] = world.truth(g.atom_indices[s]) ? 1 : 0;
        value += g.evaluator.eval(values) ? 1.0 : 0.0;
    }
    return value;
}

double average_satisfaction(const FormulaGrounding& grounding, const World& world) {
    if (grounding.groundings.empty())
        throw std::runtime_error("formula " + std::to_string(grounding.formula) +
                                 " has no materialized groundings; its satisfaction "
                                 "average is undefined");
    double satisfied =
        potential_value(grounding, world) - static_cast<double>(grounding.n_const_true);
    return satisfied / static_cast<double>(grounding.groundings.size());
}

GroundNetwork ground_network(const kb::KnowledgeBase& kb, const data::Dataset& dataset,
                             const GroundingOptions& options) {
    GroundNetwork network;
    network.table = build_atom_table(kb, dataset);
    for (const auto& formula : kb.formulas) {
        network.by_formula.push_back(ground_formula(kb, formula, network.table, options));
        const FormulaGrounding& fg = network.by_formula.back();
        ConstraintStats stats;
        stats.formula = formula.id;
        stats.n_groundings = fg.groundings.size();
        if (fg.table_counts) {
            stats.n_plus = fg.table_counts->first;
            stats.n_minus = fg.table_counts->second;
        }
        stats.lambda = formula.weight_mode == kb::WeightMode::Fixed ? formula.fixed_weight : 0.0;
        network.stats.push_back(stats);
    }
    return network;
}

World observed_world(const GroundAtomTable& table, const data::Dataset& dataset) {
    World world;
    world.values.assign(table.atoms.size(), World::kUnknown);
    for (size_t a = 0; a < table.atoms.size(); ++a) {
        const GroundAtom& atom = table.atoms[a];
        if (!atom.learnable) {
            world.values[a] = atom.evidence_value ? 1 : 0;
        } else if (dataset.y_observed[atom.pattern][atom.head]) {
            world.values[a] = dataset.y[atom.pattern][atom.head];
        }
    }
    return world;
}

World full_world(const GroundAtomTable& table, const data::Dataset& dataset) {
    World world;
    world.values.assign(table.atoms.size(), World::kUnknown);
    for (size_t a = 0; a < table.atoms.size(); ++a) {
        const GroundAtom& atom = table.atoms[a];
        world.values[a] =
            atom.learnable ? dataset.y[atom.pattern][atom.head] : (atom.evidence_value ? 1 : 0);
    }
    return world;
}

std::string dump_ground_network(const GroundNetwork& network) {
    std::ostringstream out;
    for (size_t a = 0; a < network.table.atoms.size(); ++a)
        out << "atom " << a << " " << network.table.atom_name(static_cast<int>(a)) << "\n";
    for (const auto& fg : network.by_formula)
        for (const auto& g : fg.groundings) {
            out << "clique " << fg.formula;
            for (int idx : g.atom_indices) out << " " << idx;
            out << "\n";
        }
    return out.str();
}

}  // namespace rnm::grounding
