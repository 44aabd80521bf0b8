#include "rnm/expr.hpp"

#include <stdexcept>

namespace rnm::expr {

namespace {

bool eval_node(const Expr& e, int index, const std::vector<uint8_t>& values) {
    const Node& node = e.nodes[index];
    switch (node.op) {
        case Op::Const: return node.value;
        case Op::Var: return values[node.var] != 0;
        case Op::Not: return !eval_node(e, node.lhs, values);
        case Op::And: return eval_node(e, node.lhs, values) && eval_node(e, node.rhs, values);
        case Op::Or: return eval_node(e, node.lhs, values) || eval_node(e, node.rhs, values);
        case Op::Implies:
            return !eval_node(e, node.lhs, values) || eval_node(e, node.rhs, values);
    }
    throw std::logic_error("unreachable");
}

}  // namespace

bool Expr::eval(const std::vector<uint8_t>& values) const {
    return eval_node(*this, root, values);
}

Expr Expr::constant(bool value) {
    Expr e;
    e.nodes.push_back({Op::Const, -1, -1, -1, value});
    e.root = 0;
    return e;
}

Expr Expr::variable(int slot, int n_vars) {
    Expr e;
    e.nodes.push_back({Op::Var, -1, -1, slot, false});
    e.root = 0;
    e.n_vars = n_vars;
    return e;
}

namespace {

// Appends `src` rooted at src.root into dst, returning the new root index.
int graft(std::vector<Node>& dst, const Expr& src, int index) {
    const Node& node = src.nodes[index];
    Node copy = node;
    if (node.lhs >= 0) copy.lhs = graft(dst, src, node.lhs);
    if (node.rhs >= 0) copy.rhs = graft(dst, src, node.rhs);
    dst.push_back(copy);
    return static_cast<int>(dst.size()) - 1;
}

}  // namespace

Expr Expr::negation(Expr operand) {
    Expr e;
    e.n_vars = operand.n_vars;
    int child = graft(e.nodes, operand, operand.root);
    e.nodes.push_back({Op::Not, child, -1, -1, false});
    e.root = static_cast<int>(e.nodes.size()) - 1;
    return e;
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
    Expr e;
    e.n_vars = std::max(lhs.n_vars, rhs.n_vars);
    int l = graft(e.nodes, lhs, lhs.root);
    int r = graft(e.nodes, rhs, rhs.root);
    e.nodes.push_back({op, l, r, -1, false});
    e.root = static_cast<int>(e.nodes.size()) - 1;
    return e;
}

namespace {

// Two passes: constant analysis over the whole tree, then a rebuild that only
// touches nodes the residual actually depends on, so no phantom slots survive
// (e.g. the A in And(A, false)).
struct Folder {
    const Expr& src;
    const std::vector<std::optional<bool>>& known;
    std::vector<std::optional<bool>> const_val;
    std::vector<Node> out;
    std::vector<int>& slot_map;
    int next_slot = 0;

    void analyze(int index) {
        const Node& node = src.nodes[index];
        if (node.lhs >= 0) analyze(node.lhs);
        if (node.rhs >= 0) analyze(node.rhs);
        std::optional<bool> l = node.lhs >= 0 ? const_val[node.lhs] : std::optional<bool>{};
        std::optional<bool> r = node.rhs >= 0 ? const_val[node.rhs] : std::optional<bool>{};
        switch (node.op) {
            case Op::Const: const_val[index] = node.value; break;
            case Op::Var: const_val[index] = known[node.var]; break;
            case Op::Not:
                if (l) const_val[index] = !*l;
                break;
            case Op::And:
                if ((l && !*l) || (r && !*r)) const_val[index] = false;
                else if (l && *l) const_val[index] = r;
                else if (r && *r) const_val[index] = l;
                break;
            case Op::Or:
                if ((l && *l) || (r && *r)) const_val[index] = true;
                else if (l && !*l) const_val[index] = r;
                else if (r && !*r) const_val[index] = l;
                break;
            case Op::Implies:
                if ((l && !*l) || (r && *r)) const_val[index] = true;
                else if (l && *l) const_val[index] = r;
                break;
        }
    }

    int emit(Node node) {
        out.push_back(node);
        return static_cast<int>(out.size()) - 1;
    }

    // pre: !const_val[index]
    int rebuild(int index) {
        const Node& node = src.nodes[index];
        std::optional<bool> lconst =
            node.lhs >= 0 ? const_val[node.lhs] : std::optional<bool>{};
        std::optional<bool> rconst =
            node.rhs >= 0 ? const_val[node.rhs] : std::optional<bool>{};
        switch (node.op) {
            case Op::Const: break;
            case Op::Var: {
                if (slot_map[node.var] == -1) slot_map[node.var] = next_slot++;
                return emit({Op::Var, -1, -1, slot_map[node.var], false});
            }
            case Op::Not:
                return emit({Op::Not, rebuild(node.lhs), -1, -1, false});
            case Op::And:
                if (lconst) return rebuild(node.rhs);  // true unit
                if (rconst) return rebuild(node.lhs);
                return emit({Op::And, rebuild(node.lhs), rebuild(node.rhs), -1, false});
            case Op::Or:
                if (lconst) return rebuild(node.rhs);  // false unit
                if (rconst) return rebuild(node.lhs);
                return emit({Op::Or, rebuild(node.lhs), rebuild(node.rhs), -1, false});
            case Op::Implies:
                if (lconst) return rebuild(node.rhs);  // true antecedent
                if (rconst) return emit({Op::Not, rebuild(node.lhs), -1, -1, false});
                return emit({Op::Implies, rebuild(node.lhs), rebuild(node.rhs), -1, false});
        }
        throw std::logic_error("unreachable");
    }
};

}  // namespace

Expr partial_eval(const Expr& e, const std::vector<std::optional<bool>>& known,
                  std::vector<int>* slot_map_out) {
    std::vector<int> slot_map(static_cast<size_t>(e.n_vars), -1);
    Folder folder{e, known, {}, {}, slot_map};
    folder.const_val.assign(e.nodes.size(), std::nullopt);
    folder.analyze(e.root);
    Expr result;
    if (folder.const_val[e.root]) {
        result = Expr::constant(*folder.const_val[e.root]);
    } else {
        result.root = folder.rebuild(e.root);
        result.nodes = std::move(folder.out);
        result.n_vars = folder.next_slot;
    }
    if (slot_map_out) *slot_map_out = std::move(slot_map);
    return result;
}

Expr remap_vars(const Expr& e, const std::vector<int>& mapping, int n_vars) {
    Expr out = e;
    out.n_vars = n_vars;
    for (auto& node : out.nodes)
        if (node.op == Op::Var) node.var = mapping[node.var];
    return out;
}

namespace {

void append_signature(const Expr& e, int index, std::string& out) {
    const Node& node = e.nodes[index];
    if (node.lhs >= 0) append_signature(e, node.lhs, out);
    if (node.rhs >= 0) append_signature(e, node.rhs, out);
    out.push_back(static_cast<char>('a' + static_cast<int>(node.op)));
    if (node.op == Op::Var) out += std::to_string(node.var);
    if (node.op == Op::Const) out.push_back(node.value ? '1' : '0');
    out.push_back(';');
}

}  // namespace

std::string signature(const Expr& e) {
    std::string out;
    out += std::to_string(e.n_vars);
    out.push_back('|');
    append_signature(e, e.root, out);
    return out;
}

std::pair<uint64_t, uint64_t> truth_table_counts(const Expr& e) {
    if (e.n_vars > 25)
        throw std::runtime_error("truth table over " + std::to_string(e.n_vars) +
                                 " variables is too large to enumerate");
    uint64_t rows = uint64_t{1} << e.n_vars;
    uint64_t n_plus = 0;
    std::vector<uint8_t> values(static_cast<size_t>(e.n_vars), 0);
    for (uint64_t row = 0; row < rows; ++row) {
        for (int v = 0; v < e.n_vars; ++v) values[v] = (row >> v) & 1;
        if (e.eval(values)) ++n_plus;
    }
    return {n_plus, rows - n_plus};
}

}  // namespace rnm::expr
