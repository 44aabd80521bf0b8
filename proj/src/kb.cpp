#include "rnm/kb.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

namespace rnm::kb {

std::optional<int> DomainDecl::index_of(const std::string& constant) const {
    for (size_t i = 0; i < constants.size(); ++i)
        if (constants[i] == constant) return static_cast<int>(i);
    return std::nullopt;
}

std::optional<int> KnowledgeBase::domain_index(const std::string& name) const {
    for (size_t i = 0; i < domains.size(); ++i)
        if (domains[i].name == name) return static_cast<int>(i);
    return std::nullopt;
}

std::optional<int> KnowledgeBase::predicate_index(const std::string& name) const {
    for (size_t i = 0; i < predicates.size(); ++i)
        if (predicates[i].name == name) return static_cast<int>(i);
    return std::nullopt;
}

int Formula::atom_count() const {
    int n = 0;
    for (const auto& node : nodes)
        if (node.op == Connective::Atom) ++n;
    return n;
}

int Formula::non_builtin_atom_count(const std::vector<PredicateSig>& preds) const {
    int n = 0;
    for (const auto& node : nodes)
        if (node.op == Connective::Atom &&
            preds[node.predicate].kind != PredicateKind::Builtin)
            ++n;
    return n;
}

bool is_builtin_name(const std::string& name) { return name == "succ" || name == "eq"; }

namespace {

std::optional<long long> parse_int(const std::string& s) {
    long long value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

}  // namespace

bool eval_builtin(const std::string& name, const std::vector<std::string>& constants) {
    if (name == "eq") return constants.at(0) == constants.at(1);
    if (name == "succ") {
        auto a = parse_int(constants.at(0));
        auto b = parse_int(constants.at(1));
        if (!a || !b)
            throw std::runtime_error("succ() requires integer-named constants, got (" +
                                     constants.at(0) + "," + constants.at(1) + ")");
        return *b == *a + 1;
    }
    throw std::runtime_error("unknown builtin predicate: " + name);
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class TokKind { Ident, Number, LParen, RParen, LBrace, RBrace, Comma, Colon, Equals, At, End };

struct Token {
    TokKind kind = TokKind::End;
    std::string text;
    SourcePos pos;
};

class Lexer {
public:
    Lexer(const std::string& text, int line) : text_(text), line_(line) {}

    Token next() {
        skip_ws();
        Token tok;
        tok.pos = {line_, static_cast<int>(pos_) + 1};
        if (pos_ >= text_.size() || text_[pos_] == '#') {
            tok.kind = TokKind::End;
            return tok;
        }
        char c = text_[pos_];
        switch (c) {
            case '(': tok.kind = TokKind::LParen; break;
            case ')': tok.kind = TokKind::RParen; break;
            case '{': tok.kind = TokKind::LBrace; break;
            case '}': tok.kind = TokKind::RBrace; break;
            case ',': tok.kind = TokKind::Comma; break;
            case ':': tok.kind = TokKind::Colon; break;
            case '=': tok.kind = TokKind::Equals; break;
            case '@': tok.kind = TokKind::At; break;
            default: tok.kind = TokKind::Ident; break;
        }
        if (tok.kind != TokKind::Ident) {
            tok.text = std::string(1, c);
            ++pos_;
            return tok;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            tok.text = text_.substr(start, pos_ - start);
            return tok;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
            size_t start = pos_;
            ++pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
                    text_[pos_] == '-' || text_[pos_] == '+'))
                ++pos_;
            tok.kind = TokKind::Number;
            tok.text = text_.substr(start, pos_ - start);
            return tok;
        }
        throw KbError(tok.pos, std::string("unexpected character '") + c + "'");
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    const std::string& text_;
    size_t pos_ = 0;
    int line_;
};

// Recursive-descent parser for one rule body.
// Precedence: not > and > or > implies; implies is right-associative.
class FormulaParser {
public:
    FormulaParser(Lexer& lexer, KnowledgeBase& kb, Formula& formula,
                  const std::map<std::string, int>& variables,
                  const Token* first = nullptr)
        : lexer_(lexer), kb_(kb), formula_(formula), variables_(variables) {
        if (first)
            cur_ = *first;
        else
            advance();
    }

    int parse() {
        int root = parse_implies();
        if (cur_.kind != TokKind::End)
            throw KbError(cur_.pos, "unexpected trailing token '" + cur_.text + "'");
        return root;
    }

private:
    void advance() { cur_ = lexer_.next(); }

    bool accept_keyword(const std::string& kw) {
        if (cur_.kind == TokKind::Ident && cur_.text == kw) {
            advance();
            return true;
        }
        return false;
    }

    int add_node(BodyNode node) {
        formula_.nodes.push_back(std::move(node));
        return static_cast<int>(formula_.nodes.size()) - 1;
    }

    int parse_implies() {
        int lhs = parse_or();
        if (accept_keyword("implies")) {
            int rhs = parse_implies();  // right-associative
            BodyNode node;
            node.op = Connective::Implies;
            node.lhs = lhs;
            node.rhs = rhs;
            return add_node(node);
        }
        return lhs;
    }

    int parse_or() {
        int lhs = parse_and();
        while (accept_keyword("or")) {
            int rhs = parse_and();
            BodyNode node;
            node.op = Connective::Or;
            node.lhs = lhs;
            node.rhs = rhs;
            lhs = add_node(node);
        }
        return lhs;
    }

    int parse_and() {
        int lhs = parse_unary();
        while (accept_keyword("and")) {
            int rhs = parse_unary();
            BodyNode node;
            node.op = Connective::And;
            node.lhs = lhs;
            node.rhs = rhs;
            lhs = add_node(node);
        }
        return lhs;
    }

    int parse_unary() {
        if (accept_keyword("not")) {
            int operand = parse_unary();
            BodyNode node;
            node.op = Connective::Not;
            node.lhs = operand;
            return add_node(node);
        }
        if (cur_.kind == TokKind::LParen) {
            advance();
            int inner = parse_implies();
            expect(TokKind::RParen, "')'");
            return inner;
        }
        return parse_atom();
    }

    int parse_atom() {
        if (cur_.kind != TokKind::Ident)
            throw KbError(cur_.pos, "expected atom, got '" + cur_.text + "'");
        Token name = cur_;
        advance();
        auto pred = kb_.predicate_index(name.text);
        if (!pred) throw KbError(name.pos, "unknown predicate '" + name.text + "'");
        const PredicateSig& sig = kb_.predicates[*pred];

        BodyNode node;
        node.op = Connective::Atom;
        node.predicate = *pred;
        node.pos = name.pos;
        if (cur_.kind == TokKind::LParen) {
            advance();
            if (cur_.kind != TokKind::RParen) {
                while (true) {
                    if (cur_.kind != TokKind::Ident && cur_.kind != TokKind::Number)
                        throw KbError(cur_.pos, "expected argument, got '" + cur_.text + "'");
                    node.arg_names.push_back(cur_.text);
                    advance();
                    if (cur_.kind == TokKind::Comma) {
                        advance();
                        continue;
                    }
                    break;
                }
            }
            expect(TokKind::RParen, "')'");
        }
        if (static_cast<int>(node.arg_names.size()) != sig.arity)
            throw KbError(name.pos, "arity mismatch: predicate '" + sig.name + "' takes " +
                                        std::to_string(sig.arity) + " argument(s), got " +
                                        std::to_string(node.arg_names.size()));
        // Resolve each argument: bound prefix variable or a declared constant of
        // the expected domain.
        for (size_t i = 0; i < node.arg_names.size(); ++i) {
            const std::string& arg = node.arg_names[i];
            auto var = variables_.find(arg);
            if (var != variables_.end()) {
                int slot = var->second;
                if (sig.kind != PredicateKind::Builtin) {
                    int expected = *kb_.domain_index(sig.arg_domains[i]);
                    if (formula_.prefix[slot].domain == -1)
                        formula_.prefix[slot].domain = expected;  // inferred from first use
                    else if (formula_.prefix[slot].domain != expected)
                        throw KbError(name.pos, "argument " + std::to_string(i + 1) + " of '" +
                                                    sig.name + "': variable '" + arg +
                                                    "' ranges over domain '" +
                                                    kb_.domains[formula_.prefix[slot].domain].name +
                                                    "' but '" + sig.arg_domains[i] +
                                                    "' is required");
                }
                node.args.push_back(slot);
            } else {
                if (sig.kind == PredicateKind::Builtin)
                    throw KbError(name.pos,
                                  "builtin '" + sig.name + "' takes bound variables, got '" + arg + "'");
                int dom = *kb_.domain_index(sig.arg_domains[i]);
                auto constant = kb_.domains[dom].index_of(arg);
                if (!constant)
                    throw KbError(name.pos, "unbound variable or unknown constant '" + arg +
                                                "' (domain '" + sig.arg_domains[i] + "')");
                node.args.push_back(-(*constant + 1));
            }
        }
        return add_node(node);
    }

    void expect(TokKind kind, const std::string& what) {
        if (cur_.kind != kind) throw KbError(cur_.pos, "expected " + what + ", got '" + cur_.text + "'");
        advance();
    }

    Lexer& lexer_;
    KnowledgeBase& kb_;
    Formula& formula_;
    const std::map<std::string, int>& variables_;
    Token cur_;
};

const std::set<std::string> kReservedWords = {"forall", "exists", "and",  "or",
                                              "not",    "implies", "domain", "pred",
                                              "rule",   "learnable", "evidence", "fixed"};

void parse_domain_stmt(Lexer& lexer, KnowledgeBase& kb) {
    Token name = lexer.next();
    if (name.kind != TokKind::Ident) throw KbError(name.pos, "expected domain name");
    if (kb.domain_index(name.text)) throw KbError(name.pos, "duplicate domain '" + name.text + "'");
    Token eq = lexer.next();
    if (eq.kind != TokKind::Equals) throw KbError(eq.pos, "expected '='");
    Token brace = lexer.next();
    if (brace.kind != TokKind::LBrace) throw KbError(brace.pos, "expected '{'");
    DomainDecl domain;
    domain.name = name.text;
    Token tok = lexer.next();
    while (tok.kind != TokKind::RBrace) {
        if (tok.kind != TokKind::Ident && tok.kind != TokKind::Number)
            throw KbError(tok.pos, "expected constant name");
        if (domain.index_of(tok.text))
            throw KbError(tok.pos, "duplicate constant '" + tok.text + "' in domain '" +
                                       domain.name + "'");
        domain.constants.push_back(tok.text);
        tok = lexer.next();
        if (tok.kind == TokKind::Comma) tok = lexer.next();
    }
    Token end = lexer.next();
    if (end.kind != TokKind::End) throw KbError(end.pos, "unexpected trailing token");
    kb.domains.push_back(std::move(domain));
}

void parse_pred_stmt(Lexer& lexer, KnowledgeBase& kb) {
    Token name = lexer.next();
    if (name.kind != TokKind::Ident) throw KbError(name.pos, "expected predicate name");
    if (kb.predicate_index(name.text))
        throw KbError(name.pos, "duplicate predicate '" + name.text + "'");
    if (is_builtin_name(name.text))
        throw KbError(name.pos, "'" + name.text + "' is a builtin predicate");
    PredicateSig sig;
    sig.name = name.text;
    Token tok = lexer.next();
    if (tok.kind == TokKind::LParen) {
        tok = lexer.next();
        while (tok.kind != TokKind::RParen) {
            if (tok.kind != TokKind::Ident) throw KbError(tok.pos, "expected domain name");
            if (!kb.domain_index(tok.text))
                throw KbError(tok.pos, "unknown domain '" + tok.text + "'");
            sig.arg_domains.push_back(tok.text);
            tok = lexer.next();
            if (tok.kind == TokKind::Comma) tok = lexer.next();
        }
        tok = lexer.next();
    }
    sig.arity = static_cast<int>(sig.arg_domains.size());
    if (tok.kind != TokKind::Ident || (tok.text != "learnable" && tok.text != "evidence"))
        throw KbError(tok.pos, "expected 'learnable' or 'evidence'");
    sig.kind = tok.text == "learnable" ? PredicateKind::Learnable : PredicateKind::Evidence;
    Token end = lexer.next();
    if (end.kind != TokKind::End) throw KbError(end.pos, "unexpected trailing token");
    kb.predicates.push_back(std::move(sig));
}

void parse_rule_stmt(Lexer& lexer, KnowledgeBase& kb, const ParseOptions& options) {
    Formula formula;
    formula.id = static_cast<int>(kb.formulas.size());
    Token tok = lexer.next();
    if (tok.kind == TokKind::At) {
        tok = lexer.next();
        if (tok.kind != TokKind::Ident || tok.text != "fixed")
            throw KbError(tok.pos, "expected 'fixed' after '@'");
        Token lp = lexer.next();
        if (lp.kind != TokKind::LParen) throw KbError(lp.pos, "expected '('");
        Token value = lexer.next();
        if (value.kind != TokKind::Number)
            throw KbError(value.pos, "expected numeric weight");
        try {
            formula.fixed_weight = std::stod(value.text);
        } catch (const std::exception&) {
            throw KbError(value.pos, "malformed weight '" + value.text + "'");
        }
        formula.weight_mode = WeightMode::Fixed;
        Token rp = lexer.next();
        if (rp.kind != TokKind::RParen) throw KbError(rp.pos, "expected ')'");
        tok = lexer.next();
    }
    if (tok.kind != TokKind::Colon) throw KbError(tok.pos, "expected ':' before rule body");

    // Quantifier prefix.
    std::map<std::string, int> variables;
    tok = lexer.next();
    while (tok.kind == TokKind::Ident && (tok.text == "forall" || tok.text == "exists")) {
        QuantifiedVar qv;
        qv.quantifier = tok.text == "forall" ? Quantifier::Forall : Quantifier::Exists;
        Token var = lexer.next();
        if (var.kind != TokKind::Ident) throw KbError(var.pos, "expected variable name");
        if (kReservedWords.count(var.text))
            throw KbError(var.pos, "reserved word '" + var.text + "' cannot name a variable");
        if (variables.count(var.text))
            throw KbError(var.pos, "variable '" + var.text + "' bound twice");
        qv.variable = var.text;
        qv.domain = -1;  // inferred from first use
        variables[var.text] = static_cast<int>(formula.prefix.size());
        formula.prefix.push_back(qv);
        tok = lexer.next();
        if (tok.kind == TokKind::Colon) break;
        if (tok.kind == TokKind::Ident && tok.text == "in") {
            // optional explicit domain: forall x in images ...
            Token dom = lexer.next();
            if (dom.kind != TokKind::Ident) throw KbError(dom.pos, "expected domain name");
            auto di = kb.domain_index(dom.text);
            if (!di) throw KbError(dom.pos, "unknown domain '" + dom.text + "'");
            formula.prefix.back().domain = *di;
            tok = lexer.next();
            if (tok.kind == TokKind::Colon) break;
        }
    }
    if (tok.kind != TokKind::Colon && !formula.prefix.empty())
        throw KbError(tok.pos, "expected ':' after quantifier prefix");

    // Prefix variable domains are inferred from their first non-builtin use
    // inside the body parse; explicit 'in <domain>' annotations override.
    // Ground rules (no prefix) start the body right after the first ':'.
    bool pre_read = tok.kind != TokKind::Colon;
    FormulaParser parser(lexer, kb, formula, variables, pre_read ? &tok : nullptr);
    formula.root = parser.parse();

    for (const auto& qv : formula.prefix) {
        if (qv.domain == -1)
            throw KbError({0, 0}, "variable '" + qv.variable +
                                      "' never used by a non-builtin atom; its domain "
                                      "cannot be inferred (use 'forall " +
                                      qv.variable + " in <domain>')");
    }
    // Builtin arguments must range over integer-like domains; checked at
    // grounding time where constants are concrete.

    int atoms = formula.non_builtin_atom_count(kb.predicates);
    if (atoms > options.clique_limit && !options.allow_large_cliques)
        throw KbError({0, 0}, "formula has " + std::to_string(atoms) +
                                  " atoms, above the clique limit of " +
                                  std::to_string(options.clique_limit) +
                                  " (enable pseudo-likelihood to lift it)");
    formula.source_text = pretty_print_formula(kb, formula);
    kb.formulas.push_back(std::move(formula));
}

void check_unused_variables(const Formula& formula) {
    std::vector<bool> used(formula.prefix.size(), false);
    for (const auto& node : formula.nodes)
        if (node.op == Connective::Atom)
            for (int arg : node.args)
                if (arg >= 0) used[arg] = true;
    for (size_t i = 0; i < used.size(); ++i)
        if (!used[i])
            throw KbError({0, 0}, "variable '" + formula.prefix[i].variable +
                                      "' is bound but never used");
}

}  // namespace

KnowledgeBase parse_kb(const std::string& text, const ParseOptions& options) {
    KnowledgeBase kb;
    // Register builtins up-front so rule bodies can reference them.
    for (const char* name : {"succ", "eq"}) {
        PredicateSig sig;
        sig.name = name;
        sig.arity = 2;
        sig.arg_domains = {"", ""};  // any domain; validated per grounding
        sig.kind = PredicateKind::Builtin;
        kb.predicates.push_back(sig);
    }

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        try {
            Lexer lexer(line, line_no);
            Token head = lexer.next();
            if (head.kind == TokKind::End) continue;
            if (head.kind != TokKind::Ident)
                throw KbError(head.pos, "expected statement keyword");
            if (head.text == "domain") {
                parse_domain_stmt(lexer, kb);
            } else if (head.text == "pred") {
                parse_pred_stmt(lexer, kb);
            } else if (head.text == "rule") {
                parse_rule_stmt(lexer, kb, options);
                check_unused_variables(kb.formulas.back());
            } else {
                throw KbError(head.pos, "unknown statement '" + head.text + "'");
            }
        } catch (KbError& e) {
            if (e.pos().line == 0)
                throw KbError({line_no, 1}, e.what() + std::string(" [line ") +
                                                std::to_string(line_no) + "]");
            throw;
        }
    }
    return kb;
}

std::vector<std::string> validate_kb(const KnowledgeBase& kb, const ParseOptions& options) {
    std::vector<std::string> diagnostics;
    auto report = [&](const std::string& msg) { diagnostics.push_back(msg); };

    std::set<std::string> domain_names;
    for (const auto& domain : kb.domains) {
        if (!domain_names.insert(domain.name).second)
            report("duplicate domain '" + domain.name + "'");
        std::set<std::string> constants;
        for (const auto& c : domain.constants)
            if (!constants.insert(c).second)
                report("duplicate constant '" + c + "' in domain '" + domain.name + "'");
    }
    std::set<std::string> predicate_names;
    for (const auto& sig : kb.predicates) {
        if (!predicate_names.insert(sig.name).second)
            report("duplicate predicate '" + sig.name + "'");
        if (static_cast<int>(sig.arg_domains.size()) != sig.arity)
            report("predicate '" + sig.name + "': arity " + std::to_string(sig.arity) +
                   " does not match " + std::to_string(sig.arg_domains.size()) +
                   " argument domains");
        if (sig.kind == PredicateKind::Builtin) continue;
        for (const auto& dom : sig.arg_domains)
            if (!kb.domain_index(dom))
                report("predicate '" + sig.name + "' references undeclared domain '" + dom + "'");
    }
    for (const auto& formula : kb.formulas) {
        for (const auto& qv : formula.prefix)
            if (qv.domain < 0 || qv.domain >= static_cast<int>(kb.domains.size()))
                report("formula " + std::to_string(formula.id) + ": variable '" + qv.variable +
                       "' has no valid domain");
        std::vector<bool> used(formula.prefix.size(), false);
        for (const auto& node : formula.nodes) {
            if (node.op != Connective::Atom) continue;
            if (node.predicate < 0 || node.predicate >= static_cast<int>(kb.predicates.size())) {
                report("formula " + std::to_string(formula.id) +
                       " references undeclared predicate");
                continue;
            }
            const PredicateSig& sig = kb.predicates[node.predicate];
            if (static_cast<int>(node.args.size()) != sig.arity)
                report("formula " + std::to_string(formula.id) + ": atom '" + sig.name +
                       "' has " + std::to_string(node.args.size()) + " arguments, expected " +
                       std::to_string(sig.arity));
            for (size_t i = 0; i < node.args.size(); ++i) {
                int arg = node.args[i];
                if (arg >= 0) {
                    if (arg >= static_cast<int>(formula.prefix.size())) {
                        report("formula " + std::to_string(formula.id) +
                               ": unbound variable slot");
                        continue;
                    }
                    used[arg] = true;
                    if (sig.kind != PredicateKind::Builtin &&
                        formula.prefix[arg].domain != *kb.domain_index(sig.arg_domains[i]))
                        report("formula " + std::to_string(formula.id) + ": atom '" + sig.name +
                               "' argument " + std::to_string(i + 1) + " domain mismatch");
                }
            }
        }
        for (size_t i = 0; i < used.size(); ++i)
            if (!used[i])
                report("formula " + std::to_string(formula.id) + ": variable '" +
                       formula.prefix[i].variable + "' is never used");
        int atoms = formula.non_builtin_atom_count(kb.predicates);
        if (atoms > options.clique_limit && !options.allow_large_cliques)
            report("formula " + std::to_string(formula.id) + " has " + std::to_string(atoms) +
                   " atoms, above the clique limit of " + std::to_string(options.clique_limit));
    }
    return diagnostics;
}

namespace {

void print_body(const KnowledgeBase& kb, const Formula& formula, int node_index,
                std::ostream& out, int parent_prec) {
    const BodyNode& node = formula.nodes[node_index];
    auto prec = [](Connective op) {
        switch (op) {
            case Connective::Implies: return 1;
            case Connective::Or: return 2;
            case Connective::And: return 3;
            case Connective::Not: return 4;
            default: return 5;
        }
    };
    int p = prec(node.op);
    bool parenthesize = p < parent_prec;
    if (parenthesize) out << "(";
    switch (node.op) {
        case Connective::Atom: {
            out << kb.predicates[node.predicate].name;
            if (!node.arg_names.empty()) {
                out << "(";
                for (size_t i = 0; i < node.arg_names.size(); ++i) {
                    if (i) out << ",";
                    out << node.arg_names[i];
                }
                out << ")";
            }
            break;
        }
        case Connective::Not:
            out << "not ";
            print_body(kb, formula, node.lhs, out, p + 1);
            break;
        case Connective::And:
            print_body(kb, formula, node.lhs, out, p);
            out << " and ";
            print_body(kb, formula, node.rhs, out, p + 1);
            break;
        case Connective::Or:
            print_body(kb, formula, node.lhs, out, p);
            out << " or ";
            print_body(kb, formula, node.rhs, out, p + 1);
            break;
        case Connective::Implies:
            print_body(kb, formula, node.lhs, out, p + 1);  // right-associative
            out << " implies ";
            print_body(kb, formula, node.rhs, out, p);
            break;
    }
    if (parenthesize) out << ")";
}

}  // namespace

std::string pretty_print_formula(const KnowledgeBase& kb, const Formula& formula) {
    std::ostringstream out;
    for (const auto& qv : formula.prefix) {
        out << (qv.quantifier == Quantifier::Forall ? "forall " : "exists ") << qv.variable
            << " in " << kb.domains[qv.domain].name << " ";
    }
    if (!formula.prefix.empty()) out << ": ";
    print_body(kb, formula, formula.root, out, 0);
    return out.str();
}

std::string pretty_print(const KnowledgeBase& kb) {
    std::ostringstream out;
    for (const auto& domain : kb.domains) {
        out << "domain " << domain.name << " = {";
        for (size_t i = 0; i < domain.constants.size(); ++i) {
            if (i) out << ", ";
            out << domain.constants[i];
        }
        out << "}\n";
    }
    for (const auto& sig : kb.predicates) {
        if (sig.kind == PredicateKind::Builtin) continue;
        out << "pred " << sig.name;
        if (sig.arity > 0) {
            out << "(";
            for (size_t i = 0; i < sig.arg_domains.size(); ++i) {
                if (i) out << ",";
                out << sig.arg_domains[i];
            }
            out << ")";
        }
        out << (sig.kind == PredicateKind::Learnable ? " learnable" : " evidence") << "\n";
    }
    for (const auto& formula : kb.formulas) {
        out << "rule ";
        if (formula.weight_mode == WeightMode::Fixed) {
            std::ostringstream w;
            w.precision(17);
            w << formula.fixed_weight;
            out << "@fixed(" << w.str() << ") ";
        }
        out << ": " << pretty_print_formula(kb, formula) << "\n";
    }
    return out.str();
}

namespace {

bool body_equal(const Formula& a, int ia, const Formula& b, int ib) {
    const BodyNode& na = a.nodes[ia];
    const BodyNode& nb = b.nodes[ib];
    if (na.op != nb.op) return false;
    if (na.op == Connective::Atom)
        return na.predicate == nb.predicate && na.args == nb.args;
    if ((na.lhs >= 0) != (nb.lhs >= 0)) return false;
    if ((na.rhs >= 0) != (nb.rhs >= 0)) return false;
    if (na.lhs >= 0 && !body_equal(a, na.lhs, b, nb.lhs)) return false;
    if (na.rhs >= 0 && !body_equal(a, na.rhs, b, nb.rhs)) return false;
    return true;
}

}  // namespace

bool structurally_equal(const KnowledgeBase& a, const KnowledgeBase& b) {
    if (a.domains.size() != b.domains.size() || a.predicates.size() != b.predicates.size() ||
        a.formulas.size() != b.formulas.size())
        return false;
    for (size_t i = 0; i < a.domains.size(); ++i)
        if (a.domains[i].name != b.domains[i].name ||
            a.domains[i].constants != b.domains[i].constants)
            return false;
    for (size_t i = 0; i < a.predicates.size(); ++i) {
        const auto& pa = a.predicates[i];
        const auto& pb = b.predicates[i];
        if (pa.name != pb.name || pa.arity != pb.arity || pa.kind != pb.kind ||
            pa.arg_domains != pb.arg_domains)
            return false;
    }
    for (size_t i = 0; i < a.formulas.size(); ++i) {
        const auto& fa = a.formulas[i];
        const auto& fb = b.formulas[i];
        if (fa.prefix.size() != fb.prefix.size() || fa.weight_mode != fb.weight_mode)
            return false;
        if (fa.weight_mode == WeightMode::Fixed && fa.fixed_weight != fb.fixed_weight)
            return false;
        for (size_t j = 0; j < fa.prefix.size(); ++j)
            if (fa.prefix[j].quantifier != fb.prefix[j].quantifier ||
                fa.prefix[j].domain != fb.prefix[j].domain)
                return false;
        if (!body_equal(fa, fa.root, fb, fb.root)) return false;
    }
    return true;
}

}  // namespace rnm::kb
