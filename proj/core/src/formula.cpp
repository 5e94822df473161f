#include "metagym/formula.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace metagym {

std::string_view node_kind_name(NodeKind k) {
    switch (k) {
    case NodeKind::Var: return "VAR";
    case NodeKind::Not: return "NOT";
    case NodeKind::And: return "AND";
    case NodeKind::Or: return "OR";
    case NodeKind::Implies: return "IMPLIES";
    case NodeKind::Iff: return "IFF";
    case NodeKind::Xor: return "XOR";
    }
    return "?";
}

FormulaPtr make_var(int index) {
    if (index < 1) throw std::invalid_argument("variable index must be >= 1");
    auto f = std::make_shared<Formula>();
    f->kind = NodeKind::Var;
    f->var = index;
    return f;
}

FormulaPtr make_not(FormulaPtr child) {
    if (!child) throw std::invalid_argument("null child");
    auto f = std::make_shared<Formula>();
    f->kind = NodeKind::Not;
    f->children.push_back(std::move(child));
    return f;
}

FormulaPtr make_binary(NodeKind kind, FormulaPtr lhs, FormulaPtr rhs) {
    if (kind == NodeKind::Var || kind == NodeKind::Not)
        throw std::invalid_argument("make_binary needs a binary connective");
    if (!lhs || !rhs) throw std::invalid_argument("null child");
    auto f = std::make_shared<Formula>();
    f->kind = kind;
    f->children.push_back(std::move(lhs));
    f->children.push_back(std::move(rhs));
    return f;
}

FormulaPtr make_nary(NodeKind kind, std::vector<FormulaPtr> children) {
    if (kind != NodeKind::And && kind != NodeKind::Or)
        throw std::invalid_argument("only And/Or may take n children");
    if (children.size() < 2)
        throw std::invalid_argument("And/Or need at least 2 children");
    for (const auto& c : children)
        if (!c) throw std::invalid_argument("null child");
    auto f = std::make_shared<Formula>();
    f->kind = kind;
    f->children = std::move(children);
    return f;
}

bool structurally_equal(const Formula& a, const Formula& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == NodeKind::Var) return a.var == b.var;
    if (a.children.size() != b.children.size()) return false;
    for (std::size_t i = 0; i < a.children.size(); ++i)
        if (!structurally_equal(*a.children[i], *b.children[i])) return false;
    return true;
}

int formula_depth(const Formula& f) {
    if (f.kind == NodeKind::Var) return 0;
    int deepest = 0;
    for (const auto& c : f.children) deepest = std::max(deepest, formula_depth(*c));
    return deepest + 1;
}

int max_var_index(const Formula& f) {
    if (f.kind == NodeKind::Var) return f.var;
    int m = 0;
    for (const auto& c : f.children) m = std::max(m, max_var_index(*c));
    return m;
}

namespace {

struct Parser {
    std::string_view text;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(what + " at column " + std::to_string(pos + 1), pos + 1);
    }

    void skip_ws() {
        while (pos < text.size() &&
               std::isspace(static_cast<unsigned char>(text[pos])))
            ++pos;
    }

    bool at_end() const { return pos >= text.size(); }

    char peek() const { return text[pos]; }

    // Maximal run of uppercase letters (operator words).
    std::string_view word() {
        std::size_t start = pos;
        while (pos < text.size() && text[pos] >= 'A' && text[pos] <= 'Z') ++pos;
        return text.substr(start, pos - start);
    }

    FormulaPtr parse_variable() {
        if (at_end() || peek() != 'x') fail("expected formula");
        ++pos;
        std::size_t start = pos;
        while (pos < text.size() &&
               std::isdigit(static_cast<unsigned char>(text[pos])))
            ++pos;
        if (start == pos) fail("expected variable index");
        std::string_view digits = text.substr(start, pos - start);
        if (digits.size() > 1 && digits[0] == '0') {
            pos = start;
            fail("variable index must not have a leading zero");
        }
        if (digits == "0") {
            pos = start;
            fail("variable index must be >= 1");
        }
        if (digits.size() > 7) {
            pos = start;
            fail("variable index out of range");
        }
        int index = 0;
        for (char c : digits) index = index * 10 + (c - '0');
        return make_var(index);
    }

    FormulaPtr parse_node() {
        skip_ws();
        if (at_end()) fail("unexpected end of input");
        if (peek() != '(') return parse_variable();
        ++pos; // '('
        skip_ws();
        if (at_end()) fail("unexpected end of input");

        if (peek() == 'N') {
            std::size_t save = pos;
            std::string_view w = word();
            if (w == "NOT") {
                FormulaPtr child = parse_node();
                expect_close();
                return make_not(std::move(child));
            }
            pos = save;
            fail("unknown operator '" + std::string(w) + "'");
        }

        FormulaPtr lhs = parse_node();
        skip_ws();
        std::size_t op_pos = pos;
        std::string_view op = word();
        NodeKind kind;
        if (op == "AND") kind = NodeKind::And;
        else if (op == "OR") kind = NodeKind::Or;
        else if (op == "IMPLIES") kind = NodeKind::Implies;
        else if (op == "IFF") kind = NodeKind::Iff;
        else if (op == "XOR") kind = NodeKind::Xor;
        else {
            pos = op_pos;
            fail(op.empty() ? "expected operator"
                            : "unknown operator '" + std::string(op) + "'");
        }
        FormulaPtr rhs = parse_node();
        expect_close();
        return make_binary(kind, std::move(lhs), std::move(rhs));
    }

    void expect_close() {
        skip_ws();
        if (at_end()) fail("unexpected end of input");
        if (peek() != ')') fail("expected ')'");
        ++pos;
    }
};

} // namespace

FormulaPtr parse_formula(std::string_view text) {
    Parser p{text};
    FormulaPtr f = p.parse_node();
    p.skip_ws();
    if (!p.at_end()) p.fail("trailing input");
    return f;
}

namespace {

void print_rec(const Formula& f, std::string& out) {
    switch (f.kind) {
    case NodeKind::Var:
        out += 'x';
        out += std::to_string(f.var);
        return;
    case NodeKind::Not:
        out += "(NOT ";
        print_rec(*f.children[0], out);
        out += ')';
        return;
    default: {
        // n-ary And/Or fold left so the output stays within the grammar
        const std::string_view op = node_kind_name(f.kind);
        std::size_t n = f.children.size();
        for (std::size_t i = 0; i + 1 < n; ++i) out += '(';
        print_rec(*f.children[0], out);
        for (std::size_t i = 1; i < n; ++i) {
            out += ' ';
            out += op;
            out += ' ';
            print_rec(*f.children[i], out);
            out += ')';
        }
        return;
    }
    }
}

} // namespace

std::string print_formula(const Formula& f) {
    std::string out;
    print_rec(f, out);
    return out;
}

std::string Assignment::to_string() const {
    std::string out;
    for (int v = 1; v <= n_vars(); ++v) {
        if (v > 1) out += ", ";
        out += 'x';
        out += std::to_string(v);
        out += '=';
        out += value(v) ? "true" : "false";
    }
    return out;
}

bool evaluate(const Formula& f, const Assignment& a) {
    switch (f.kind) {
    case NodeKind::Var: return a.value(f.var);
    case NodeKind::Not: return !evaluate(*f.children[0], a);
    case NodeKind::And:
        for (const auto& c : f.children)
            if (!evaluate(*c, a)) return false;
        return true;
    case NodeKind::Or:
        for (const auto& c : f.children)
            if (evaluate(*c, a)) return true;
        return false;
    case NodeKind::Implies:
        return !evaluate(*f.children[0], a) || evaluate(*f.children[1], a);
    case NodeKind::Iff:
        return evaluate(*f.children[0], a) == evaluate(*f.children[1], a);
    case NodeKind::Xor:
        return evaluate(*f.children[0], a) != evaluate(*f.children[1], a);
    }
    throw std::logic_error("unreachable");
}

void ClauseSet::add_clause(Clause c) {
    if (c.empty()) throw std::invalid_argument("empty clause");
    std::sort(c.begin(), c.end(), [](Literal x, Literal y) {
        int vx = std::abs(x), vy = std::abs(y);
        return vx != vy ? vx < vy : x < y;
    });
    c.erase(std::unique(c.begin(), c.end()), c.end());
    for (std::size_t i = 0; i + 1 < c.size(); ++i)
        if (c[i] == -c[i + 1]) return; // tautology
    clauses.push_back(std::move(c));
}

bool clause_satisfied(const Clause& c, const Assignment& a) {
    for (Literal lit : c) {
        bool v = a.value(std::abs(lit));
        if ((lit > 0) == v) return true;
    }
    return false;
}

namespace {

// Returns the literal standing for the subformula; definition clauses go
// into `cs`, auxiliaries are numbered from *next_aux upward.
Literal tseitin(const Formula& f, ClauseSet& cs, int* next_aux) {
    if (f.kind == NodeKind::Var) return f.var;
    if (f.kind == NodeKind::Not) return -tseitin(*f.children[0], cs, next_aux);

    std::vector<Literal> kids;
    kids.reserve(f.children.size());
    for (const auto& c : f.children) kids.push_back(tseitin(*c, cs, next_aux));

    Literal a = (*next_aux)++;
    cs.num_aux += 1;
    cs.num_vars = std::max(cs.num_vars, static_cast<int>(a));

    switch (f.kind) {
    case NodeKind::And: {
        Clause big{a};
        for (Literal k : kids) {
            cs.add_clause({-a, k});
            big.push_back(-k);
        }
        cs.add_clause(std::move(big));
        break;
    }
    case NodeKind::Or: {
        Clause big{-a};
        for (Literal k : kids) {
            cs.add_clause({a, -k});
            big.push_back(k);
        }
        cs.add_clause(std::move(big));
        break;
    }
    case NodeKind::Implies: {
        Literal p = kids[0], q = kids[1];
        cs.add_clause({-a, -p, q});
        cs.add_clause({a, p});
        cs.add_clause({a, -q});
        break;
    }
    case NodeKind::Iff: {
        Literal p = kids[0], q = kids[1];
        cs.add_clause({-a, -p, q});
        cs.add_clause({-a, p, -q});
        cs.add_clause({a, p, q});
        cs.add_clause({a, -p, -q});
        break;
    }
    case NodeKind::Xor: {
        Literal p = kids[0], q = kids[1];
        cs.add_clause({-a, p, q});
        cs.add_clause({-a, -p, -q});
        cs.add_clause({a, -p, q});
        cs.add_clause({a, p, -q});
        break;
    }
    default: throw std::logic_error("unreachable");
    }
    return a;
}

} // namespace

ClauseSet to_cnf(const Formula& f, int next_aux_index) {
    if (next_aux_index <= max_var_index(f))
        throw std::invalid_argument(
            "next_aux_index must exceed every variable index in the formula");
    ClauseSet cs;
    cs.num_vars = next_aux_index - 1;
    int next_aux = next_aux_index;
    Literal root = tseitin(f, cs, &next_aux);
    cs.add_clause({root});
    return cs;
}

ClauseSet to_cnf_conjunction(std::span<const FormulaPtr> formulas, int n_vars) {
    ClauseSet cs;
    cs.num_vars = n_vars;
    int next_aux = n_vars + 1;
    for (const auto& f : formulas) {
        if (max_var_index(*f) > n_vars)
            throw std::invalid_argument("formula mentions a variable beyond n_vars");
        Literal root = tseitin(*f, cs, &next_aux);
        cs.add_clause({root});
    }
    return cs;
}

} // namespace metagym
