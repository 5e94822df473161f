#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace metagym {

// Propositional formula AST. Nodes are immutable once built and shared
// freely via shared_ptr, so evaluation and printing are thread-safe.

enum class NodeKind : std::uint8_t { Var, Not, And, Or, Implies, Iff, Xor };

std::string_view node_kind_name(NodeKind k);

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    NodeKind kind;
    int var = 0;                      // 1-based index, valid when kind == Var
    std::vector<FormulaPtr> children; // arity: Not=1, Implies/Iff/Xor=2, And/Or>=2
};

FormulaPtr make_var(int index);
FormulaPtr make_not(FormulaPtr child);
FormulaPtr make_binary(NodeKind kind, FormulaPtr lhs, FormulaPtr rhs);
// And/Or with two or more children.
FormulaPtr make_nary(NodeKind kind, std::vector<FormulaPtr> children);

bool structurally_equal(const Formula& a, const Formula& b);
// Operator nesting depth, root at 0 (a bare variable has depth 0).
int formula_depth(const Formula& f);
int max_var_index(const Formula& f);

// Syntax error; `column` is the 1-based byte position in the input.
struct ParseError : std::runtime_error {
    ParseError(std::string msg, std::size_t column)
        : std::runtime_error(std::move(msg)), column(column) {}
    std::size_t column;
};

// Grammar (whitespace between tokens is insignificant):
//   formula := var | "(" "NOT" formula ")" | "(" formula op formula ")"
//   op      := "AND" | "OR" | "IMPLIES" | "IFF" | "XOR"
//   var     := "x" digits          (no leading zero, index >= 1)
FormulaPtr parse_formula(std::string_view text);

// Inverse of parse_formula; n-ary And/Or nodes print left-nested so the
// output always conforms to the binary grammar.
std::string print_formula(const Formula& f);

// Total assignment over variables 1..n_vars.
class Assignment {
public:
    Assignment() = default;
    explicit Assignment(int n_vars) : bits_(static_cast<std::size_t>(n_vars), 0) {}

    int n_vars() const { return static_cast<int>(bits_.size()); }

    bool value(int var) const {
        check(var);
        return bits_[static_cast<std::size_t>(var - 1)] != 0;
    }
    void set(int var, bool v) {
        check(var);
        bits_[static_cast<std::size_t>(var - 1)] = v ? 1 : 0;
    }

    // "x1=true, x2=false, ..." (ascending variable order)
    std::string to_string() const;

    friend bool operator==(const Assignment&, const Assignment&) = default;

private:
    void check(int var) const {
        if (var < 1 || var > n_vars())
            throw std::out_of_range("variable x" + std::to_string(var) +
                                    " outside assignment of " +
                                    std::to_string(n_vars()) + " variables");
    }
    std::vector<std::uint8_t> bits_;
};

// Standard Boolean semantics; Implies(p,q) == (NOT p) OR q, Iff == equality,
// Xor == inequality. Throws std::out_of_range if f mentions a variable the
// assignment does not cover.
bool evaluate(const Formula& f, const Assignment& a);

// +v / -v literals, v >= 1.
using Literal = std::int32_t;
using Clause = std::vector<Literal>;

struct ClauseSet {
    int num_vars = 0; // total, original + auxiliary
    int num_aux = 0;
    std::vector<Clause> clauses;

    // Drops tautologies and duplicate literals; rejects empty clauses.
    void add_clause(Clause c);
};

bool clause_satisfied(const Clause& c, const Assignment& a);

// Equisatisfiable Tseitin encoding. next_aux_index must be greater than
// every variable index occurring in f; one auxiliary variable is introduced
// per non-leaf connective.
ClauseSet to_cnf(const Formula& f, int next_aux_index);

// Tseitin encoding of the conjunction of `formulas` over x1..x{n_vars};
// auxiliaries start at n_vars + 1.
ClauseSet to_cnf_conjunction(std::span<const FormulaPtr> formulas, int n_vars);

} // namespace metagym
