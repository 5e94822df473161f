#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "metagym/formula.hpp"
#include "metagym/verdict.hpp"

namespace metagym {

// Raised by all three task generators when the resample budget runs out.
struct GenerationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DeductionParams {
    int n_vars = 6;     // 2..16
    int n_formulas = 3; // 1..10
    int max_depth = 2;  // 1..6
    int level = 1;
};

struct SearchStats {
    std::uint64_t decisions = 0;
    std::uint64_t unit_propagations = 0;
    std::uint64_t pure_literal_eliminations = 0;

    friend bool operator==(const SearchStats&, const SearchStats&) = default;
};

struct SolveResult {
    std::optional<Assignment> assignment; // nullopt => UNSAT
    SearchStats stats;

    bool sat() const { return assignment.has_value(); }
};

// DPLL: iterate unit propagation and pure-literal elimination to fixpoint,
// then branch on the lowest-index unassigned variable, True before False.
SolveResult solve_sat(const ClauseSet& clauses);

struct BruteForceResult {
    std::optional<Assignment> assignment; // first satisfying, ascending binary order
    std::uint64_t explored_nodes = 0;     // candidate assignments tried
};

// Exhaustive enumeration over x1..xn in ascending binary order (x1 the most
// significant bit); returns the first satisfying assignment. n_vars <= 20.
BruteForceResult brute_force_sat(std::span<const FormulaPtr> formulas, int n_vars);

struct DeductionInstance {
    DeductionParams params;
    std::uint64_t seed = 0;
    std::vector<FormulaPtr> formulas;      // over x1..x{n_vars}
    std::optional<Assignment> witness;     // nullopt => UNSAT
    SearchStats solve_stats;
    std::string observation = "all formulas are simultaneously true";

    bool sat() const { return witness.has_value(); }
};

// Deterministic for (params, seed). Ground truth comes from solve_sat and is
// cross-checked against brute_force_sat when n_vars <= 12. Resamples until
// every variable occurs in some formula (budget 1000, then GenerationError).
DeductionInstance generate_deduction(const DeductionParams& params, std::uint64_t seed);

struct DeductionAnswer {
    bool unsat_claim = false;
    std::optional<Assignment> assignment;
};

// Answer grammar: the token "UNSAT" (case-insensitive), or comma-separated
// "xi=true|false" pairs covering every variable exactly once. nullopt when
// the text does not parse.
std::optional<DeductionAnswer> parse_deduction_answer(std::string_view text, int n_vars);

Verdict verify_deduction(const DeductionInstance& inst, const DeductionAnswer& answer);
Verdict verify_deduction_text(const DeductionInstance& inst, std::string_view answer_text);

// Canonical answer serialization: witness string or "UNSAT".
std::string deduction_answer_string(const DeductionInstance& inst);

} // namespace metagym
