#include <doctest.h>

#include <algorithm>
#include <cstdlib>

#include "metagym/dataset.hpp"
#include "metagym/deduction.hpp"
#include "metagym/rng.hpp"

using namespace metagym;

TEST_CASE("solve_sat: unit propagation alone") {
    ClauseSet cs;
    cs.num_vars = 1;
    cs.add_clause({1});
    SolveResult r = solve_sat(cs);
    REQUIRE(r.sat());
    CHECK(r.assignment->value(1));
    CHECK(r.stats.decisions == 0);
    CHECK(r.stats.unit_propagations == 1);
}

TEST_CASE("solve_sat: immediate contradiction") {
    ClauseSet cs;
    cs.num_vars = 1;
    cs.add_clause({1});
    cs.add_clause({-1});
    SolveResult r = solve_sat(cs);
    CHECK_FALSE(r.sat());
}

TEST_CASE("solve_sat: Tseitin of (x1 XOR x2) AND x1 gives x1=T x2=F") {
    std::vector<FormulaPtr> fs{parse_formula("(x1 XOR x2)"), parse_formula("x1")};
    ClauseSet cs = to_cnf_conjunction(fs, 2);
    SolveResult r = solve_sat(cs);
    REQUIRE(r.sat());
    // 4-row truth table: only (T,F) satisfies both
    CHECK(r.assignment->value(1));
    CHECK_FALSE(r.assignment->value(2));
}

TEST_CASE("solve_sat: branching is counted, propagation-only instances are not") {
    // no units, no pures: both variables occur with both polarities
    ClauseSet cs;
    cs.num_vars = 2;
    cs.add_clause({1, 2});
    cs.add_clause({-1, -2});
    SolveResult r = solve_sat(cs);
    REQUIRE(r.sat());
    CHECK(r.stats.decisions >= 1);
}

TEST_CASE("solve_sat: pure literal elimination") {
    // x1 occurs only positively; no unit clauses
    ClauseSet cs;
    cs.num_vars = 3;
    cs.add_clause({1, 2});
    cs.add_clause({1, -2, 3});
    cs.add_clause({1, -3});
    SolveResult r = solve_sat(cs);
    REQUIRE(r.sat());
    CHECK(r.assignment->value(1));
    CHECK(r.stats.pure_literal_eliminations >= 1);
    CHECK(r.stats.decisions == 0);
}

TEST_CASE("brute_force_sat: ascending binary order tries false first") {
    std::vector<FormulaPtr> fs{parse_formula("x1")};
    BruteForceResult r = brute_force_sat(fs, 1);
    REQUIRE(r.assignment.has_value());
    CHECK(r.assignment->value(1));
    CHECK(r.explored_nodes == 2); // x1=F fails, x1=T succeeds

    std::vector<FormulaPtr> contradiction{parse_formula("(x1 AND (NOT x1))")};
    BruteForceResult u = brute_force_sat(contradiction, 1);
    CHECK_FALSE(u.assignment.has_value());
    CHECK(u.explored_nodes == 2);
}

TEST_CASE("brute_force_sat: rejects more than 20 variables") {
    std::vector<FormulaPtr> fs{parse_formula("x1")};
    CHECK_THROWS_AS(brute_force_sat(fs, 21), std::invalid_argument);
}

TEST_CASE("generate_deduction: determinism and instance invariants") {
    DeductionParams params{6, 3, 2, 1};
    DeductionInstance a = generate_deduction(params, 42);
    DeductionInstance b = generate_deduction(params, 42);

    CHECK(instance_to_record(TaskInstance{a}, "x") ==
          instance_to_record(TaskInstance{b}, "x"));
    CHECK(a.solve_stats == b.solve_stats);

    for (const auto& f : a.formulas) CHECK(formula_depth(*f) <= params.max_depth);

    // variable coverage: every x1..x6 appears in some printed formula
    for (int v = 1; v <= 6; ++v) {
        bool seen = false;
        for (const auto& f : a.formulas) {
            std::string text = print_formula(*f);
            if (text.find("x" + std::to_string(v)) != std::string::npos) seen = true;
        }
        CHECK(seen);
    }

    // ground truth matches the exhaustive oracle
    BruteForceResult brute = brute_force_sat(a.formulas, params.n_vars);
    CHECK(brute.assignment.has_value() == a.sat());
    if (a.sat())
        for (const auto& f : a.formulas) CHECK(evaluate(*f, *a.witness));
}

TEST_CASE("generate_deduction: 4-row truth table agreement at (n=2,f=1,d=1)") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        DeductionInstance inst = generate_deduction({2, 1, 1, 1}, seed);
        REQUIRE(inst.formulas.size() == 1);
        CHECK(formula_depth(*inst.formulas[0]) <= 1);
        bool any = false;
        for (int row = 0; row < 4; ++row) {
            Assignment a(2);
            a.set(1, row & 1);
            a.set(2, row & 2);
            if (evaluate(*inst.formulas[0], a)) any = true;
        }
        CHECK(any == inst.sat());
    }
}

TEST_CASE("generate_deduction: unmeetable coverage fails with a diagnostic") {
    CHECK_THROWS_AS(generate_deduction({16, 1, 1, 1}, 7), GenerationError);
}

TEST_CASE("verify_deduction: witness, flipped variable, UNSAT claim") {
    DeductionInstance inst = generate_deduction({6, 3, 2, 1}, 99);
    REQUIRE(inst.sat());

    CHECK(verify_deduction_text(inst, inst.witness->to_string()).correct());

    // flip one variable; if some formula breaks, the verdict names it
    Assignment flipped = *inst.witness;
    for (int v = 1; v <= 6; ++v) {
        flipped = *inst.witness;
        flipped.set(v, !flipped.value(v));
        bool still_ok = true;
        for (const auto& f : inst.formulas)
            if (!evaluate(*f, flipped)) still_ok = false;
        Verdict verdict = verify_deduction_text(inst, flipped.to_string());
        CHECK(verdict.correct() == still_ok);
        if (!still_ok) CHECK(verdict.detail.find("formula") != std::string::npos);
    }

    Verdict unsat_claim = verify_deduction_text(inst, "UNSAT");
    CHECK_FALSE(unsat_claim.correct());
    CHECK(unsat_claim.status == VerdictStatus::incorrect);
}

TEST_CASE("verify_deduction: malformed answers are distinct from incorrect ones") {
    DeductionInstance inst = generate_deduction({6, 3, 2, 1}, 7);
    CHECK(verify_deduction_text(inst, "x1=true, x2=false").status ==
          VerdictStatus::malformed); // partial
    CHECK(verify_deduction_text(inst, "garbage").status == VerdictStatus::malformed);
    CHECK(verify_deduction_text(inst, "").status == VerdictStatus::malformed);
    // duplicate variable
    CHECK(verify_deduction_text(
              inst, "x1=true, x1=false, x2=true, x3=true, x4=true, x5=true, x6=true")
              .status == VerdictStatus::malformed);
}

TEST_CASE("parse_deduction_answer: grammar tolerance") {
    auto unsat = parse_deduction_answer("  unSaT  ", 3);
    REQUIRE(unsat.has_value());
    CHECK(unsat->unsat_claim);

    auto a = parse_deduction_answer("X3=TRUE, x1 = false ,x2=False", 3);
    REQUIRE(a.has_value());
    REQUIRE(a->assignment.has_value());
    CHECK(a->assignment->value(3));
    CHECK_FALSE(a->assignment->value(1));
    CHECK_FALSE(a->assignment->value(2));

    CHECK_FALSE(parse_deduction_answer("x1=yes, x2=no", 2).has_value());
    CHECK_FALSE(parse_deduction_answer("x1=true, x4=false", 2).has_value());
}

TEST_CASE("oracle agreement: solver vs enumeration across levels 1-2") {
    // the acceptance suite runs the full 5000-per-level sweep
    for (std::uint64_t i = 0; i < 250; ++i) {
        TaskInstance inst1 = sample_instance(TaskFamily::deduction, 1, 777, i);
        TaskInstance inst2 = sample_instance(TaskFamily::deduction, 2, 777, i);
        for (const TaskInstance& ti : {inst1, inst2}) {
            const auto& inst = std::get<DeductionInstance>(ti);
            BruteForceResult brute = brute_force_sat(inst.formulas, inst.params.n_vars);
            REQUIRE(brute.assignment.has_value() == inst.sat());
            if (inst.sat())
                REQUIRE(verify_deduction_text(inst, inst.witness->to_string()).correct());
        }
    }
}

TEST_CASE("solve_sat: agreement with enumeration on arbitrary random clause sets") {
    Rng rng(0xC1A05E);
    for (int trial = 0; trial < 2000; ++trial) {
        int n = 2 + static_cast<int>(rng.below(7)); // 2..8 variables
        int m = 1 + static_cast<int>(rng.below(20));
        ClauseSet cs;
        cs.num_vars = n;
        for (int c = 0; c < m; ++c) {
            Clause clause;
            int width = 1 + static_cast<int>(rng.below(3));
            for (int k = 0; k < width; ++k) {
                int var = 1 + static_cast<int>(rng.below(n));
                clause.push_back(rng.below(2) ? var : -var);
            }
            std::sort(clause.begin(), clause.end(), [](Literal a, Literal b) {
                return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : a < b;
            });
            clause.erase(std::unique(clause.begin(), clause.end()), clause.end());
            bool tautology = false;
            for (std::size_t k = 0; k + 1 < clause.size(); ++k)
                if (clause[k] == -clause[k + 1]) tautology = true;
            if (!tautology) cs.add_clause(clause);
        }

        bool enumerated_sat = false;
        for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
            Assignment a(n);
            for (int v = 1; v <= n; ++v) a.set(v, (bits >> (v - 1)) & 1u);
            bool all = std::all_of(cs.clauses.begin(), cs.clauses.end(),
                                   [&](const Clause& c) { return clause_satisfied(c, a); });
            if (all) { enumerated_sat = true; break; }
        }

        SolveResult r = solve_sat(cs);
        REQUIRE(r.sat() == enumerated_sat);
        if (r.sat())
            for (const Clause& c : cs.clauses)
                REQUIRE(clause_satisfied(c, *r.assignment));
    }
}

TEST_CASE("difficulty: level-3 instances cost the enumeration oracle more") {
    std::uint64_t nodes1 = 0, nodes3 = 0;
    for (std::uint64_t i = 0; i < 60; ++i) {
        auto i1 = std::get<DeductionInstance>(sample_instance(TaskFamily::deduction, 1, 5, i));
        auto i3 = std::get<DeductionInstance>(sample_instance(TaskFamily::deduction, 3, 5, i));
        nodes1 += brute_force_sat(i1.formulas, i1.params.n_vars).explored_nodes;
        nodes3 += brute_force_sat(i3.formulas, i3.params.n_vars).explored_nodes;
    }
    CHECK(nodes3 > nodes1);
}
