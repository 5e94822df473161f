#include "metagym/deduction.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

#include "metagym/rng.hpp"

namespace metagym {

namespace {

// Removes clauses satisfied by lit and strips -lit from the rest.
void simplify(std::vector<Clause>& clauses, Literal lit) {
    std::size_t w = 0;
    for (std::size_t r = 0; r < clauses.size(); ++r) {
        Clause& c = clauses[r];
        if (std::find(c.begin(), c.end(), lit) != c.end()) continue; // satisfied
        c.erase(std::remove(c.begin(), c.end(), -lit), c.end());
        if (w != r) clauses[w] = std::move(c);
        ++w;
    }
    clauses.resize(w);
}

struct Dpll {
    SearchStats stats;
    int num_vars = 0;

    std::optional<std::vector<std::int8_t>> run(std::vector<Clause> clauses,
                                                std::vector<std::int8_t> values) {
        for (;;) {
            if (clauses.empty()) return values; // every clause satisfied
            bool falsified = std::any_of(clauses.begin(), clauses.end(),
                                         [](const Clause& c) { return c.empty(); });
            if (falsified) return std::nullopt;

            // unit propagation
            const Clause* unit = nullptr;
            for (const Clause& c : clauses)
                if (c.size() == 1) { unit = &c; break; }
            if (unit) {
                Literal lit = (*unit)[0];
                stats.unit_propagations += 1;
                values[static_cast<std::size_t>(std::abs(lit))] = lit > 0 ? 1 : 0;
                simplify(clauses, lit);
                continue;
            }

            // pure literal elimination, lowest variable index first
            Literal pure = find_pure(clauses);
            if (pure != 0) {
                stats.pure_literal_eliminations += 1;
                values[static_cast<std::size_t>(std::abs(pure))] = pure > 0 ? 1 : 0;
                simplify(clauses, pure);
                continue;
            }
            break;
        }

        // branch on the first unassigned variable occurring in the clauses
        int x = 0;
        for (const Clause& c : clauses)
            for (Literal lit : c) {
                int v = std::abs(lit);
                if (x == 0 || v < x) x = v;
            }
        stats.decisions += 1;
        for (std::int8_t b : {std::int8_t{1}, std::int8_t{0}}) {
            std::vector<Clause> next = clauses;
            std::vector<std::int8_t> vals = values;
            vals[static_cast<std::size_t>(x)] = b;
            simplify(next, b ? x : -x);
            if (auto r = run(std::move(next), std::move(vals))) return r;
        }
        return std::nullopt;
    }

    static Literal find_pure(const std::vector<Clause>& clauses) {
        // polarity bits per variable: 1 = positive seen, 2 = negative seen
        static thread_local std::vector<std::uint8_t> seen;
        int max_var = 0;
        for (const Clause& c : clauses)
            for (Literal lit : c) max_var = std::max(max_var, std::abs(lit));
        seen.assign(static_cast<std::size_t>(max_var) + 1, 0);
        for (const Clause& c : clauses)
            for (Literal lit : c)
                seen[static_cast<std::size_t>(std::abs(lit))] |= lit > 0 ? 1 : 2;
        for (int v = 1; v <= max_var; ++v) {
            if (seen[static_cast<std::size_t>(v)] == 1) return v;
            if (seen[static_cast<std::size_t>(v)] == 2) return -v;
        }
        return 0;
    }
};

} // namespace

SolveResult solve_sat(const ClauseSet& cs) {
    Dpll solver;
    solver.num_vars = cs.num_vars;
    std::vector<std::int8_t> values(static_cast<std::size_t>(cs.num_vars) + 1, -1);
    auto solved = solver.run(cs.clauses, std::move(values));

    SolveResult result;
    result.stats = solver.stats;
    if (solved) {
        Assignment a(cs.num_vars);
        for (int v = 1; v <= cs.num_vars; ++v)
            a.set(v, (*solved)[static_cast<std::size_t>(v)] == 1); // unassigned -> false
        result.assignment = std::move(a);
    }
    return result;
}

BruteForceResult brute_force_sat(std::span<const FormulaPtr> formulas, int n_vars) {
    if (n_vars < 1 || n_vars > 20)
        throw std::invalid_argument("brute_force_sat supports 1..20 variables");

    // Ascending binary order with x1 as the most significant bit; each
    // candidate assignment tried counts as one explored node.
    BruteForceResult result;
    Assignment a(n_vars);
    for (std::uint64_t c = 0; c < (std::uint64_t{1} << n_vars); ++c) {
        result.explored_nodes += 1;
        for (int v = 1; v <= n_vars; ++v)
            a.set(v, (c >> (n_vars - v)) & 1u);
        bool all = true;
        for (const auto& f : formulas)
            if (!evaluate(*f, a)) { all = false; break; }
        if (all) {
            result.assignment = a;
            break;
        }
    }
    return result;
}

namespace {

constexpr NodeKind kConnectives[] = {NodeKind::Not,     NodeKind::And, NodeKind::Or,
                                     NodeKind::Implies, NodeKind::Iff, NodeKind::Xor};

FormulaPtr sample_node(Rng& rng, int n_vars, int remaining, int max_depth) {
    bool leaf = remaining == 0 ||
                !rng.bernoulli(static_cast<double>(remaining) / max_depth);
    if (leaf) return make_var(1 + static_cast<int>(rng.below(n_vars)));
    NodeKind kind = kConnectives[rng.below(6)];
    if (kind == NodeKind::Not)
        return make_not(sample_node(rng, n_vars, remaining - 1, max_depth));
    FormulaPtr lhs = sample_node(rng, n_vars, remaining - 1, max_depth);
    FormulaPtr rhs = sample_node(rng, n_vars, remaining - 1, max_depth);
    return make_binary(kind, std::move(lhs), std::move(rhs));
}

void collect_vars(const Formula& f, std::vector<bool>& used) {
    if (f.kind == NodeKind::Var) {
        used[static_cast<std::size_t>(f.var)] = true;
        return;
    }
    for (const auto& c : f.children) collect_vars(*c, used);
}

void check_params(const DeductionParams& p) {
    if (p.n_vars < 2 || p.n_vars > 16) throw std::invalid_argument("n_vars must be 2..16");
    if (p.n_formulas < 1 || p.n_formulas > 10)
        throw std::invalid_argument("n_formulas must be 1..10");
    if (p.max_depth < 1 || p.max_depth > 6)
        throw std::invalid_argument("max_depth must be 1..6");
}

} // namespace

DeductionInstance generate_deduction(const DeductionParams& params, std::uint64_t seed) {
    check_params(params);
    Rng rng(seed);

    std::vector<FormulaPtr> formulas;
    bool covered = false;
    for (int attempt = 0; attempt < 1000 && !covered; ++attempt) {
        formulas.clear();
        std::vector<bool> used(static_cast<std::size_t>(params.n_vars) + 1, false);
        for (int i = 0; i < params.n_formulas; ++i) {
            formulas.push_back(
                sample_node(rng, params.n_vars, params.max_depth, params.max_depth));
            collect_vars(*formulas.back(), used);
        }
        covered = std::all_of(used.begin() + 1, used.end(), [](bool b) { return b; });
    }
    if (!covered)
        throw GenerationError(
            "deduction generation: variable-coverage constraint unmet after 1000 "
            "attempts (n_vars=" +
            std::to_string(params.n_vars) +
            ", n_formulas=" + std::to_string(params.n_formulas) +
            ", max_depth=" + std::to_string(params.max_depth) + ")");

    DeductionInstance inst;
    inst.params = params;
    inst.seed = seed;
    inst.formulas = std::move(formulas);

    ClauseSet cs = to_cnf_conjunction(inst.formulas, params.n_vars);
    SolveResult solved = solve_sat(cs);
    inst.solve_stats = solved.stats;
    if (solved.sat()) {
        Assignment witness(params.n_vars);
        for (int v = 1; v <= params.n_vars; ++v)
            witness.set(v, solved.assignment->value(v));
        for (std::size_t i = 0; i < inst.formulas.size(); ++i)
            if (!evaluate(*inst.formulas[i], witness))
                throw std::logic_error("solver witness fails formula " +
                                       std::to_string(i + 1));
        inst.witness = std::move(witness);
    }

    if (params.n_vars <= 12) {
        BruteForceResult brute = brute_force_sat(inst.formulas, params.n_vars);
        if (brute.assignment.has_value() != solved.sat())
            throw std::logic_error("solver and brute-force oracle disagree");
    }
    return inst;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    return true;
}

} // namespace

std::optional<DeductionAnswer> parse_deduction_answer(std::string_view text, int n_vars) {
    std::string_view body = trim(text);
    if (body.empty()) return std::nullopt;

    if (iequals(body, "UNSAT")) {
        DeductionAnswer a;
        a.unsat_claim = true;
        return a;
    }

    Assignment assignment(n_vars);
    std::vector<bool> seen(static_cast<std::size_t>(n_vars) + 1, false);
    std::size_t start = 0;
    while (start <= body.size()) {
        std::size_t comma = body.find(',', start);
        std::string_view item = body.substr(
            start, comma == std::string_view::npos ? body.size() - start : comma - start);
        item = trim(item);
        if (item.empty()) return std::nullopt;

        std::size_t eq = item.find('=');
        if (eq == std::string_view::npos) return std::nullopt;
        std::string_view lhs = trim(item.substr(0, eq));
        std::string_view rhs = trim(item.substr(eq + 1));

        if (lhs.size() < 2 ||
            (std::tolower(static_cast<unsigned char>(lhs[0])) != 'x'))
            return std::nullopt;
        int index = 0;
        for (char c : lhs.substr(1)) {
            if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
            index = index * 10 + (c - '0');
            if (index > 1000) return std::nullopt;
        }
        if (index < 1 || index > n_vars) return std::nullopt;
        if (seen[static_cast<std::size_t>(index)]) return std::nullopt;

        bool value;
        if (iequals(rhs, "true")) value = true;
        else if (iequals(rhs, "false")) value = false;
        else return std::nullopt;

        seen[static_cast<std::size_t>(index)] = true;
        assignment.set(index, value);

        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    if (!std::all_of(seen.begin() + 1, seen.end(), [](bool b) { return b; }))
        return std::nullopt; // partial assignment

    DeductionAnswer a;
    a.assignment = std::move(assignment);
    return a;
}

Verdict verify_deduction(const DeductionInstance& inst, const DeductionAnswer& answer) {
    if (answer.unsat_claim) {
        if (!inst.sat()) return Verdict::ok();
        return Verdict::wrong("instance is satisfiable, UNSAT claim rejected");
    }
    if (!answer.assignment)
        return Verdict::bad_answer("answer carries neither assignment nor UNSAT claim");
    if (answer.assignment->n_vars() != inst.params.n_vars)
        return Verdict::bad_answer("assignment does not cover all variables");
    for (std::size_t i = 0; i < inst.formulas.size(); ++i)
        if (!evaluate(*inst.formulas[i], *answer.assignment))
            return Verdict::wrong("formula " + std::to_string(i + 1) +
                                  " evaluates to false");
    return Verdict::ok();
}

Verdict verify_deduction_text(const DeductionInstance& inst, std::string_view text) {
    auto parsed = parse_deduction_answer(text, inst.params.n_vars);
    if (!parsed)
        return Verdict::bad_answer("answer does not match the deduction grammar");
    return verify_deduction(inst, *parsed);
}

std::string deduction_answer_string(const DeductionInstance& inst) {
    return inst.sat() ? inst.witness->to_string() : "UNSAT";
}

} // namespace metagym
