#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "metagym/verdict.hpp"

namespace metagym {

using AtomId = std::uint32_t;

// Premise set -> conclusion. Premises are sorted, unique and non-empty.
struct Hyperedge {
    std::vector<AtomId> premises;
    AtomId conclusion = 0;

    friend bool operator==(const Hyperedge&, const Hyperedge&) = default;
};

struct RuleGraph {
    std::uint32_t num_atoms = 0;
    std::vector<Hyperedge> edges;
    std::vector<AtomId> facts; // sorted
    std::vector<AtomId> goals; // ordered as posed

    bool is_fact(AtomId a) const;
};

std::string atom_name(AtomId a);                 // "A7"
std::string edge_to_string(const Hyperedge& e);  // "A1 & A2 -> A5"

struct AbductionParams {
    int chain_depth = 2;      // d >= 1
    int num_goals = 1;        // g >= 1
    int distractor_count = 2; // h >= 0
    double cycle_prob = 0.0;  // gamma in [0,1]
    int level = 1;
};

// Edge subset deriving `root` from the facts; empty when root is itself a
// fact. Invariants: leaves in F, one edge per derived atom, acyclic,
// subset-minimal.
struct ExplanationTree {
    AtomId root = 0;
    std::vector<std::size_t> edge_indices; // indices into RuleGraph::edges
};

struct AbductionInstance {
    AbductionParams params;
    std::uint64_t seed = 0;
    RuleGraph graph;
    // Per goal, in goal order; nullopt marks an unprovable goal (the
    // generator never produces one, but loaded graphs may).
    std::vector<std::optional<ExplanationTree>> trees;
    std::size_t num_backbone_edges = 0; // edges [0, n) are backbone, rest distractors
};

// Deterministic for (params, seed). Builds one backbone chain of exactly
// chain_depth edges per goal, adds distractor hyperedges over existing
// atoms (rewired into backward loops with probability cycle_prob), and
// rejects graphs where any goal becomes derivable in fewer rounds than its
// backbone. Ground-truth trees are certified by prove_backward and
// cross-checked against forward chaining.
AbductionInstance generate_abduction(const AbductionParams& params, std::uint64_t seed);

struct ProveResult {
    bool provable = false;
    ExplanationTree tree; // empty unless provable
};

// Backward search with a per-call memo cache and recursion stack: facts
// succeed immediately, depth > depth_limit or an on-stack goal fails that
// branch, and the collected edges are pruned to a subset-minimal tree.
ProveResult prove_backward(const RuleGraph& graph, AtomId goal, int depth_limit);

// Round-limited forward chaining; returns the derived set including facts.
// After r rounds an atom is derived iff it has a derivation of depth <= r.
std::vector<bool> forward_chain(const RuleGraph& graph, int max_rounds);

// Candidate edge set is correct iff it derives the goal from the facts,
// is acyclic, and no edge can be removed. Detail distinguishes
// wrong-goal / invalid-derivation / non-minimal failures.
Verdict verify_abduction(const AbductionInstance& inst, std::size_t goal_index,
                         std::span<const std::size_t> edge_indices);

// Answer grammar: one block per goal (blocks separated by newlines or '|',
// in goal order); each block lists the edges used, separated by ';', each
// written as "A1 & A2 -> A5". nullopt when the text does not parse or an
// edge does not resolve against the graph.
std::optional<std::vector<std::vector<std::size_t>>>
parse_abduction_answer(const RuleGraph& graph, std::string_view text);

// All goals must verify for the answer to count as correct.
Verdict verify_abduction_text(const AbductionInstance& inst, std::string_view text);

std::string abduction_answer_string(const AbductionInstance& inst);

} // namespace metagym
