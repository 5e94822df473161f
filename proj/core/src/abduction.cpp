#include "metagym/abduction.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>

#include "metagym/deduction.hpp" // GenerationError
#include "metagym/rng.hpp"

namespace metagym {

bool RuleGraph::is_fact(AtomId a) const {
    return std::binary_search(facts.begin(), facts.end(), a);
}

std::string atom_name(AtomId a) { return "A" + std::to_string(a); }

std::string edge_to_string(const Hyperedge& e) {
    std::string out;
    for (std::size_t i = 0; i < e.premises.size(); ++i) {
        if (i > 0) out += " & ";
        out += atom_name(e.premises[i]);
    }
    out += " -> ";
    out += atom_name(e.conclusion);
    return out;
}

namespace {

enum class CacheState : std::int8_t { unknown = -1, no = 0, yes = 1 };

struct BackwardSearch {
    const RuleGraph& graph;
    int depth_limit;
    std::vector<std::vector<std::size_t>> edges_by_conclusion;
    std::vector<CacheState> cache;
    std::vector<bool> on_path;
    std::vector<std::size_t> collected; // edges whose premises all proved

    explicit BackwardSearch(const RuleGraph& g, int limit)
        : graph(g), depth_limit(limit),
          edges_by_conclusion(g.num_atoms),
          cache(g.num_atoms, CacheState::unknown),
          on_path(g.num_atoms, false) {
        for (std::size_t i = 0; i < g.edges.size(); ++i)
            edges_by_conclusion[g.edges[i].conclusion].push_back(i);
    }

    bool prove(AtomId q, int depth) {
        if (graph.is_fact(q)) return true;
        if (depth > depth_limit || on_path[q]) return false;
        if (cache[q] != CacheState::unknown) return cache[q] == CacheState::yes;

        on_path[q] = true;
        for (std::size_t e : edges_by_conclusion[q]) {
            bool all = true;
            for (AtomId p : graph.edges[e].premises)
                if (!prove(p, depth + 1)) { all = false; break; }
            if (all) {
                collected.push_back(e);
                cache[q] = CacheState::yes;
                on_path[q] = false;
                return true;
            }
        }
        cache[q] = CacheState::no;
        on_path[q] = false;
        return false;
    }
};

// Closure of F within a fixed edge subset; returns per-atom derivation round
// (0 for facts, SIZE_MAX for underived).
struct SubsetClosure {
    std::vector<std::size_t> round;
};

SubsetClosure close_over(const RuleGraph& graph, std::span<const std::size_t> edges) {
    SubsetClosure out;
    out.round.assign(graph.num_atoms, SIZE_MAX);
    for (AtomId f : graph.facts) out.round[f] = 0;

    bool changed = true;
    std::size_t r = 0;
    while (changed) {
        changed = false;
        ++r;
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const Hyperedge& e = graph.edges[edges[i]];
            if (out.round[e.conclusion] != SIZE_MAX) continue;
            bool ready = std::all_of(e.premises.begin(), e.premises.end(),
                                     [&](AtomId p) { return out.round[p] < r; });
            if (!ready) continue;
            out.round[e.conclusion] = r;
            changed = true;
        }
    }
    return out;
}

// From the collected edge pool, pick exactly one deriving edge per needed
// non-fact atom, recursing into premises. Picks the first pool edge whose
// premises all close strictly earlier, so the result is acyclic and
// subset-minimal by construction.
ExplanationTree prune_to_minimal_tree(const RuleGraph& graph,
                                      std::span<const std::size_t> pool, AtomId goal) {
    ExplanationTree tree;
    tree.root = goal;
    SubsetClosure closure = close_over(graph, pool);

    std::vector<bool> picked(graph.num_atoms, false);
    std::function<void(AtomId)> pick = [&](AtomId atom) {
        if (graph.is_fact(atom) || picked[atom]) return;
        picked[atom] = true;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            const Hyperedge& e = graph.edges[pool[i]];
            if (e.conclusion != atom) continue;
            bool ok = std::all_of(e.premises.begin(), e.premises.end(), [&](AtomId p) {
                return closure.round[p] < closure.round[atom];
            });
            if (!ok) continue;
            tree.edge_indices.push_back(pool[i]);
            for (AtomId p : e.premises) pick(p);
            return;
        }
        throw std::logic_error("tree pruning: no deriving edge for " + atom_name(atom));
    };
    pick(goal);
    std::sort(tree.edge_indices.begin(), tree.edge_indices.end());
    return tree;
}

} // namespace

ProveResult prove_backward(const RuleGraph& graph, AtomId goal, int depth_limit) {
    if (goal >= graph.num_atoms) throw std::invalid_argument("goal atom out of range");
    BackwardSearch search(graph, depth_limit);
    ProveResult result;
    result.provable = search.prove(goal, 0);
    if (result.provable)
        result.tree = prune_to_minimal_tree(graph, search.collected, goal);
    else
        result.tree.root = goal;
    return result;
}

std::vector<bool> forward_chain(const RuleGraph& graph, int max_rounds) {
    if (max_rounds < 1) throw std::invalid_argument("max_rounds must be >= 1");
    std::vector<bool> derived(graph.num_atoms, false);
    for (AtomId f : graph.facts) derived[f] = true;
    for (int round = 0; round < max_rounds; ++round) {
        bool changed = false;
        std::vector<bool> next = derived;
        for (const Hyperedge& e : graph.edges) {
            if (next[e.conclusion]) continue;
            bool ready = std::all_of(e.premises.begin(), e.premises.end(),
                                     [&](AtomId p) { return derived[p]; });
            if (ready) {
                next[e.conclusion] = true;
                changed = true;
            }
        }
        derived = std::move(next);
        if (!changed) break; // fixpoint
    }
    return derived;
}

namespace {

// Minimal derivation depth per atom (facts 0, unreachable SIZE_MAX):
// cost(c) = 1 + min over edges of max premise cost. Handles cycles.
std::vector<std::size_t> derivation_cost(const RuleGraph& graph) {
    std::vector<std::size_t> cost(graph.num_atoms, SIZE_MAX);
    for (AtomId f : graph.facts) cost[f] = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const Hyperedge& e : graph.edges) {
            std::size_t worst = 0;
            bool ok = true;
            for (AtomId p : e.premises) {
                if (cost[p] == SIZE_MAX) { ok = false; break; }
                worst = std::max(worst, cost[p]);
            }
            if (!ok) continue;
            if (worst + 1 < cost[e.conclusion]) {
                cost[e.conclusion] = worst + 1;
                changed = true;
            }
        }
    }
    return cost;
}

void check_params(const AbductionParams& p) {
    if (p.chain_depth < 1) throw std::invalid_argument("chain_depth must be >= 1");
    if (p.num_goals < 1) throw std::invalid_argument("num_goals must be >= 1");
    if (p.distractor_count < 0) throw std::invalid_argument("distractor_count must be >= 0");
    if (p.cycle_prob < 0.0 || p.cycle_prob > 1.0)
        throw std::invalid_argument("cycle_prob must be in [0,1]");
}

using EdgeKey = std::pair<std::vector<AtomId>, AtomId>;

} // namespace

AbductionInstance generate_abduction(const AbductionParams& params, std::uint64_t seed) {
    check_params(params);
    Rng rng(seed);

    for (int attempt = 0; attempt < 1000; ++attempt) {
        RuleGraph graph;
        std::set<EdgeKey> edge_keys;
        auto add_edge = [&](std::vector<AtomId> premises, AtomId conclusion) -> bool {
            std::sort(premises.begin(), premises.end());
            premises.erase(std::unique(premises.begin(), premises.end()), premises.end());
            EdgeKey key{premises, conclusion};
            if (edge_keys.count(key)) return false;
            edge_keys.insert(std::move(key));
            graph.edges.push_back(Hyperedge{std::move(premises), conclusion});
            return true;
        };

        const std::uint32_t n_facts = 2 + static_cast<std::uint32_t>(rng.below(3));
        for (AtomId f = 0; f < n_facts; ++f) graph.facts.push_back(f);
        graph.num_atoms = n_facts;
        auto fresh_atom = [&]() { return graph.num_atoms++; };

        // backbone: per goal a chain of exactly chain_depth edges up from a fact
        std::vector<AtomId> chain_pool; // non-goal chain atoms, distractor premises
        for (AtomId f = 0; f < n_facts; ++f) chain_pool.push_back(f);
        std::vector<std::vector<AtomId>> chains; // per goal: base fact, intermediates, goal

        for (int g = 0; g < params.num_goals; ++g) {
            std::vector<AtomId> chain;
            chain.push_back(graph.facts[rng.below(n_facts)]);
            for (int d = 1; d <= params.chain_depth; ++d) {
                AtomId node = fresh_atom();
                std::vector<AtomId> premises{chain.back()};
                std::uint64_t extra_facts = rng.below(3); // premise set size 1..3
                for (std::uint64_t i = 0; i < extra_facts; ++i)
                    premises.push_back(graph.facts[rng.below(n_facts)]);
                add_edge(std::move(premises), node);
                chain.push_back(node);
                if (d < params.chain_depth) chain_pool.push_back(node);
            }
            graph.goals.push_back(chain.back());
            chains.push_back(std::move(chain));
        }
        const std::size_t num_backbone = graph.edges.size();

        // distractors: premises reuse chain/fact atoms; conclusions are fresh
        // atoms, existing non-goal atoms, or (with probability cycle_prob) an
        // ancestor of one of the edge's own premises, forming a backward loop
        std::vector<AtomId> conclusion_pool; // intermediates + distractor atoms
        for (AtomId a : chain_pool)
            if (!graph.is_fact(a)) conclusion_pool.push_back(a);

        bool ok = true;
        for (int h = 0; h < params.distractor_count && ok; ++h) {
            bool placed = false;
            for (int redraw = 0; redraw < 20 && !placed; ++redraw) {
                std::size_t n_prem = 1 + rng.below(3);
                std::vector<AtomId> premises;
                for (std::size_t i = 0; i < n_prem; ++i)
                    premises.push_back(chain_pool[rng.below(chain_pool.size())]);
                std::sort(premises.begin(), premises.end());
                premises.erase(std::unique(premises.begin(), premises.end()),
                               premises.end());

                AtomId conclusion;
                bool rewired = false;
                if (rng.bernoulli(params.cycle_prob)) {
                    // rewire: conclusion at or below a non-fact premise on its chain
                    std::vector<AtomId> candidates;
                    for (AtomId p : premises)
                        if (!graph.is_fact(p)) candidates.push_back(p);
                    if (!candidates.empty()) {
                        AtomId p = candidates[rng.below(candidates.size())];
                        // atoms on p's chain at positions 1..pos(p)
                        std::vector<AtomId> below;
                        for (const auto& chain : chains) {
                            auto it = std::find(chain.begin(), chain.end(), p);
                            if (it == chain.end()) continue;
                            for (auto walk = chain.begin() + 1; walk <= it; ++walk)
                                below.push_back(*walk);
                            break;
                        }
                        if (!below.empty()) {
                            conclusion = below[rng.below(below.size())];
                            rewired = true;
                        }
                    }
                }
                if (!rewired) {
                    if (conclusion_pool.empty() || rng.below(2) == 0) {
                        conclusion = fresh_atom();
                        conclusion_pool.push_back(conclusion);
                    } else {
                        conclusion = conclusion_pool[rng.below(conclusion_pool.size())];
                    }
                    if (std::find(premises.begin(), premises.end(), conclusion) !=
                        premises.end())
                        continue; // self-loops only via rewiring
                }
                placed = add_edge(std::move(premises), conclusion);
            }
            if (!placed) ok = false;
        }
        if (!ok) continue;

        // no goal may be derivable in fewer rounds than its backbone
        std::vector<std::size_t> cost = derivation_cost(graph);
        bool depth_ok = std::all_of(graph.goals.begin(), graph.goals.end(), [&](AtomId g) {
            return cost[g] == static_cast<std::size_t>(params.chain_depth);
        });
        if (!depth_ok) continue;

        // certify: every goal provable backward, tree valid, forward agrees
        AbductionInstance inst;
        inst.params = params;
        inst.seed = seed;
        inst.graph = std::move(graph);
        inst.num_backbone_edges = num_backbone;

        std::vector<bool> reachable = forward_chain(inst.graph, params.chain_depth);
        bool certified = true;
        for (AtomId g : inst.graph.goals) {
            ProveResult proof = prove_backward(inst.graph, g, params.chain_depth);
            if (!proof.provable || !reachable[g]) { certified = false; break; }
            inst.trees.emplace_back(std::move(proof.tree));
        }
        if (!certified) continue;
        for (std::size_t g = 0; g < inst.graph.goals.size(); ++g)
            if (!verify_abduction(inst, g, inst.trees[g]->edge_indices).correct())
                throw std::logic_error("generated tree fails verification");
        return inst;
    }
    throw GenerationError("abduction generation: resample budget exhausted (d=" +
                          std::to_string(params.chain_depth) +
                          ", g=" + std::to_string(params.num_goals) +
                          ", h=" + std::to_string(params.distractor_count) + ")");
}

Verdict verify_abduction(const AbductionInstance& inst, std::size_t goal_index,
                         std::span<const std::size_t> edge_indices) {
    const RuleGraph& graph = inst.graph;
    if (goal_index >= graph.goals.size())
        return Verdict::bad_answer("goal index out of range");
    AtomId goal = graph.goals[goal_index];

    std::vector<std::size_t> edges(edge_indices.begin(), edge_indices.end());
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (std::size_t e : edges)
        if (e >= graph.edges.size())
            return Verdict::bad_answer("edge reference does not resolve");

    if (graph.is_fact(goal)) {
        if (edges.empty()) return Verdict::ok();
        return Verdict::wrong("non-minimal: goal is a given fact, no rules needed");
    }

    auto derives_goal = [&](std::span<const std::size_t> subset) {
        SubsetClosure c = close_over(graph, subset);
        return c.round[goal] != SIZE_MAX;
    };

    if (!derives_goal(edges)) {
        bool concludes_goal = std::any_of(edges.begin(), edges.end(), [&](std::size_t e) {
            return graph.edges[e].conclusion == goal;
        });
        if (!concludes_goal)
            return Verdict::wrong("wrong-goal: no selected rule concludes " +
                                  atom_name(goal));
        return Verdict::wrong(
            "invalid derivation: premises do not all trace back to the facts");
    }

    // subset-minimality (also rejects unused, duplicate-conclusion and
    // cyclic extras: none of those can be load-bearing)
    for (std::size_t i = 0; i < edges.size(); ++i) {
        std::vector<std::size_t> without = edges;
        without.erase(without.begin() + static_cast<std::ptrdiff_t>(i));
        if (derives_goal(without))
            return Verdict::wrong("non-minimal: rule '" +
                                  edge_to_string(graph.edges[edges[i]]) +
                                  "' is removable");
    }
    return Verdict::ok();
}

namespace {

std::string_view trim_view(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

std::optional<AtomId> parse_atom(std::string_view token, std::uint32_t num_atoms) {
    token = trim_view(token);
    if (token.size() < 2) return std::nullopt;
    if (token[0] != 'A' && token[0] != 'a') return std::nullopt;
    std::uint64_t id = 0;
    for (char c : token.substr(1)) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
        id = id * 10 + static_cast<std::uint64_t>(c - '0');
        if (id > num_atoms) return std::nullopt;
    }
    if (id >= num_atoms) return std::nullopt;
    return static_cast<AtomId>(id);
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t p = text.find(sep, start);
        if (p == std::string_view::npos) {
            out.push_back(text.substr(start));
            break;
        }
        out.push_back(text.substr(start, p - start));
        start = p + 1;
    }
    return out;
}

} // namespace

std::optional<std::vector<std::vector<std::size_t>>>
parse_abduction_answer(const RuleGraph& graph, std::string_view text) {
    std::map<EdgeKey, std::size_t> index;
    for (std::size_t i = 0; i < graph.edges.size(); ++i)
        index[{graph.edges[i].premises, graph.edges[i].conclusion}] = i;

    // goal blocks: newline- or '|'-separated, blank blocks ignored
    std::string normalized(text);
    std::replace(normalized.begin(), normalized.end(), '|', '\n');
    std::vector<std::vector<std::size_t>> out;
    for (std::string_view block : split(normalized, '\n')) {
        block = trim_view(block);
        if (block.empty()) continue;
        std::vector<std::size_t> edges;
        for (std::string_view part : split(block, ';')) {
            part = trim_view(part);
            if (part.empty()) continue;
            std::size_t arrow = part.find("->");
            if (arrow == std::string_view::npos) return std::nullopt;
            if (part.find("->", arrow + 2) != std::string_view::npos) return std::nullopt;

            std::vector<AtomId> premises;
            for (std::string_view p : split(part.substr(0, arrow), '&')) {
                auto atom = parse_atom(p, graph.num_atoms);
                if (!atom) return std::nullopt;
                premises.push_back(*atom);
            }
            if (premises.empty()) return std::nullopt;
            auto conclusion = parse_atom(part.substr(arrow + 2), graph.num_atoms);
            if (!conclusion) return std::nullopt;

            std::sort(premises.begin(), premises.end());
            premises.erase(std::unique(premises.begin(), premises.end()), premises.end());
            auto it = index.find({premises, *conclusion});
            if (it == index.end()) return std::nullopt; // unknown rule
            edges.push_back(it->second);
        }
        out.push_back(std::move(edges));
    }
    if (out.empty()) return std::nullopt;
    return out;
}

Verdict verify_abduction_text(const AbductionInstance& inst, std::string_view text) {
    auto parsed = parse_abduction_answer(inst.graph, text);
    if (!parsed)
        return Verdict::bad_answer("answer does not match the abduction grammar");
    if (parsed->size() != inst.graph.goals.size())
        return Verdict::bad_answer("expected " + std::to_string(inst.graph.goals.size()) +
                                   " goal block(s), got " +
                                   std::to_string(parsed->size()));
    for (std::size_t g = 0; g < parsed->size(); ++g) {
        Verdict v = verify_abduction(inst, g, (*parsed)[g]);
        if (!v.correct()) {
            v.detail = "goal " + atom_name(inst.graph.goals[g]) + ": " + v.detail;
            return v;
        }
    }
    return Verdict::ok();
}

std::string abduction_answer_string(const AbductionInstance& inst) {
    std::string out;
    for (std::size_t g = 0; g < inst.trees.size(); ++g) {
        if (g > 0) out += '\n';
        if (!inst.trees[g]) {
            out += "unprovable";
            continue;
        }
        const auto& tree = *inst.trees[g];
        if (tree.edge_indices.empty()) {
            out += "fact";
            continue;
        }
        for (std::size_t i = 0; i < tree.edge_indices.size(); ++i) {
            if (i > 0) out += "; ";
            out += edge_to_string(inst.graph.edges[tree.edge_indices[i]]);
        }
    }
    return out;
}

} // namespace metagym
