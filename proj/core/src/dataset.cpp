#include "metagym/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "metagym/rng.hpp"

namespace metagym {

namespace {

constexpr std::uint64_t kParamStreamSalt = 0x70617261'6d733a31ULL;

// Level tables. The level-3 abduction row is the published one; the other
// rows interpolate between the published endpoints.
DeductionParams deduction_level(int level, Rng& rng) {
    switch (level) {
    case 1: return {6, 3, 2, 1};
    case 2: return {8, 4 + static_cast<int>(rng.below(2)), 3, 2};
    case 3: return {10, 6, 4, 3};
    default: throw std::invalid_argument("deduction level must be 1..3");
    }
}

InductionParams induction_level(int level, Rng& rng) {
    InductionParams p;
    p.level = level;
    switch (level) {
    case 1:
        p.cycle_len = 1 + static_cast<int>(rng.below(2)); // k in {1,2}
        p.mask_count = 1;
        break;
    case 2:
        p.cycle_len = 3 + static_cast<int>(rng.below(2)); // k in {3,4}
        p.mask_count = 1;
        break;
    case 3:
        p.cycle_len = 5 + static_cast<int>(rng.below(3)); // k in {5,6,7}
        p.mask_count = 1 + static_cast<int>(rng.below(2));
        break;
    default: throw std::invalid_argument("induction level must be 1..3");
    }
    return p;
}

AbductionParams abduction_level(int level, Rng& rng) {
    AbductionParams p;
    p.level = level;
    switch (level) {
    case 1:
        p.chain_depth = 2;
        p.num_goals = 1;
        p.distractor_count = 2 + static_cast<int>(rng.below(2)); // 2..3
        p.cycle_prob = 0.0;
        break;
    case 2:
        p.chain_depth = 2 + static_cast<int>(rng.below(2));      // 2..3
        p.num_goals = 1 + static_cast<int>(rng.below(2));        // 1..2
        p.distractor_count = 3 + static_cast<int>(rng.below(3)); // 3..5
        p.cycle_prob = rng.unit_real() * 0.10;
        break;
    case 3:
        p.chain_depth = 3 + static_cast<int>(rng.below(2));      // 3..4
        p.num_goals = 2 + static_cast<int>(rng.below(2));        // 2..3
        p.distractor_count = 5 + static_cast<int>(rng.below(3)); // 5..7
        p.cycle_prob = 0.10 + rng.unit_real() * 0.15;
        break;
    default: throw std::invalid_argument("abduction level must be 1..3");
    }
    return p;
}

constexpr std::string_view kTagInstruction =
    "Think through the problem step by step inside <think> </think> tags, then give "
    "only the final answer inside <answer> </answer> tags.";

std::string render_deduction_prompt(const DeductionInstance& inst) {
    std::ostringstream out;
    out << "You are given " << inst.formulas.size()
        << " propositional formulas over the variables x1..x" << inst.params.n_vars
        << ".\n\nFormulas:\n";
    for (std::size_t i = 0; i < inst.formulas.size(); ++i)
        out << "  " << (i + 1) << ". " << print_formula(*inst.formulas[i]) << "\n";
    out << "\nObservation to establish: " << inst.observation
        << ".\nFind a truth assignment under which every formula above is true, or "
           "determine that the formulas cannot all hold at once.\n\nAnswer with "
           "comma-separated assignments covering every variable, for example "
           "'x1=true, x2=false, x3=true', or with the single word UNSAT if no such "
           "assignment exists.\n\n"
        << kTagInstruction;
    return out.str();
}

std::string render_induction_prompt(const InductionInstance& inst) {
    std::ostringstream out;
    out << "A sequence of integers is produced by a hidden cyclic rule: starting "
           "from the first element, a fixed cycle of arithmetic operations (adding, "
           "subtracting, or multiplying by small constants) is applied over and over "
           "in order. Some positions are masked out and shown as '?'.\n\nSequence: ";
    for (std::size_t t = 0; t < inst.visible.size(); ++t) {
        if (t > 0) out << ", ";
        if (inst.visible[t]) out << *inst.visible[t];
        else out << '?';
    }
    out << "\n\nInfer the underlying rule and recover the masked values.\n\nAnswer "
           "with the masked values only, as comma-separated integers in left-to-right "
           "order.\n\n"
        << kTagInstruction;
    return out.str();
}

std::string render_abduction_prompt(const AbductionInstance& inst) {
    const RuleGraph& g = inst.graph;
    std::ostringstream out;
    out << "A rule system over the atoms A0..A" << (g.num_atoms - 1)
        << " is given. Each rule derives its conclusion once all of its premises "
           "hold.\n\nKnown facts: ";
    for (std::size_t i = 0; i < g.facts.size(); ++i) {
        if (i > 0) out << ", ";
        out << atom_name(g.facts[i]);
    }
    out << "\n\nRules:\n";
    // display order shuffled per instance so the chain structure is not
    // given away by listing order; answers reference rules by content
    std::vector<std::size_t> order(g.edges.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(mix64(inst.seed ^ 0x646973706c61793aULL));
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    for (std::size_t i : order) out << "  " << edge_to_string(g.edges[i]) << "\n";

    out << "\nGoals, in order: ";
    for (std::size_t i = 0; i < g.goals.size(); ++i) {
        if (i > 0) out << ", ";
        out << atom_name(g.goals[i]);
    }
    out << "\n\nFor each goal, find the minimal set of rules whose chained "
           "application derives the goal from the known facts: every premise must "
           "either be a known fact or be derived by another rule you list, and no "
           "listed rule may be removable.\n\nAnswer with one line per goal, in goal "
           "order; on each line list the rules used, separated by ';', each written "
           "exactly as it appears above (for example 'A0 & A2 -> A5').\n\n"
        << kTagInstruction;
    return out.str();
}

} // namespace

std::uint64_t instance_seed(std::uint64_t master_seed, TaskFamily task, int level,
                            std::uint64_t index) {
    return derive_seed(master_seed, static_cast<std::uint64_t>(task),
                       static_cast<std::uint64_t>(level), index);
}

TaskInstance sample_instance(TaskFamily task, int level, std::uint64_t master_seed,
                             std::uint64_t index) {
    std::uint64_t seed = instance_seed(master_seed, task, level, index);
    Rng param_rng(mix64(seed ^ kParamStreamSalt));
    switch (task) {
    case TaskFamily::deduction:
        return generate_deduction(deduction_level(level, param_rng), seed);
    case TaskFamily::induction:
        return generate_induction(induction_level(level, param_rng), seed);
    case TaskFamily::abduction:
        return generate_abduction(abduction_level(level, param_rng), seed);
    }
    throw std::logic_error("unreachable");
}

std::vector<TaskInstance> sample_dataset(const LevelSpec& spec, std::uint64_t master_seed,
                                         int jobs) {
    if (spec.instance_count < 0) throw std::invalid_argument("negative instance count");
    if (jobs < 1) jobs = 1;
    const std::uint64_t n = static_cast<std::uint64_t>(spec.instance_count);

    auto make = [&](std::uint64_t index) {
        try {
            return sample_instance(spec.task, spec.level, master_seed, index);
        } catch (const GenerationError& e) {
            throw GenerationError(std::string(task_name(spec.task)) + " instance " +
                                  std::to_string(index) + ": " + e.what());
        }
    };

    std::vector<TaskInstance> out;
    out.reserve(n);
    if (jobs == 1 || n < 2) {
        for (std::uint64_t i = 0; i < n; ++i) out.push_back(make(i));
        return out;
    }

    // fan out by contiguous index chunks; assembly order is by index, so the
    // result does not depend on the thread count
    std::uint64_t chunk = (n + static_cast<std::uint64_t>(jobs) - 1) /
                          static_cast<std::uint64_t>(jobs);
    std::vector<std::future<std::vector<TaskInstance>>> futures;
    for (std::uint64_t start = 0; start < n; start += chunk) {
        std::uint64_t end = std::min(n, start + chunk);
        futures.push_back(std::async(std::launch::async, [&, start, end]() {
            std::vector<TaskInstance> part;
            part.reserve(end - start);
            for (std::uint64_t i = start; i < end; ++i) part.push_back(make(i));
            return part;
        }));
    }
    for (auto& f : futures) {
        auto part = f.get();
        std::move(part.begin(), part.end(), std::back_inserter(out));
    }
    return out;
}

std::string render_prompt(const TaskInstance& inst) {
    return std::visit(
        [](const auto& i) -> std::string {
            using T = std::decay_t<decltype(i)>;
            if constexpr (std::is_same_v<T, DeductionInstance>)
                return render_deduction_prompt(i);
            else if constexpr (std::is_same_v<T, InductionInstance>)
                return render_induction_prompt(i);
            else
                return render_abduction_prompt(i);
        },
        inst);
}

std::string ground_truth_string(const TaskInstance& inst) {
    nlohmann::ordered_json j;
    std::visit(
        [&](const auto& i) {
            using T = std::decay_t<decltype(i)>;
            if constexpr (std::is_same_v<T, DeductionInstance>) {
                if (i.sat()) {
                    j["status"] = "sat";
                    j["assignment"] = i.witness->to_string();
                } else {
                    j["status"] = "unsat";
                }
            } else if constexpr (std::is_same_v<T, InductionInstance>) {
                auto fills = nlohmann::ordered_json::array();
                for (const auto& [pos, value] : i.hidden) fills.push_back(value);
                j["fills"] = std::move(fills);
                j["rule"] = rule_to_string(i.ground_truth_rule);
            } else {
                auto trees = nlohmann::ordered_json::array();
                for (const auto& tree : i.trees) {
                    auto edges = nlohmann::ordered_json::array();
                    if (tree)
                        for (std::size_t e : tree->edge_indices)
                            edges.push_back(edge_to_string(i.graph.edges[e]));
                    trees.push_back(std::move(edges));
                }
                j["trees"] = std::move(trees);
            }
        },
        inst);
    return j.dump();
}

std::string instance_id(TaskFamily task, int level, std::uint64_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%05llu", static_cast<unsigned long long>(index));
    return std::string(task_name(task)) + "-l" + std::to_string(level) + "-" + buf;
}

namespace {

nlohmann::ordered_json params_json(const TaskInstance& inst) {
    nlohmann::ordered_json p;
    std::visit(
        [&](const auto& i) {
            using T = std::decay_t<decltype(i)>;
            if constexpr (std::is_same_v<T, DeductionInstance>) {
                p["n_vars"] = i.params.n_vars;
                p["n_formulas"] = i.params.n_formulas;
                p["max_depth"] = i.params.max_depth;
            } else if constexpr (std::is_same_v<T, InductionInstance>) {
                p["cycle_len"] = i.params.cycle_len;
                p["mask_count"] = i.params.mask_count;
            } else {
                p["chain_depth"] = i.params.chain_depth;
                p["num_goals"] = i.params.num_goals;
                p["distractors"] = i.params.distractor_count;
                p["cycle_prob"] = i.params.cycle_prob;
            }
        },
        inst);
    return p;
}

TaskInstance regenerate(TaskFamily task, int level, std::uint64_t seed,
                        const nlohmann::json& params) {
    switch (task) {
    case TaskFamily::deduction: {
        DeductionParams p;
        p.n_vars = params.at("n_vars").get<int>();
        p.n_formulas = params.at("n_formulas").get<int>();
        p.max_depth = params.at("max_depth").get<int>();
        p.level = level;
        return generate_deduction(p, seed);
    }
    case TaskFamily::induction: {
        InductionParams p;
        p.cycle_len = params.at("cycle_len").get<int>();
        p.mask_count = params.at("mask_count").get<int>();
        p.level = level;
        return generate_induction(p, seed);
    }
    case TaskFamily::abduction: {
        AbductionParams p;
        p.chain_depth = params.at("chain_depth").get<int>();
        p.num_goals = params.at("num_goals").get<int>();
        p.distractor_count = params.at("distractors").get<int>();
        p.cycle_prob = params.at("cycle_prob").get<double>();
        p.level = level;
        return generate_abduction(p, seed);
    }
    }
    throw std::logic_error("unreachable");
}

} // namespace

std::string instance_to_record(const TaskInstance& inst, const std::string& id) {
    nlohmann::ordered_json j;
    j["id"] = id;
    j["task"] = std::string(task_name(family_of(inst)));
    j["level"] = level_of(inst);
    j["seed"] = seed_of(inst);
    j["prompt"] = render_prompt(inst);
    j["ground_truth"] = ground_truth_string(inst);
    j["params"] = params_json(inst);
    return j.dump();
}

DatasetRecord record_from_line(const std::string& line) {
    nlohmann::json j = nlohmann::json::parse(line);
    auto task = task_from_name(j.at("task").get<std::string>());
    if (!task) throw std::runtime_error("unknown task '" + j.at("task").get<std::string>() + "'");
    int level = j.at("level").get<int>();
    std::uint64_t seed = j.at("seed").get<std::uint64_t>();

    DatasetRecord rec;
    rec.id = j.at("id").get<std::string>();
    rec.instance = regenerate(*task, level, seed, j.at("params"));
    rec.prompt = j.at("prompt").get<std::string>();
    rec.ground_truth = j.at("ground_truth").get<std::string>();

    if (ground_truth_string(rec.instance) != rec.ground_truth)
        throw std::runtime_error("record '" + rec.id +
                                 "': stored ground truth does not match regeneration "
                                 "(corrupt record or engine version skew)");
    return rec;
}

std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<DatasetRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(record_from_line(line));
        } catch (const std::exception& e) {
            throw std::runtime_error(path.string() + " line " + std::to_string(line_no) +
                                     ": " + e.what());
        }
    }
    return out;
}

std::string DatasetManifest::to_json() const {
    nlohmann::ordered_json j;
    j["engine_version"] = engine_version;
    j["master_seed"] = master_seed;
    j["seed_rule"] = seed_rule;
    auto levels = nlohmann::ordered_json::array();
    for (const LevelSpec& s : specs) {
        nlohmann::ordered_json row;
        row["task"] = std::string(task_name(s.task));
        row["level"] = s.level;
        row["count"] = s.instance_count;
        levels.push_back(std::move(row));
    }
    j["levels"] = std::move(levels);
    j["sha256"] = sha256;
    return j.dump(2) + "\n";
}

DatasetManifest emit_jsonl(std::span<const TaskInstance> instances,
                           std::span<const std::string> ids,
                           const std::filesystem::path& path, std::uint64_t master_seed,
                           std::span<const LevelSpec> specs) {
    if (instances.size() != ids.size())
        throw std::invalid_argument("one id per instance required");

    std::string content;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        content += instance_to_record(instances[i], ids[i]);
        content += '\n';
    }

    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write failed: " + path.string());
    }

    DatasetManifest manifest;
    manifest.engine_version = std::string(kEngineVersion);
    manifest.master_seed = master_seed;
    manifest.seed_rule = std::string(kSeedRule);
    manifest.specs.assign(specs.begin(), specs.end());
    manifest.sha256 = sha256_hex({reinterpret_cast<const unsigned char*>(content.data()),
                                  content.size()});

    std::filesystem::path manifest_path = path;
    manifest_path += ".manifest.json";
    std::ofstream mout(manifest_path, std::ios::binary | std::ios::trunc);
    if (!mout) throw std::runtime_error("cannot write " + manifest_path.string());
    std::string mjson = manifest.to_json();
    mout.write(mjson.data(), static_cast<std::streamsize>(mjson.size()));
    return manifest;
}

DatasetManifest generate_dataset(std::span<const LevelSpec> specs,
                                 std::uint64_t master_seed,
                                 const std::filesystem::path& path, int jobs) {
    // curriculum order: by task, then ascending level, then index
    std::vector<LevelSpec> ordered(specs.begin(), specs.end());
    std::stable_sort(ordered.begin(), ordered.end(), [](const LevelSpec& a, const LevelSpec& b) {
        if (a.task != b.task) return static_cast<int>(a.task) < static_cast<int>(b.task);
        return a.level < b.level;
    });

    std::vector<TaskInstance> instances;
    std::vector<std::string> ids;
    for (const LevelSpec& spec : ordered) {
        std::vector<TaskInstance> part = sample_dataset(spec, master_seed, jobs);
        for (std::size_t i = 0; i < part.size(); ++i)
            ids.push_back(instance_id(spec.task, spec.level, i));
        std::move(part.begin(), part.end(), std::back_inserter(instances));
    }
    return emit_jsonl(instances, ids, path, master_seed, ordered);
}

DatasetStats dataset_stats(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());

    DatasetStats stats;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        DatasetRecord rec;
        try {
            rec = record_from_line(line);
        } catch (const std::exception& e) {
            throw std::runtime_error(path.string() + " line " + std::to_string(line_no) +
                                     ": " + e.what());
        }
        stats.total_records += 1;
        auto key = std::make_pair(std::string(task_name(family_of(rec.instance))),
                                  level_of(rec.instance));
        LevelStats& row = stats.per_level[key];
        double n = static_cast<double>(row.count);
        row.count += 1;
        auto roll = [&](double& mean, double sample) {
            mean = (mean * n + sample) / static_cast<double>(row.count);
        };

        std::visit(
            [&](const auto& i) {
                using T = std::decay_t<decltype(i)>;
                if constexpr (std::is_same_v<T, DeductionInstance>) {
                    if (i.sat()) row.sat_count += 1;
                    else row.unsat_count += 1;
                    roll(row.mean_decisions, static_cast<double>(i.solve_stats.decisions));
                    roll(row.mean_unit_propagations,
                         static_cast<double>(i.solve_stats.unit_propagations));
                    BruteForceResult brute = brute_force_sat(i.formulas, i.params.n_vars);
                    roll(row.mean_brute_force_nodes,
                         static_cast<double>(brute.explored_nodes));
                } else if constexpr (std::is_same_v<T, InductionInstance>) {
                    roll(row.mean_cycle_len, static_cast<double>(i.params.cycle_len));
                    roll(row.mean_mask_count, static_cast<double>(i.params.mask_count));
                } else {
                    roll(row.mean_chain_depth, static_cast<double>(i.params.chain_depth));
                    roll(row.mean_distractors,
                         static_cast<double>(i.params.distractor_count));
                    double edges = 0;
                    for (const auto& tree : i.trees)
                        if (tree) edges += static_cast<double>(tree->edge_indices.size());
                    roll(row.mean_tree_edges, edges);
                }
            },
            rec.instance);
    }
    return stats;
}

std::string DatasetStats::to_json() const {
    nlohmann::ordered_json j;
    j["total_records"] = total_records;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& [key, row] : per_level) {
        nlohmann::ordered_json r;
        r["task"] = key.first;
        r["level"] = key.second;
        r["count"] = row.count;
        if (key.first == "deduction") {
            r["sat"] = row.sat_count;
            r["unsat"] = row.unsat_count;
            r["mean_decisions"] = row.mean_decisions;
            r["mean_unit_propagations"] = row.mean_unit_propagations;
            r["mean_brute_force_nodes"] = row.mean_brute_force_nodes;
        } else if (key.first == "induction") {
            r["mean_cycle_len"] = row.mean_cycle_len;
            r["mean_mask_count"] = row.mean_mask_count;
        } else {
            r["mean_chain_depth"] = row.mean_chain_depth;
            r["mean_distractors"] = row.mean_distractors;
            r["mean_tree_edges"] = row.mean_tree_edges;
        }
        rows.push_back(std::move(r));
    }
    j["levels"] = std::move(rows);
    return j.dump(2);
}

std::string sha256_hex(std::span<const unsigned char> bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    static const unsigned char empty = 0;
    const unsigned char* data = bytes.empty() ? &empty : bytes.data();
    if (EVP_Digest(data, bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

std::string sha256_hex_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return sha256_hex(bytes);
}

} // namespace metagym
