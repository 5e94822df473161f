#include "metagym/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_map>

#include <CLI11.hpp>
#include <json.hpp>

#include "metagym/dataset.hpp"
#include "metagym/merge.hpp"
#include "metagym/reward.hpp"

namespace metagym::cli {

namespace {

std::uint64_t resolve_seed(std::uint64_t flag_seed) {
    // METAGYM_SEED overrides the master seed; all randomness flows through it.
    if (const char* env = std::getenv("METAGYM_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw std::runtime_error("METAGYM_SEED is not a valid 64-bit integer");
        }
    }
    return flag_seed;
}

std::vector<int> parse_levels(const std::string& levels) {
    std::vector<int> out;
    std::stringstream ss(levels);
    std::string item;
    while (std::getline(ss, item, ',')) {
        int level = 0;
        try {
            std::size_t used = 0;
            level = std::stoi(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw CLI::ValidationError("levels must be a comma-separated list of 1..3");
        }
        if (level < 1 || level > 3) throw CLI::ValidationError("levels must be 1..3");
        out.push_back(level);
    }
    if (out.empty()) throw CLI::ValidationError("no levels given");
    return out;
}

DatasetRecord load_single_record(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    // a one-object JSON file (possibly pretty-printed) or the first JSONL line
    try {
        return record_from_line(content);
    } catch (const nlohmann::json::exception&) {
    }
    std::istringstream lines(content);
    std::string line;
    while (std::getline(lines, line))
        if (!line.empty()) return record_from_line(line);
    throw std::runtime_error(path + ": no record found");
}

std::string solve_record(const DatasetRecord& rec, int beam_width,
                         nlohmann::ordered_json* diag) {
    return std::visit(
        [&](const auto& inst) -> std::string {
            using T = std::decay_t<decltype(inst)>;
            if constexpr (std::is_same_v<T, DeductionInstance>) {
                ClauseSet cs = to_cnf_conjunction(inst.formulas, inst.params.n_vars);
                SolveResult r = solve_sat(cs);
                if (diag) {
                    (*diag)["decisions"] = r.stats.decisions;
                    (*diag)["unit_propagations"] = r.stats.unit_propagations;
                    (*diag)["pure_literal_eliminations"] =
                        r.stats.pure_literal_eliminations;
                }
                if (!r.sat()) return "UNSAT";
                Assignment witness(inst.params.n_vars);
                for (int v = 1; v <= inst.params.n_vars; ++v)
                    witness.set(v, r.assignment->value(v));
                return witness.to_string();
            } else if constexpr (std::is_same_v<T, InductionInstance>) {
                auto result = induce_rule(inst.visible, 7, beam_width);
                if (!result) throw std::runtime_error("induction solver found no rule");
                if (diag) (*diag)["rule"] = rule_to_string(result->rule);
                std::string out;
                for (std::size_t i = 0; i < result->fills.size(); ++i) {
                    if (i > 0) out += ", ";
                    out += std::to_string(result->fills[i]);
                }
                return out;
            } else {
                std::string out;
                for (std::size_t g = 0; g < inst.graph.goals.size(); ++g) {
                    ProveResult proof = prove_backward(inst.graph, inst.graph.goals[g],
                                                       inst.params.chain_depth);
                    if (!proof.provable)
                        throw std::runtime_error("goal " +
                                                 atom_name(inst.graph.goals[g]) +
                                                 " is unprovable");
                    if (g > 0) out += '\n';
                    for (std::size_t i = 0; i < proof.tree.edge_indices.size(); ++i) {
                        if (i > 0) out += "; ";
                        out += edge_to_string(
                            inst.graph.edges[proof.tree.edge_indices[i]]);
                    }
                }
                return out;
            }
        },
        rec.instance);
}

int cmd_gen(const std::string& task, const std::string& levels, int count,
            std::uint64_t seed, const std::string& out_path, int jobs, bool json,
            std::ostream& out) {
    std::vector<TaskFamily> tasks;
    if (task == "all") {
        tasks.assign(std::begin(kAllTasks), std::end(kAllTasks));
    } else {
        auto t = task_from_name(task);
        if (!t) throw CLI::ValidationError("unknown task '" + task + "'");
        tasks.push_back(*t);
    }

    std::vector<LevelSpec> specs;
    for (TaskFamily t : tasks)
        for (int level : parse_levels(levels))
            specs.push_back(LevelSpec{t, level, count});

    DatasetManifest manifest =
        generate_dataset(specs, resolve_seed(seed), out_path, jobs);
    if (json) {
        out << manifest.to_json();
    } else {
        std::uint64_t total = 0;
        for (const LevelSpec& s : specs) total += static_cast<std::uint64_t>(s.instance_count);
        out << "wrote " << total << " records to " << out_path << "\n"
            << "sha256 " << manifest.sha256 << "\n"
            << "manifest " << out_path << ".manifest.json\n";
    }
    return 0;
}

int cmd_solve(const std::string& path, int beam_width, bool json, std::ostream& out) {
    DatasetRecord rec = load_single_record(path);
    nlohmann::ordered_json diag;
    std::string answer = solve_record(rec, beam_width, &diag);
    if (json) {
        nlohmann::ordered_json j;
        j["id"] = rec.id;
        j["answer"] = answer;
        j["solver"] = diag;
        out << j.dump() << "\n";
    } else {
        out << answer << "\n";
    }
    return 0;
}

int cmd_verify(const std::string& path, const std::string& answer, bool json,
               std::ostream& out) {
    DatasetRecord rec = load_single_record(path);
    Verdict v = verify_answer_text(rec.instance, answer);
    if (json) {
        nlohmann::ordered_json j;
        j["id"] = rec.id;
        j["correct"] = v.correct();
        j["status"] = v.status == VerdictStatus::correct     ? "correct"
                      : v.status == VerdictStatus::incorrect ? "incorrect"
                                                             : "malformed";
        j["detail"] = v.detail;
        out << j.dump() << "\n";
    } else {
        out << (v.correct() ? "correct" : (v.status == VerdictStatus::malformed
                                               ? "malformed: " + v.detail
                                               : "incorrect: " + v.detail))
            << "\n";
    }
    return v.correct() ? 0 : 1;
}

int cmd_score(const std::string& dataset_path, const std::string& completions_path,
              const std::string& out_path, bool json, std::ostream& out,
              std::ostream& err) {
    std::vector<DatasetRecord> records = load_dataset(dataset_path);
    std::unordered_map<std::string, const TaskInstance*> index;
    for (const DatasetRecord& r : records) index[r.id] = &r.instance;
    auto lookup = [&](const std::string& id) -> const TaskInstance* {
        auto it = index.find(id);
        return it == index.end() ? nullptr : it->second;
    };

    std::ifstream completions(completions_path);
    if (!completions) throw std::runtime_error("cannot open " + completions_path);

    std::size_t scored = 0;
    if (!out_path.empty()) {
        std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
        if (!file) throw std::runtime_error("cannot write " + out_path);
        scored = score_stream(lookup, completions, file);
        if (json) {
            nlohmann::ordered_json j;
            j["scored"] = scored;
            j["output"] = out_path;
            out << j.dump() << "\n";
        } else {
            err << "scored " << scored << " completions -> " << out_path << "\n";
        }
    } else {
        if (json)
            throw CLI::ValidationError("--json for score requires -o for the records");
        scored = score_stream(lookup, completions, out);
        err << "scored " << scored << " completions\n";
    }
    return 0;
}

int cmd_merge(double lambda_d, double lambda_i, double lambda_a,
              const std::vector<std::string>& inputs, const std::string& out_path,
              bool json, std::ostream& out) {
    ParameterMap d = load_safetensors(inputs[0]);
    ParameterMap i = load_safetensors(inputs[1]);
    ParameterMap a = load_safetensors(inputs[2]);
    ParameterMap merged = merge_parameters(d, i, a, {lambda_d, lambda_i, lambda_a});
    save_safetensors(merged, out_path);
    if (json) {
        nlohmann::ordered_json j;
        j["output"] = out_path;
        j["tensors"] = merged.size();
        j["lambda"] = {lambda_d, lambda_i, lambda_a};
        out << j.dump() << "\n";
    } else {
        out << "merged " << merged.size() << " tensors -> " << out_path << "\n";
    }
    return 0;
}

int cmd_stats(const std::string& path, bool json, std::ostream& out) {
    DatasetStats stats = dataset_stats(path);
    if (json) {
        out << stats.to_json() << "\n";
        return 0;
    }
    out << "records: " << stats.total_records << "\n";
    for (const auto& [key, row] : stats.per_level) {
        out << key.first << " level " << key.second << ": count=" << row.count;
        if (key.first == "deduction")
            out << " sat=" << row.sat_count << " unsat=" << row.unsat_count
                << " mean_decisions=" << row.mean_decisions
                << " mean_brute_nodes=" << row.mean_brute_force_nodes;
        else if (key.first == "induction")
            out << " mean_k=" << row.mean_cycle_len
                << " mean_masks=" << row.mean_mask_count;
        else
            out << " mean_depth=" << row.mean_chain_depth
                << " mean_distractors=" << row.mean_distractors
                << " mean_tree_edges=" << row.mean_tree_edges;
        out << "\n";
    }
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"metagym: generate, solve, verify and reward-score the "
                 "deduction/induction/abduction task families"};
    app.require_subcommand(1);
    bool json = false;
    app.add_flag("--json", json, "emit exactly one JSON document on stdout");

    // gen
    auto* gen = app.add_subcommand("gen", "generate a curriculum dataset (JSONL + manifest)");
    std::string gen_task = "all", gen_levels = "1,2,3", gen_out;
    int gen_count = 200, gen_jobs = 1;
    std::uint64_t gen_seed = 0;
    gen->add_option("--task", gen_task, "deduction|induction|abduction|all")
        ->default_val("all");
    gen->add_option("--levels", gen_levels, "comma-separated levels, e.g. 1,2");
    gen->add_option("--count", gen_count, "instances per task per level")
        ->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed, "master seed (METAGYM_SEED overrides)");
    gen->add_option("--jobs", gen_jobs, "worker threads")->check(CLI::PositiveNumber);
    gen->add_option("-o,--out", gen_out, "output dataset path")->required();

    // solve
    auto* solve = app.add_subcommand("solve", "run the task solver on one instance record");
    std::string solve_path;
    int solve_beam = 64;
    solve->add_option("instance", solve_path, "instance record (JSON/JSONL)")->required();
    solve->add_option("--beam", solve_beam, "induction beam width")
        ->check(CLI::PositiveNumber);

    // verify
    auto* verify = app.add_subcommand("verify", "check an answer against one instance record");
    std::string verify_path, verify_answer;
    verify->add_option("instance", verify_path, "instance record (JSON/JSONL)")->required();
    verify->add_option("answer", verify_answer, "answer text in the task's grammar")
        ->required();

    // score
    auto* score = app.add_subcommand("score", "reward-score a completions file against a dataset");
    std::string score_dataset, score_completions, score_out;
    int score_jobs = 1;
    score->add_option("dataset", score_dataset, "dataset JSONL")->required();
    score->add_option("completions", score_completions,
                      "completions JSONL: {instance_id, task, text}")
        ->required();
    score->add_option("-o,--out", score_out, "write reward records here (default: stdout)");
    score->add_option("--jobs", score_jobs, "accepted for pipeline symmetry")
        ->check(CLI::PositiveNumber);

    // merge
    auto* merge = app.add_subcommand("merge", "merge three safetensors checkpoints");
    double lambda_d = 1.0, lambda_i = 0.2, lambda_a = 0.1;
    std::vector<std::string> merge_inputs;
    std::string merge_out;
    merge->add_option("--lambda-d", lambda_d, "deduction weight");
    merge->add_option("--lambda-i", lambda_i, "induction weight");
    merge->add_option("--lambda-a", lambda_a, "abduction weight");
    merge->add_option("inputs", merge_inputs, "three input checkpoints")
        ->expected(3)
        ->required();
    merge->add_option("-o,--out", merge_out, "output checkpoint")->required();

    // stats
    auto* stats = app.add_subcommand("stats", "summarize a dataset");
    std::string stats_path;
    stats->add_option("dataset", stats_path, "dataset JSONL")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) { // --help
            out << app.help();
            return 0;
        }
        err << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (gen->parsed())
            return cmd_gen(gen_task, gen_levels, gen_count, gen_seed, gen_out, gen_jobs,
                           json, out);
        if (solve->parsed()) return cmd_solve(solve_path, solve_beam, json, out);
        if (verify->parsed()) return cmd_verify(verify_path, verify_answer, json, out);
        if (score->parsed())
            return cmd_score(score_dataset, score_completions, score_out, json, out, err);
        if (merge->parsed())
            return cmd_merge(lambda_d, lambda_i, lambda_a, merge_inputs, merge_out, json,
                             out);
        if (stats->parsed()) return cmd_stats(stats_path, json, out);
    } catch (const CLI::ValidationError& e) {
        err << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

} // namespace metagym::cli
