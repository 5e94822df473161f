#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "metagym/task.hpp"

namespace metagym {

inline constexpr std::string_view kEngineVersion = "0.1.0";
inline constexpr std::string_view kSeedRule = "splitmix64-chain-v1";

struct LevelSpec {
    TaskFamily task = TaskFamily::deduction;
    int level = 1; // 1..3
    int instance_count = 0;
};

// Seed for instance `index` of (task, level) under a master seed.
std::uint64_t instance_seed(std::uint64_t master_seed, TaskFamily task, int level,
                            std::uint64_t index);

// Draws per-instance parameters uniformly from the level's ranges and runs
// the task generator. Deterministic for (task, level, master_seed, index).
TaskInstance sample_instance(TaskFamily task, int level, std::uint64_t master_seed,
                             std::uint64_t index);

// All instances for one spec, in index order. jobs > 1 fans generation out
// across threads; output order and bytes do not depend on the thread count.
std::vector<TaskInstance> sample_dataset(const LevelSpec& spec, std::uint64_t master_seed,
                                         int jobs = 1);

// Deterministic prompt text: task statement, serialized instance, answer
// format instructions and the think/answer tag instruction. Never contains
// the ground-truth serialization.
std::string render_prompt(const TaskInstance& inst);

// Canonical compact-JSON ground truth, e.g. {"status":"sat","assignment":...}.
std::string ground_truth_string(const TaskInstance& inst);

// "deduction-l1-00042"
std::string instance_id(TaskFamily task, int level, std::uint64_t index);

// One dataset record as a single JSONL line (no trailing newline), keys in
// fixed order: id, task, level, seed, prompt, ground_truth, params.
std::string instance_to_record(const TaskInstance& inst, const std::string& id);

struct DatasetRecord {
    std::string id;
    TaskInstance instance;
    std::string prompt;
    std::string ground_truth;
};

// Parses one record line and regenerates the instance from (task, params,
// seed); throws if the stored ground truth disagrees with the regeneration.
DatasetRecord record_from_line(const std::string& line);

std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path);

struct DatasetManifest {
    std::string engine_version;
    std::uint64_t master_seed = 0;
    std::string seed_rule;
    std::vector<LevelSpec> specs;
    std::string sha256; // hex digest of the emitted file bytes

    std::string to_json() const;
};

// Writes one record per line (UTF-8, '\n' separators) plus a sidecar
// manifest at "<path>.manifest.json"; returns the manifest.
DatasetManifest emit_jsonl(std::span<const TaskInstance> instances,
                           std::span<const std::string> ids,
                           const std::filesystem::path& path, std::uint64_t master_seed,
                           std::span<const LevelSpec> specs);

// Sample + emit for a list of specs; records are ordered by (task, level,
// index) with levels ascending within a task.
DatasetManifest generate_dataset(std::span<const LevelSpec> specs,
                                 std::uint64_t master_seed,
                                 const std::filesystem::path& path, int jobs = 1);

struct LevelStats {
    std::uint64_t count = 0;
    // deduction
    std::uint64_t sat_count = 0;
    std::uint64_t unsat_count = 0;
    double mean_decisions = 0.0;
    double mean_unit_propagations = 0.0;
    double mean_brute_force_nodes = 0.0;
    // induction
    double mean_cycle_len = 0.0;
    double mean_mask_count = 0.0;
    // abduction
    double mean_chain_depth = 0.0;
    double mean_distractors = 0.0;
    double mean_tree_edges = 0.0;
};

struct DatasetStats {
    std::uint64_t total_records = 0;
    std::map<std::pair<std::string, int>, LevelStats> per_level; // (task, level)

    std::string to_json() const;
};

// Re-derives search-effort numbers from the stored seeds; a malformed line
// throws with its line number.
DatasetStats dataset_stats(const std::filesystem::path& path);

std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_hex_file(const std::filesystem::path& path);

} // namespace metagym
