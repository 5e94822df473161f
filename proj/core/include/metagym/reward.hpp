#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "metagym/task.hpp"

namespace metagym {

// +1 iff the text is exactly: optional whitespace, one <think>...</think>
// block, whitespace, one <answer>...</answer> block, optional trailing
// whitespace. Tag matching is byte-exact on the lowercase tags. -1 otherwise.
int format_reward(std::string_view text);

// Content of the last complete <answer>...</answer> block, trimmed.
std::optional<std::string> extract_answer(std::string_view text);

// +2 iff the extracted answer parses and verifies correct; -2 for a missing,
// unparseable or wrong answer.
int answer_reward(const TaskInstance& inst, const std::optional<std::string>& extracted);

// 1 iff correct, 0 otherwise; no format term. When the text has no answer
// block the whole (trimmed) text is tried as the answer.
int stage_c_reward(const TaskInstance& inst, std::string_view full_text);

// Group-normalized advantages (r_i - mean) / population_sigma; all zeros
// when sigma < 1e-8. Rejects an empty group.
std::vector<double> normalize_group(std::span<const double> rewards);

// (1/n) * sum_i [ r_i * A_i - beta * kl_i ], A from normalize_group.
double reinforcepp_objective(std::span<const double> rewards,
                             std::span<const double> kl_values, double beta);

// Clipped surrogate, token-mean over all responses:
//   (1/T) sum_{i,t} min(r_{i,t} A_i, clip(r_{i,t}, 1-eps, 1+eps) A_i)
//   - beta * (1/T) sum_{i,t} kl_{i,t}
// ratios and kl_values are ragged per-response token lists of equal shape;
// advantages has one entry per response. eps in (0,1).
double grpo_objective(const std::vector<std::vector<double>>& token_ratios,
                      std::span<const double> advantages,
                      const std::vector<std::vector<double>>& kl_values,
                      double epsilon, double beta);

struct RewardRecord {
    std::string instance_id;
    int format_reward = -1;
    int answer_reward = -2;
    int total = -3;
    double advantage = 0.0;
    int stage_c_reward = 0;
};

RewardRecord score_completion(const TaskInstance& inst, const std::string& instance_id,
                              std::string_view text);

// Streams completion JSONL ({instance_id, task, text} per line), groups
// consecutive records with the same instance_id for advantage normalization,
// and writes one output record per line in input order:
//   {instance_id, format_reward, answer_reward, total, advantage, stage_c_reward}
// `lookup` resolves an instance id; returning nullptr aborts with an error.
// Returns the number of records scored. Malformed input lines throw with the
// line number.
std::size_t score_stream(
    const std::function<const TaskInstance*(const std::string&)>& lookup,
    std::istream& completions, std::ostream& out);

} // namespace metagym
