#include "metagym/reward.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace metagym {

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

std::vector<std::size_t> find_all(std::string_view text, std::string_view needle) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string_view::npos) {
        out.push_back(pos);
        pos += needle.size();
    }
    return out;
}

bool all_whitespace(std::string_view s) {
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

} // namespace

int format_reward(std::string_view text) {
    auto think_open = find_all(text, kThinkOpen);
    auto think_close = find_all(text, kThinkClose);
    auto answer_open = find_all(text, kAnswerOpen);
    auto answer_close = find_all(text, kAnswerClose);

    if (think_open.size() != 1 || think_close.size() != 1 || answer_open.size() != 1 ||
        answer_close.size() != 1)
        return -1;

    std::size_t to = think_open[0], tc = think_close[0];
    std::size_t ao = answer_open[0], ac = answer_close[0];
    if (!(to < tc && tc < ao && ao < ac)) return -1;
    if (!all_whitespace(text.substr(0, to))) return -1;
    if (!all_whitespace(text.substr(tc + kThinkClose.size(),
                                    ao - (tc + kThinkClose.size()))))
        return -1;
    if (!all_whitespace(text.substr(ac + kAnswerClose.size()))) return -1;
    return 1;
}

std::optional<std::string> extract_answer(std::string_view text) {
    std::optional<std::string> last;
    std::size_t pos = 0;
    for (;;) {
        std::size_t open = text.find(kAnswerOpen, pos);
        if (open == std::string_view::npos) break;
        std::size_t body = open + kAnswerOpen.size();
        std::size_t close = text.find(kAnswerClose, body);
        if (close == std::string_view::npos) break;
        last = std::string(trim(text.substr(body, close - body)));
        pos = close + kAnswerClose.size();
    }
    return last;
}

int answer_reward(const TaskInstance& inst, const std::optional<std::string>& extracted) {
    if (!extracted) return -2;
    return verify_answer_text(inst, *extracted).correct() ? 2 : -2;
}

int stage_c_reward(const TaskInstance& inst, std::string_view full_text) {
    auto extracted = extract_answer(full_text);
    std::string candidate = extracted ? *extracted : std::string(trim(full_text));
    return verify_answer_text(inst, candidate).correct() ? 1 : 0;
}

std::vector<double> normalize_group(std::span<const double> rewards) {
    if (rewards.empty()) throw std::invalid_argument("empty reward group");
    const double n = static_cast<double>(rewards.size());
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= n;
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    var /= n; // population variance
    double sigma = std::sqrt(var);

    std::vector<double> out(rewards.size(), 0.0);
    if (sigma < 1e-8) return out; // degenerate group
    for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / sigma;
    return out;
}

double reinforcepp_objective(std::span<const double> rewards,
                             std::span<const double> kl_values, double beta) {
    if (rewards.size() != kl_values.size())
        throw std::invalid_argument("rewards and kl_values must have equal length");
    if (beta < 0.0) throw std::invalid_argument("beta must be >= 0");
    std::vector<double> adv = normalize_group(rewards);
    double sum = 0.0;
    for (std::size_t i = 0; i < rewards.size(); ++i)
        sum += rewards[i] * adv[i] - beta * kl_values[i];
    return sum / static_cast<double>(rewards.size());
}

double grpo_objective(const std::vector<std::vector<double>>& token_ratios,
                      std::span<const double> advantages,
                      const std::vector<std::vector<double>>& kl_values,
                      double epsilon, double beta) {
    if (epsilon <= 0.0 || epsilon >= 1.0)
        throw std::invalid_argument("epsilon must be in (0,1)");
    if (token_ratios.size() != advantages.size() || token_ratios.size() != kl_values.size())
        throw std::invalid_argument("response count mismatch");

    double surrogate = 0.0, kl_sum = 0.0;
    std::size_t tokens = 0;
    for (std::size_t i = 0; i < token_ratios.size(); ++i) {
        if (token_ratios[i].size() != kl_values[i].size())
            throw std::invalid_argument("token count mismatch in response " +
                                        std::to_string(i));
        for (std::size_t t = 0; t < token_ratios[i].size(); ++t) {
            double r = token_ratios[i][t];
            double clipped = std::clamp(r, 1.0 - epsilon, 1.0 + epsilon);
            surrogate += std::min(r * advantages[i], clipped * advantages[i]);
            kl_sum += kl_values[i][t];
            ++tokens;
        }
    }
    if (tokens == 0) throw std::invalid_argument("no tokens");
    return surrogate / static_cast<double>(tokens) -
           beta * (kl_sum / static_cast<double>(tokens));
}

RewardRecord score_completion(const TaskInstance& inst, const std::string& instance_id,
                              std::string_view text) {
    RewardRecord rec;
    rec.instance_id = instance_id;
    rec.format_reward = format_reward(text);
    rec.answer_reward = answer_reward(inst, extract_answer(text));
    rec.total = rec.format_reward + rec.answer_reward;
    rec.stage_c_reward = stage_c_reward(inst, text);
    return rec;
}

namespace {

void flush_group(std::vector<RewardRecord>& group, std::ostream& out) {
    if (group.empty()) return;
    std::vector<double> totals;
    totals.reserve(group.size());
    for (const RewardRecord& r : group) totals.push_back(static_cast<double>(r.total));
    std::vector<double> adv = normalize_group(totals);
    for (std::size_t i = 0; i < group.size(); ++i) {
        group[i].advantage = adv[i];
        nlohmann::ordered_json j;
        j["instance_id"] = group[i].instance_id;
        j["format_reward"] = group[i].format_reward;
        j["answer_reward"] = group[i].answer_reward;
        j["total"] = group[i].total;
        j["advantage"] = group[i].advantage;
        j["stage_c_reward"] = group[i].stage_c_reward;
        out << j.dump() << '\n';
    }
    group.clear();
}

} // namespace

std::size_t score_stream(
    const std::function<const TaskInstance*(const std::string&)>& lookup,
    std::istream& completions, std::ostream& out) {
    std::string line;
    std::size_t line_no = 0, scored = 0;
    std::vector<RewardRecord> group; // consecutive records sharing instance_id
    std::string group_id;

    while (std::getline(completions, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("completions line " + std::to_string(line_no) +
                                     ": " + e.what());
        }
        if (!j.contains("instance_id") || !j.contains("text"))
            throw std::runtime_error("completions line " + std::to_string(line_no) +
                                     ": missing instance_id or text");
        std::string id = j["instance_id"].get<std::string>();
        std::string text = j["text"].get<std::string>();

        const TaskInstance* inst = lookup(id);
        if (!inst)
            throw std::runtime_error("completions line " + std::to_string(line_no) +
                                     ": unknown instance id '" + id + "'");

        if (id != group_id) {
            flush_group(group, out);
            group_id = id;
        }
        group.push_back(score_completion(*inst, id, text));
        ++scored;
    }
    flush_group(group, out);
    return scored;
}

} // namespace metagym
