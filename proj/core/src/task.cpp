#include "metagym/task.hpp"

namespace metagym {

std::string_view task_name(TaskFamily t) {
    switch (t) {
    case TaskFamily::deduction: return "deduction";
    case TaskFamily::induction: return "induction";
    case TaskFamily::abduction: return "abduction";
    }
    return "?";
}

std::optional<TaskFamily> task_from_name(std::string_view name) {
    if (name == "deduction") return TaskFamily::deduction;
    if (name == "induction") return TaskFamily::induction;
    if (name == "abduction") return TaskFamily::abduction;
    return std::nullopt;
}

TaskFamily family_of(const TaskInstance& inst) {
    return static_cast<TaskFamily>(inst.index());
}

int level_of(const TaskInstance& inst) {
    return std::visit([](const auto& i) { return i.params.level; }, inst);
}

std::uint64_t seed_of(const TaskInstance& inst) {
    return std::visit([](const auto& i) { return i.seed; }, inst);
}

Verdict verify_answer_text(const TaskInstance& inst, std::string_view answer_text) {
    return std::visit(
        [&](const auto& i) -> Verdict {
            using T = std::decay_t<decltype(i)>;
            if constexpr (std::is_same_v<T, DeductionInstance>)
                return verify_deduction_text(i, answer_text);
            else if constexpr (std::is_same_v<T, InductionInstance>)
                return verify_induction_text(i, answer_text);
            else
                return verify_abduction_text(i, answer_text);
        },
        inst);
}

std::string ground_truth_answer(const TaskInstance& inst) {
    return std::visit(
        [](const auto& i) -> std::string {
            using T = std::decay_t<decltype(i)>;
            if constexpr (std::is_same_v<T, DeductionInstance>)
                return deduction_answer_string(i);
            else if constexpr (std::is_same_v<T, InductionInstance>)
                return induction_answer_string(i);
            else
                return abduction_answer_string(i);
        },
        inst);
}

} // namespace metagym
