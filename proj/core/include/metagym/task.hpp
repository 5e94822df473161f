#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>

#include "metagym/abduction.hpp"
#include "metagym/deduction.hpp"
#include "metagym/induction.hpp"

namespace metagym {

enum class TaskFamily : std::uint8_t { deduction = 0, induction = 1, abduction = 2 };

inline constexpr TaskFamily kAllTasks[] = {TaskFamily::deduction, TaskFamily::induction,
                                           TaskFamily::abduction};

std::string_view task_name(TaskFamily t);
std::optional<TaskFamily> task_from_name(std::string_view name);

using TaskInstance = std::variant<DeductionInstance, InductionInstance, AbductionInstance>;

TaskFamily family_of(const TaskInstance& inst);
int level_of(const TaskInstance& inst);
std::uint64_t seed_of(const TaskInstance& inst);

// Dispatches to the task's text verifier.
Verdict verify_answer_text(const TaskInstance& inst, std::string_view answer_text);

// Canonical answer for the stored ground truth, in the task's answer grammar.
std::string ground_truth_answer(const TaskInstance& inst);

} // namespace metagym
