#pragma once

#include <string>

namespace metagym {

// Outcome of checking a candidate answer against an instance. `malformed`
// means the answer did not even parse against the task's answer grammar and
// is kept distinct from a well-formed but wrong answer.
enum class VerdictStatus { correct, incorrect, malformed };

struct Verdict {
    VerdictStatus status = VerdictStatus::incorrect;
    std::string detail;

    bool correct() const { return status == VerdictStatus::correct; }

    static Verdict ok() { return {VerdictStatus::correct, ""}; }
    static Verdict wrong(std::string detail) {
        return {VerdictStatus::incorrect, std::move(detail)};
    }
    static Verdict bad_answer(std::string detail) {
        return {VerdictStatus::malformed, std::move(detail)};
    }
};

} // namespace metagym
