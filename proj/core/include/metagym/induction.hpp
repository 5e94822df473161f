#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "metagym/verdict.hpp"

namespace metagym {

// Operator alphabet: {+, -, *} x {1..4}, 12 tokens total.
enum class OpKind : std::uint8_t { add = 0, sub = 1, mul = 2 };

struct OpToken {
    OpKind op = OpKind::add;
    int operand = 1; // 1..4

    friend auto operator<=>(const OpToken&, const OpToken&) = default;
};

inline constexpr int kAlphabetSize = 12;

int token_index(OpToken t);          // canonical order: +1,+2,+3,+4,-1,...,*4
OpToken token_from_index(int index); // inverse
std::string token_to_string(OpToken t);  // "+2", "-3", "*4"

struct Rule {
    std::vector<OpToken> cycle; // length k, 1 <= k <= 7

    friend bool operator==(const Rule&, const Rule&) = default;
};

std::string rule_to_string(const Rule& r); // space-joined tokens

// Lexicographic description-length score: shorter cycle, then smaller
// operand sum, then canonical rank of the token list. Lower is better and
// distinct rules never tie.
struct MdlScore {
    std::uint32_t cycle_len = 0;
    std::uint32_t operand_sum = 0;
    std::uint64_t canonical_rank = 0;

    friend auto operator<=>(const MdlScore&, const MdlScore&) = default;
};

MdlScore mdl_score(const Rule& r);

inline constexpr std::int64_t kValueBound = 1'000'000'000;

struct OverflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// element 0 = initial, element t = op_{(t-1) mod k}(element t-1).
// Throws OverflowError when any element leaves [-kValueBound, kValueBound].
std::vector<std::int64_t> apply_rule(std::int64_t initial, const Rule& rule,
                                     std::size_t length);

struct InductionParams {
    int cycle_len = 1;  // k, 1..7
    int mask_count = 1; // m, 1..2
    int level = 1;
    std::uint16_t alphabet_mask = 0xfff; // bit i allows token_from_index(i)
};

using MaskedSequence = std::vector<std::optional<std::int64_t>>;

struct InductionInstance {
    InductionParams params;
    std::uint64_t seed = 0;
    std::int64_t initial_value = 0;
    MaskedSequence visible; // nullopt at masked positions, length 2k+2
    std::vector<std::pair<std::size_t, std::int64_t>> hidden; // (position, value) ascending
    Rule ground_truth_rule;
};

// Deterministic for (params, seed). Mask positions never include index 0.
// Resamples until the description-length-minimal rule consistent with the
// visible entries reproduces the hidden values (budget 1000).
InductionInstance generate_induction(const InductionParams& params, std::uint64_t seed);

struct InduceResult {
    Rule rule;
    std::vector<std::int64_t> fills; // values at masked positions, left to right
};

// Beam search over cycle lengths 1..max_k: extend candidate prefixes token
// by token, prune prefixes inconsistent with the visible values they
// determine, keep the top beam_width by score. Returns the globally
// score-minimal consistent complete rule, or nullopt when none exists.
// A sequence with zero visible values is rejected with std::invalid_argument.
std::optional<InduceResult> induce_rule(const MaskedSequence& visible, int max_k,
                                        int beam_width);

// Exhaustive enumeration of all 12^k rules for k = 1..max_k (max_k <= 4);
// returns the score-minimal consistent rule.
std::optional<Rule> brute_force_induce(const MaskedSequence& visible, int max_k);

// Values the rule forces at the masked positions; nullopt when the rule is
// inconsistent with the visible values or leaves some mask undetermined.
std::optional<std::vector<std::int64_t>> fill_masks(const MaskedSequence& visible,
                                                    const Rule& rule);

Verdict verify_induction(const InductionInstance& inst,
                         std::span<const std::int64_t> predicted);
Verdict verify_induction_text(const InductionInstance& inst, std::string_view text);

// Comma-separated base-10 integers; nullopt when the text does not parse.
std::optional<std::vector<std::int64_t>> parse_induction_answer(std::string_view text);

std::string induction_answer_string(const InductionInstance& inst);

} // namespace metagym
