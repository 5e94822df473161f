#include "metagym/induction.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "metagym/deduction.hpp" // GenerationError
#include "metagym/rng.hpp"

namespace metagym {

int token_index(OpToken t) {
    return static_cast<int>(t.op) * 4 + (t.operand - 1);
}

OpToken token_from_index(int index) {
    if (index < 0 || index >= kAlphabetSize)
        throw std::invalid_argument("token index must be 0..11");
    return OpToken{static_cast<OpKind>(index / 4), index % 4 + 1};
}

std::string token_to_string(OpToken t) {
    char sym = t.op == OpKind::add ? '+' : t.op == OpKind::sub ? '-' : '*';
    return std::string(1, sym) + std::to_string(t.operand);
}

std::string rule_to_string(const Rule& r) {
    std::string out;
    for (std::size_t i = 0; i < r.cycle.size(); ++i) {
        if (i > 0) out += ' ';
        out += token_to_string(r.cycle[i]);
    }
    return out;
}

MdlScore mdl_score(const Rule& r) {
    MdlScore s;
    s.cycle_len = static_cast<std::uint32_t>(r.cycle.size());
    for (OpToken t : r.cycle) {
        s.operand_sum += static_cast<std::uint32_t>(t.operand);
        s.canonical_rank =
            s.canonical_rank * kAlphabetSize + static_cast<std::uint64_t>(token_index(t));
    }
    return s;
}

namespace {

std::optional<std::int64_t> apply_token(OpToken t, std::int64_t v) {
    std::int64_t next;
    switch (t.op) {
    case OpKind::add: next = v + t.operand; break;
    case OpKind::sub: next = v - t.operand; break;
    case OpKind::mul: next = v * t.operand; break;
    default: throw std::logic_error("unreachable");
    }
    if (next > kValueBound || next < -kValueBound) return std::nullopt;
    return next;
}

} // namespace

std::vector<std::int64_t> apply_rule(std::int64_t initial, const Rule& rule,
                                     std::size_t length) {
    if (length < 1) throw std::invalid_argument("length must be >= 1");
    if (rule.cycle.empty()) throw std::invalid_argument("empty rule");
    std::vector<std::int64_t> out;
    out.reserve(length);
    out.push_back(initial);
    for (std::size_t t = 1; t < length; ++t) {
        OpToken op = rule.cycle[(t - 1) % rule.cycle.size()];
        auto next = apply_token(op, out.back());
        if (!next)
            throw OverflowError("sequence value magnitude exceeds 10^9 at position " +
                                std::to_string(t));
        out.push_back(*next);
    }
    return out;
}

namespace {

// Forward value propagation: walks the sequence left to right, deriving
// values through masks wherever the (partial) rule determines the step, and
// checks every determined value against the visible entry. Prefixes shorter
// than k leave later cycle slots undetermined.
bool consistent_prefix(const MaskedSequence& visible, std::span<const OpToken> prefix,
                       std::size_t k, std::vector<std::int64_t>* derived_out) {
    std::vector<std::optional<std::int64_t>> known(visible.begin(), visible.end());
    for (std::size_t t = 1; t < known.size(); ++t) {
        std::size_t slot = (t - 1) % k;
        if (slot >= prefix.size()) continue; // step not yet determined
        if (!known[t - 1]) continue;         // nothing to anchor on
        auto v = apply_token(prefix[slot], *known[t - 1]);
        if (!v) return false; // magnitude bound; no instance sequence goes there
        if (known[t]) {
            if (*known[t] != *v) return false;
        } else {
            known[t] = *v;
        }
    }
    if (derived_out) {
        derived_out->clear();
        for (std::size_t t = 0; t < visible.size(); ++t) {
            if (visible[t]) continue;
            if (!known[t]) return false; // rule leaves a mask undetermined
            derived_out->push_back(*known[t]);
        }
    }
    return true;
}

std::size_t count_visible(const MaskedSequence& v) {
    return static_cast<std::size_t>(
        std::count_if(v.begin(), v.end(), [](const auto& o) { return o.has_value(); }));
}

struct BeamEntry {
    std::vector<OpToken> prefix;
    std::uint32_t operand_sum = 0;
    std::uint64_t rank = 0;
};

} // namespace

std::optional<std::vector<std::int64_t>> fill_masks(const MaskedSequence& visible,
                                                    const Rule& rule) {
    if (rule.cycle.empty()) throw std::invalid_argument("empty rule");
    std::vector<std::int64_t> fills;
    if (!consistent_prefix(visible, rule.cycle, rule.cycle.size(), &fills))
        return std::nullopt;
    return fills;
}

std::optional<InduceResult> induce_rule(const MaskedSequence& visible, int max_k,
                                        int beam_width) {
    if (max_k < 1 || max_k > 7) throw std::invalid_argument("max_k must be 1..7");
    if (beam_width < 1) throw std::invalid_argument("beam_width must be >= 1");
    if (count_visible(visible) == 0)
        throw std::invalid_argument("sequence has no visible values");

    for (int k = 1; k <= max_k; ++k) {
        std::vector<BeamEntry> beam{BeamEntry{}};
        for (int t = 0; t < k && !beam.empty(); ++t) {
            std::vector<BeamEntry> extended;
            extended.reserve(beam.size() * kAlphabetSize);
            for (const BeamEntry& e : beam) {
                for (int idx = 0; idx < kAlphabetSize; ++idx) {
                    OpToken tok = token_from_index(idx);
                    BeamEntry next;
                    next.prefix = e.prefix;
                    next.prefix.push_back(tok);
                    if (!consistent_prefix(visible, next.prefix,
                                           static_cast<std::size_t>(k), nullptr))
                        continue;
                    next.operand_sum = e.operand_sum + static_cast<std::uint32_t>(tok.operand);
                    next.rank = e.rank * kAlphabetSize + static_cast<std::uint64_t>(idx);
                    extended.push_back(std::move(next));
                }
            }
            auto by_score = [](const BeamEntry& a, const BeamEntry& b) {
                return std::tie(a.operand_sum, a.rank) < std::tie(b.operand_sum, b.rank);
            };
            if (extended.size() > static_cast<std::size_t>(beam_width)) {
                std::nth_element(extended.begin(),
                                 extended.begin() + beam_width, extended.end(), by_score);
                extended.resize(static_cast<std::size_t>(beam_width));
            }
            std::sort(extended.begin(), extended.end(), by_score);
            beam = std::move(extended);
        }

        // complete consistent rules of length k; pick the best able to fill
        // every mask
        for (const BeamEntry& e : beam) {
            Rule rule{e.prefix};
            std::vector<std::int64_t> fills;
            if (!consistent_prefix(visible, rule.cycle, static_cast<std::size_t>(k),
                                   &fills))
                continue;
            return InduceResult{std::move(rule), std::move(fills)};
        }
    }
    return std::nullopt;
}

std::optional<Rule> brute_force_induce(const MaskedSequence& visible, int max_k) {
    if (max_k < 1 || max_k > 4)
        throw std::invalid_argument("brute_force_induce supports max_k <= 4");
    if (count_visible(visible) == 0)
        throw std::invalid_argument("sequence has no visible values");

    for (int k = 1; k <= max_k; ++k) {
        std::uint64_t total = 1;
        for (int i = 0; i < k; ++i) total *= kAlphabetSize;

        std::optional<Rule> best;
        MdlScore best_score{};
        for (std::uint64_t rank = 0; rank < total; ++rank) {
            Rule rule;
            rule.cycle.resize(static_cast<std::size_t>(k));
            std::uint64_t r = rank;
            for (int i = k - 1; i >= 0; --i) {
                rule.cycle[static_cast<std::size_t>(i)] =
                    token_from_index(static_cast<int>(r % kAlphabetSize));
                r /= kAlphabetSize;
            }
            std::vector<std::int64_t> fills;
            if (!consistent_prefix(visible, rule.cycle, static_cast<std::size_t>(k),
                                   &fills))
                continue;
            MdlScore score = mdl_score(rule);
            if (!best || score < best_score) {
                best = std::move(rule);
                best_score = score;
            }
        }
        if (best) return best;
    }
    return std::nullopt;
}

namespace {

void check_params(const InductionParams& p) {
    if (p.cycle_len < 1 || p.cycle_len > 7)
        throw std::invalid_argument("cycle_len must be 1..7");
    if (p.mask_count < 1 || p.mask_count > 2)
        throw std::invalid_argument("mask_count must be 1..2");
    if ((p.alphabet_mask & 0xfff) == 0)
        throw std::invalid_argument("alphabet must allow at least one token");
}

} // namespace

InductionInstance generate_induction(const InductionParams& params, std::uint64_t seed) {
    check_params(params);
    Rng rng(seed);

    std::vector<OpToken> allowed;
    for (int i = 0; i < kAlphabetSize; ++i)
        if (params.alphabet_mask & (1u << i)) allowed.push_back(token_from_index(i));

    const std::size_t length = 2 * static_cast<std::size_t>(params.cycle_len) + 2;

    for (int attempt = 0; attempt < 1000; ++attempt) {
        Rule rule;
        for (int i = 0; i < params.cycle_len; ++i)
            rule.cycle.push_back(allowed[rng.below(allowed.size())]);
        std::int64_t initial = rng.range(-9, 9);

        std::vector<std::int64_t> values;
        try {
            values = apply_rule(initial, rule, length);
        } catch (const OverflowError&) {
            continue;
        }

        // masks: mask_count distinct positions, never index 0
        std::vector<std::size_t> masks;
        while (masks.size() < static_cast<std::size_t>(params.mask_count)) {
            std::size_t pos = 1 + static_cast<std::size_t>(rng.below(length - 1));
            if (std::find(masks.begin(), masks.end(), pos) == masks.end())
                masks.push_back(pos);
        }
        std::sort(masks.begin(), masks.end());

        MaskedSequence visible(length);
        for (std::size_t t = 0; t < length; ++t) visible[t] = values[t];
        std::vector<std::pair<std::size_t, std::int64_t>> hidden;
        for (std::size_t pos : masks) {
            visible[pos] = std::nullopt;
            hidden.emplace_back(pos, values[pos]);
        }

        // uniqueness of answer: the minimal consistent rule must reproduce
        // the hidden values (the rule itself may be shorter than the truth)
        auto induced = induce_rule(visible, 7, 64);
        if (!induced) continue;
        bool match = induced->fills.size() == hidden.size();
        for (std::size_t i = 0; match && i < hidden.size(); ++i)
            match = induced->fills[i] == hidden[i].second;
        if (!match) continue;

        InductionInstance inst;
        inst.params = params;
        inst.seed = seed;
        inst.initial_value = initial;
        inst.visible = std::move(visible);
        inst.hidden = std::move(hidden);
        inst.ground_truth_rule = std::move(rule);
        return inst;
    }
    throw GenerationError(
        "induction generation: no unique-answer instance after 1000 attempts (k=" +
        std::to_string(params.cycle_len) + ", m=" + std::to_string(params.mask_count) +
        ")");
}

Verdict verify_induction(const InductionInstance& inst,
                         std::span<const std::int64_t> predicted) {
    if (predicted.size() != inst.hidden.size())
        return Verdict::bad_answer("expected " + std::to_string(inst.hidden.size()) +
                                   " value(s), got " + std::to_string(predicted.size()));
    for (std::size_t i = 0; i < inst.hidden.size(); ++i)
        if (predicted[i] != inst.hidden[i].second)
            return Verdict::wrong("value at masked position " +
                                  std::to_string(inst.hidden[i].first) + " is wrong");
    return Verdict::ok();
}

std::optional<std::vector<std::int64_t>> parse_induction_answer(std::string_view text) {
    std::vector<std::int64_t> out;
    std::size_t start = 0;
    bool any = false;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        std::string_view item = text.substr(
            start, comma == std::string_view::npos ? text.size() - start : comma - start);
        while (!item.empty() && std::isspace(static_cast<unsigned char>(item.front())))
            item.remove_prefix(1);
        while (!item.empty() && std::isspace(static_cast<unsigned char>(item.back())))
            item.remove_suffix(1);
        if (item.empty()) return std::nullopt;

        std::int64_t value = 0;
        auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
        if (ec != std::errc() || ptr != item.data() + item.size()) return std::nullopt;
        out.push_back(value);
        any = true;
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    if (!any) return std::nullopt;
    return out;
}

Verdict verify_induction_text(const InductionInstance& inst, std::string_view text) {
    auto parsed = parse_induction_answer(text);
    if (!parsed)
        return Verdict::bad_answer("answer is not a comma-separated integer list");
    return verify_induction(inst, *parsed);
}

std::string induction_answer_string(const InductionInstance& inst) {
    std::string out;
    for (std::size_t i = 0; i < inst.hidden.size(); ++i) {
        if (i > 0) out += ", ";
        out += std::to_string(inst.hidden[i].second);
    }
    return out;
}

} // namespace metagym
