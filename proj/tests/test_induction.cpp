#include <doctest.h>

#include <cstdint>
#include <cstdlib>

#include "metagym/dataset.hpp"
#include "metagym/induction.hpp"
#include "metagym/rng.hpp"

using namespace metagym;

namespace {

Rule rule_of(std::initializer_list<const char*> tokens) {
    Rule r;
    for (const char* t : tokens) {
        OpKind op = t[0] == '+' ? OpKind::add : t[0] == '-' ? OpKind::sub : OpKind::mul;
        r.cycle.push_back(OpToken{op, t[1] - '0'});
    }
    return r;
}

MaskedSequence seq(std::initializer_list<long long> values) {
    MaskedSequence s;
    for (long long v : values) {
        if (v == INT64_MIN) s.push_back(std::nullopt);
        else s.push_back(static_cast<std::int64_t>(v));
    }
    return s;
}

constexpr long long MASK = INT64_MIN;

} // namespace

TEST_CASE("apply_rule: forced arithmetic") {
    CHECK(apply_rule(1, rule_of({"+2"}), 4) == std::vector<std::int64_t>{1, 3, 5, 7});
    CHECK(apply_rule(1, rule_of({"+2", "*2"}), 7) ==
          std::vector<std::int64_t>{1, 3, 6, 8, 16, 18, 36});
    CHECK(apply_rule(5, rule_of({"*1"}), 3) == std::vector<std::int64_t>{5, 5, 5});
}

TEST_CASE("apply_rule: magnitude overflow raises") {
    CHECK_THROWS_AS(apply_rule(9, rule_of({"*4"}), 20), OverflowError);
}

TEST_CASE("mdl_score: lexicographic order") {
    CHECK(mdl_score(rule_of({"+2"})) < mdl_score(rule_of({"+1", "+1"}))); // length first
    CHECK(mdl_score(rule_of({"+1"})) < mdl_score(rule_of({"+2"})));       // operand sum
    // same length and sum: canonical token order decides, add before mul
    CHECK(mdl_score(rule_of({"+2", "*3"})) < mdl_score(rule_of({"*3", "+2"})));
    CHECK(mdl_score(rule_of({"+2"})) < mdl_score(rule_of({"*2"})));
}

TEST_CASE("token canonical order round-trips") {
    for (int i = 0; i < kAlphabetSize; ++i) CHECK(token_index(token_from_index(i)) == i);
    CHECK(token_to_string(token_from_index(0)) == "+1");
    CHECK(token_to_string(token_from_index(11)) == "*4");
}

TEST_CASE("induce_rule: worked sequences") {
    auto a = induce_rule(seq({2, 4, 6, MASK}), 7, 64);
    REQUIRE(a.has_value());
    CHECK(a->rule == rule_of({"+2"}));
    CHECK(a->fills == std::vector<std::int64_t>{8});

    auto b = induce_rule(seq({1, 3, 6, 8, 16, MASK}), 7, 64);
    REQUIRE(b.has_value());
    CHECK(b->rule == rule_of({"+2", "*2"}));
    CHECK(b->fills == std::vector<std::int64_t>{18});

    auto c = induce_rule(seq({1, MASK, 1}), 7, 64);
    REQUIRE(c.has_value());
    CHECK(c->rule == rule_of({"*1"}));
    CHECK(c->fills == std::vector<std::int64_t>{1});
}

TEST_CASE("induce_rule: FAIL is a value, empty input is an error") {
    CHECK_FALSE(induce_rule(seq({0, 100}), 4, 64).has_value());
    CHECK_THROWS_AS(induce_rule(seq({MASK, MASK}), 4, 64), std::invalid_argument);
}

TEST_CASE("brute_force_induce: degenerate and tie-broken cases") {
    auto single = brute_force_induce(seq({5}), 4);
    REQUIRE(single.has_value());
    CHECK(*single == rule_of({"+1"})); // global description-length minimum

    auto pair = brute_force_induce(seq({2, 4}), 4);
    REQUIRE(pair.has_value());
    CHECK(*pair == rule_of({"+2"})); // beats *2 on canonical order

    CHECK_THROWS_AS(brute_force_induce(seq({2, 4}), 5), std::invalid_argument);
}

TEST_CASE("oracle agreement: beam vs exhaustive enumeration (k <= 4)") {
    // acceptance runs the full 5000-instance sweep
    for (std::uint64_t i = 0; i < 300; ++i) {
        int level = 1 + static_cast<int>(i % 2);
        auto inst = std::get<InductionInstance>(
            sample_instance(TaskFamily::induction, level, 31337, i));
        auto fast = induce_rule(inst.visible, 7, 64);
        auto slow = brute_force_induce(inst.visible, 4);
        REQUIRE(fast.has_value());
        REQUIRE(slow.has_value());
        REQUIRE(fast->rule == *slow);
        REQUIRE(verify_induction(inst, fast->fills).correct());
    }
}

TEST_CASE("beam monotonicity: wider beams never worsen the score") {
    for (std::uint64_t i = 0; i < 80; ++i) {
        auto inst = std::get<InductionInstance>(
            sample_instance(TaskFamily::induction, 2, 555, i));
        std::optional<MdlScore> previous;
        for (int width : {1, 2, 4, 16, 64, 256}) {
            auto r = induce_rule(inst.visible, 7, width);
            if (!r) {
                CHECK_FALSE(previous.has_value());
                continue;
            }
            MdlScore score = mdl_score(r->rule);
            if (previous) CHECK(score <= *previous);
            previous = score;
        }
    }
}

TEST_CASE("generate_induction: determinism and invariants") {
    InductionParams params;
    params.cycle_len = 2;
    params.mask_count = 1;
    InductionInstance a = generate_induction(params, 42);
    InductionInstance b = generate_induction(params, 42);
    CHECK(instance_to_record(TaskInstance{a}, "x") ==
          instance_to_record(TaskInstance{b}, "x"));

    CHECK(a.visible.size() == 2 * 2 + 2);
    CHECK(a.visible[0].has_value()); // index 0 never masked
    // hidden values equal the rule's output at the masked positions
    auto values = apply_rule(a.initial_value, a.ground_truth_rule, a.visible.size());
    for (const auto& [pos, value] : a.hidden) {
        CHECK(values[pos] == value);
        CHECK_FALSE(a.visible[pos].has_value());
    }
    for (std::int64_t v : values) CHECK(std::abs(v) <= kValueBound);
}

TEST_CASE("generate_induction: uniqueness holds against the exhaustive oracle") {
    for (std::uint64_t i = 0; i < 100; ++i) {
        auto inst = std::get<InductionInstance>(
            sample_instance(TaskFamily::induction, 2, 2222, i)); // k in {3,4}
        auto oracle = brute_force_induce(inst.visible, 4);
        REQUIRE(oracle.has_value());
        auto fills = fill_masks(inst.visible, *oracle);
        REQUIRE(fills.has_value());
        REQUIRE(verify_induction(inst, *fills).correct());
    }
}

TEST_CASE("verify_induction: correct, off-by-one, arity") {
    auto inst = std::get<InductionInstance>(
        sample_instance(TaskFamily::induction, 3, 11, 0)); // m may be 2
    std::vector<std::int64_t> good;
    for (const auto& [pos, v] : inst.hidden) good.push_back(v);
    CHECK(verify_induction(inst, good).correct());

    std::vector<std::int64_t> off = good;
    off[0] += 1;
    CHECK(verify_induction(inst, off).status == VerdictStatus::incorrect);

    std::vector<std::int64_t> wrong_arity(good.size() + 1, 0);
    CHECK(verify_induction(inst, wrong_arity).status == VerdictStatus::malformed);
}

TEST_CASE("parse_induction_answer: integer list grammar") {
    auto a = parse_induction_answer(" 3 , -4 ");
    REQUIRE(a.has_value());
    CHECK(*a == std::vector<std::int64_t>{3, -4});
    CHECK_FALSE(parse_induction_answer("abc").has_value());
    CHECK_FALSE(parse_induction_answer("1, ,2").has_value());
    CHECK_FALSE(parse_induction_answer("").has_value());
    CHECK_FALSE(parse_induction_answer("1; 2").has_value());
}

TEST_CASE("ground-truth answer string round-trips through the verifier") {
    for (std::uint64_t i = 0; i < 50; ++i) {
        auto inst = std::get<InductionInstance>(
            sample_instance(TaskFamily::induction, 3, 999, i));
        CHECK(verify_induction_text(inst, induction_answer_string(inst)).correct());
    }
}
