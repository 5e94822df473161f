#include <benchmark/benchmark.h>

#include "metagym/dataset.hpp"
#include "metagym/reward.hpp"
#include "metagym/rng.hpp"

using namespace metagym;

namespace {

DeductionParams deduction_params(int level) {
    switch (level) {
    case 1: return {6, 3, 2, 1};
    case 2: return {8, 5, 3, 2};
    default: return {10, 6, 4, 3};
    }
}

void BM_GenerateDeduction(benchmark::State& state) {
    const DeductionParams params = deduction_params(static_cast<int>(state.range(0)));
    std::uint64_t seed = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(generate_deduction(params, seed++));
}
BENCHMARK(BM_GenerateDeduction)->Arg(1)->Arg(2)->Arg(3);

void BM_SolveSat(benchmark::State& state) {
    const auto inst =
        generate_deduction(deduction_params(static_cast<int>(state.range(0))), 7);
    const ClauseSet cs = to_cnf_conjunction(inst.formulas, inst.params.n_vars);
    for (auto _ : state) benchmark::DoNotOptimize(solve_sat(cs));
}
BENCHMARK(BM_SolveSat)->Arg(1)->Arg(2)->Arg(3);

void BM_BruteForceSat(benchmark::State& state) {
    const auto inst =
        generate_deduction(deduction_params(static_cast<int>(state.range(0))), 7);
    for (auto _ : state)
        benchmark::DoNotOptimize(brute_force_sat(inst.formulas, inst.params.n_vars));
}
BENCHMARK(BM_BruteForceSat)->Arg(1)->Arg(2)->Arg(3);

void BM_InduceRule(benchmark::State& state) {
    InductionParams params;
    params.cycle_len = static_cast<int>(state.range(0));
    params.mask_count = 1;
    const auto inst = generate_induction(params, 11);
    for (auto _ : state) benchmark::DoNotOptimize(induce_rule(inst.visible, 7, 64));
}
BENCHMARK(BM_InduceRule)->Arg(2)->Arg(4)->Arg(7);

void BM_ProveBackward(benchmark::State& state) {
    const auto inst = generate_abduction({4, 3, 7, 0.2, 3}, 13);
    for (auto _ : state)
        for (AtomId goal : inst.graph.goals)
            benchmark::DoNotOptimize(
                prove_backward(inst.graph, goal, inst.params.chain_depth));
}
BENCHMARK(BM_ProveBackward);

void BM_ScoreCompletion(benchmark::State& state) {
    TaskInstance inst = sample_instance(TaskFamily::deduction, 2, 99, 0);
    std::string text = "<think>steps</think><answer>" + ground_truth_answer(inst) +
                       "</answer>";
    for (auto _ : state)
        benchmark::DoNotOptimize(score_completion(inst, "bench", text));
}
BENCHMARK(BM_ScoreCompletion);

void BM_SampleDataset(benchmark::State& state) {
    LevelSpec spec{TaskFamily::induction, 2, 32};
    for (auto _ : state)
        benchmark::DoNotOptimize(sample_dataset(spec, 5, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_SampleDataset)->Arg(1)->Arg(4);

} // namespace

BENCHMARK_MAIN();
