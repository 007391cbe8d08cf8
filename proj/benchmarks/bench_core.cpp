#include <benchmark/benchmark.h>

#include <cstdint>

#include "steprl/checkpoint.hpp"
#include "steprl/env.hpp"
#include "steprl/policy.hpp"
#include "steprl/prefopt.hpp"
#include "steprl/rng.hpp"
#include "steprl/search.hpp"
#include "steprl/selfcorrect.hpp"

namespace {

using namespace steprl;

policy::PolicyParams bench_params() {
    policy::PolicyParams p;
    rng::SplitRng r(1234);
    for (auto& w : p.step_weights) w = r.uniform01() - 0.5;
    for (auto& w : p.eval_weights) w = r.uniform01() - 0.5;
    return p;
}

void BM_GenerateTask(benchmark::State& state) {
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(env::generate_task(seed++, 4));
    }
}
BENCHMARK(BM_GenerateTask);

void BM_CandidateActions(benchmark::State& state) {
    const env::Task task = env::generate_task(7, 4);
    const env::ReasoningState root{task.id, {}};
    for (auto _ : state) {
        benchmark::DoNotOptimize(env::candidate_actions(task, root, 4));
    }
}
BENCHMARK(BM_CandidateActions);

void BM_StepDistribution(benchmark::State& state) {
    const env::Task task = env::generate_task(7, 4);
    const env::ReasoningState root{task.id, {}};
    const auto params = bench_params();
    const auto cands = env::candidate_actions(task, root, 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(policy::step_distribution(params, task, root, cands));
    }
}
BENCHMARK(BM_StepDistribution);

void BM_SelfEval(benchmark::State& state) {
    const env::Task task = env::generate_task(7, 4);
    const env::ReasoningState prefix{task.id, {10}};
    const auto params = bench_params();
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            policy::self_eval(params, task, prefix, policy::EvalMode::StepCheck));
    }
}
BENCHMARK(BM_SelfEval);

void BM_RunSearch(benchmark::State& state) {
    const auto params = bench_params();
    const policy::PolicyParams stage1;
    search::SearchConfig config;
    config.budget = static_cast<int>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) {
        const env::Task task = env::generate_task(seed, 3);
        benchmark::DoNotOptimize(search::run_search(task, {task.id, {}}, params,
                                                    stage1, config, seed));
        ++seed;
    }
}
BENCHMARK(BM_RunSearch)->Arg(16)->Arg(64)->Arg(256);

void BM_ExtractPairs(benchmark::State& state) {
    const auto params = bench_params();
    const policy::PolicyParams stage1;
    const search::SearchConfig config;
    const env::Task task = env::generate_task(7, 4);
    const auto tree =
        search::run_search(task, {task.id, {}}, params, stage1, config, 7);
    const prefopt::DpoConfig dpo;
    for (auto _ : state) {
        benchmark::DoNotOptimize(prefopt::extract_pairs(tree, dpo));
    }
}
BENCHMARK(BM_ExtractPairs);

void BM_DpoLossGrad(benchmark::State& state) {
    const auto params = bench_params();
    const policy::PolicyParams ref;
    const env::Task task = env::generate_task(7, 3);
    const auto cands = env::candidate_actions(task, {task.id, {}}, 4);
    prefopt::PreferencePair pair;
    pair.task_id = task.id;
    pair.chosen = cands[0].value;
    pair.rejected = cands[1].value;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            prefopt::dpo_loss_grad(params, ref, pair, task, 4, 0.1));
    }
}
BENCHMARK(BM_DpoLossGrad);

void BM_GenerateEpisode(benchmark::State& state) {
    const auto params = bench_params();
    selfcorrect::Stage1Config config;
    rng::SplitRng root(99);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        const env::Task task = env::generate_task(seed, 3);
        benchmark::DoNotOptimize(
            selfcorrect::generate_episode(params, task, config, root.split(seed)));
        ++seed;
    }
}
BENCHMARK(BM_GenerateEpisode);

void BM_CheckpointRoundTrip(benchmark::State& state) {
    const auto params = bench_params();
    for (auto _ : state) {
        const auto bytes = iolayer::serialize_checkpoint(params, "bench", 42);
        benchmark::DoNotOptimize(iolayer::parse_checkpoint(bytes));
    }
}
BENCHMARK(BM_CheckpointRoundTrip);

}  // namespace

BENCHMARK_MAIN();
