#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "steprl/env.hpp"
#include "steprl/policy.hpp"
#include "steprl/rng.hpp"
#include "steprl/selfcorrect.hpp"

using namespace steprl;

namespace {

policy::PolicyParams random_params(steprl::rng::SplitRng& r, double scale = 1.0) {
    policy::PolicyParams p;
    for (auto& w : p.step_weights) w = (r.uniform01() * 2.0 - 1.0) * scale;
    for (auto& w : p.eval_weights) w = (r.uniform01() * 2.0 - 1.0) * scale;
    return p;
}

selfcorrect::Stage1Config tiny_config() {
    selfcorrect::Stage1Config config;
    config.iterations = 3;
    config.batch_size = 8;
    config.eval_fit_episodes = 40;
    config.eval_fit_iterations = 60;
    return config;
}

}  // namespace

TEST_CASE("an episode holds one attempt per turn, numbered from one") {
    const env::Task t = env::generate_task(7, 3);
    steprl::rng::SplitRng r(1);
    const auto params = random_params(r);
    selfcorrect::Stage1Config config;
    config.retry_turns = 1;

    const auto trace =
        selfcorrect::generate_episode(params, t, config, steprl::rng::SplitRng(5));
    CHECK(trace.task_id == t.id);
    REQUIRE(trace.attempts.size() == 2);
    CHECK(trace.attempts[0].turn_index == 1);
    CHECK(trace.attempts[1].turn_index == 2);
    CHECK(trace.instruction_tags.size() == 1);

    int total = 0;
    for (const auto& attempt : trace.attempts) {
        CHECK(attempt.steps.size() == 2);
        CHECK(attempt.chosen_indices.size() == 2);
        CHECK(attempt.step_log_probs.size() == 2);
        CHECK(attempt.final_answer == attempt.steps.back());
        CHECK((attempt.reward == 0 || attempt.reward == 1));
        CHECK(attempt.reward == env::oracle_reward(attempt.final_answer, t));
        for (double lp : attempt.step_log_probs) CHECK(lp <= 0.0);
        total += attempt.reward;
    }
    CHECK(trace.total_reward == total);
    CHECK(selfcorrect::stage1_objective(trace) == static_cast<double>(total));
}

TEST_CASE("the retry context describes the previous attempt") {
    const env::Task t = env::generate_task(5, 4);
    steprl::rng::SplitRng r(2);
    const auto params = random_params(r);
    selfcorrect::Stage1Config config;
    config.retry_turns = 2;

    const auto trace =
        selfcorrect::generate_episode(params, t, config, steprl::rng::SplitRng(9));
    REQUIRE(trace.attempts.size() == 3);
    CHECK_FALSE(trace.attempts[0].retry.has_value());
    CHECK(trace.instruction_tags.size() == 2);

    for (std::size_t k = 1; k < trace.attempts.size(); ++k) {
        REQUIRE(trace.attempts[k].retry.has_value());
        const auto& retry = *trace.attempts[k].retry;
        const auto& prev = trace.attempts[k - 1];
        CHECK(retry.prev_steps == prev.steps);
        CHECK(retry.prev_answer == prev.final_answer);
        CHECK(retry.step_confidences.size() == prev.steps.size());
        CHECK(retry.attempt_confidence > 0.0);
        CHECK(retry.attempt_confidence < 1.0);
        const env::ReasoningState full{t.id, prev.steps};
        CHECK(retry.attempt_confidence ==
              policy::self_eval(params, t, full, policy::EvalMode::AttemptCheck));
    }
}

TEST_CASE("episodes replay exactly under the same rng") {
    const env::Task t = env::generate_task(11, 3);
    steprl::rng::SplitRng r(3);
    const auto params = random_params(r);
    const selfcorrect::Stage1Config config;

    const auto a =
        selfcorrect::generate_episode(params, t, config, steprl::rng::SplitRng(77));
    const auto b =
        selfcorrect::generate_episode(params, t, config, steprl::rng::SplitRng(77));
    REQUIRE(a.attempts.size() == b.attempts.size());
    for (std::size_t k = 0; k < a.attempts.size(); ++k) {
        CHECK(a.attempts[k].steps == b.attempts[k].steps);
        CHECK(a.attempts[k].step_log_probs == b.attempts[k].step_log_probs);
    }
    CHECK(a.total_reward == b.total_reward);

    const auto c =
        selfcorrect::generate_episode(params, t, config, steprl::rng::SplitRng(78));
    bool same = true;
    for (std::size_t k = 0; k < a.attempts.size() && same; ++k) {
        same = a.attempts[k].steps == c.attempts[k].steps;
    }
    // Different sampling streams should pick different actions somewhere.
    CHECK_FALSE(same);
}

TEST_CASE("a singleton batch under the batch-mean baseline has zero gradient") {
    const env::Task t = env::generate_task(7, 3);
    steprl::rng::SplitRng r(4);
    const auto params = random_params(r);
    selfcorrect::Stage1Config config;
    config.baseline = selfcorrect::Baseline::BatchMean;

    auto trace =
        selfcorrect::generate_episode(params, t, config, steprl::rng::SplitRng(1));
    const std::vector<selfcorrect::TracedEpisode> batch = {{t, trace}};
    const auto rg = selfcorrect::reinforce_kl_grad(params, params, batch, config);
    for (double g : rg.grad) CHECK(std::abs(g) <= 1e-15);
    CHECK(rg.mean_kl == 0.0);

    CHECK_THROWS_AS(selfcorrect::reinforce_kl_grad(params, params, {}, config),
                    std::invalid_argument);
}

TEST_CASE("the batch-mean baseline cancels a constant reward shift") {
    steprl::rng::SplitRng r(5);
    const auto params = random_params(r);
    const auto fix = random_params(r);
    selfcorrect::Stage1Config config;
    config.baseline = selfcorrect::Baseline::BatchMean;

    std::vector<selfcorrect::TracedEpisode> batch;
    for (int i = 0; i < 6; ++i) {
        env::Task t = env::generate_task(100 + i, 2 + i % 3);
        auto trace = selfcorrect::generate_episode(params, t, config,
                                                   steprl::rng::SplitRng(i));
        batch.push_back({std::move(t), std::move(trace)});
    }
    const auto base = selfcorrect::reinforce_kl_grad(params, fix, batch, config);

    auto shifted = batch;
    for (auto& ep : shifted) ep.trace.total_reward += 5;
    const auto moved = selfcorrect::reinforce_kl_grad(params, fix, shifted, config);
    for (int j = 0; j < policy::kStepFeatureCount; ++j) {
        CHECK(moved.grad[j] == doctest::Approx(base.grad[j]).epsilon(1e-12));
    }
    CHECK(moved.mean_kl == base.mean_kl);
}

TEST_CASE("without a baseline the gradient is the reward-weighted score") {
    const env::Task t = env::generate_task(7, 3);
    steprl::rng::SplitRng r(6);
    const auto params = random_params(r);
    selfcorrect::Stage1Config config;
    config.baseline = selfcorrect::Baseline::None;
    config.kl_coefficient = 0.0;

    const auto trace =
        selfcorrect::generate_episode(params, t, config, steprl::rng::SplitRng(2));
    const std::vector<selfcorrect::TracedEpisode> batch = {{t, trace}};
    const auto rg = selfcorrect::reinforce_kl_grad(params, params, batch, config);

    // Replay the trace: the gradient must be total_reward times the summed
    // score function of every sampled step.
    std::vector<double> want(policy::kStepFeatureCount, 0.0);
    for (const auto& attempt : trace.attempts) {
        const policy::RetryContext* rptr =
            attempt.retry ? &*attempt.retry : nullptr;
        env::ReasoningState state{t.id, {}};
        for (std::size_t d = 0; d < attempt.chosen_indices.size(); ++d) {
            const auto cands = env::candidate_actions(t, state, config.K);
            const auto lg = policy::log_prob_grad(params, t, state, cands,
                                                  attempt.chosen_indices[d], rptr);
            for (int j = 0; j < policy::kStepFeatureCount; ++j) {
                want[j] += trace.total_reward * lg.grad[j];
            }
            state = env::apply_step(state, cands[attempt.chosen_indices[d]]);
        }
    }
    for (int j = 0; j < policy::kStepFeatureCount; ++j) {
        CHECK(rg.grad[j] == doctest::Approx(want[j]).epsilon(1e-12));
    }
}

TEST_CASE("the anchor term is linear in the kl coefficient") {
    steprl::rng::SplitRng r(7);
    const auto params = random_params(r);
    const auto fix = random_params(r);
    std::vector<selfcorrect::TracedEpisode> batch;
    selfcorrect::Stage1Config config;
    for (int i = 0; i < 4; ++i) {
        env::Task t = env::generate_task(200 + i, 3);
        auto trace = selfcorrect::generate_episode(params, t, config,
                                                   steprl::rng::SplitRng(i));
        batch.push_back({std::move(t), std::move(trace)});
    }

    auto at = [&](double eta) {
        auto c = config;
        c.kl_coefficient = eta;
        return selfcorrect::reinforce_kl_grad(params, fix, batch, c);
    };
    const auto g0 = at(0.0);
    const auto g1 = at(0.05);
    const auto g2 = at(0.10);
    CHECK(g0.mean_kl == g1.mean_kl);
    CHECK(g0.mean_kl > 0.0);
    for (int j = 0; j < policy::kStepFeatureCount; ++j) {
        const double d1 = g1.grad[j] - g0.grad[j];
        const double d2 = g2.grad[j] - g1.grad[j];
        CHECK(d1 == doctest::Approx(d2).epsilon(1e-12));
    }
}

TEST_CASE("fit_eval_head separates correct from incorrect two-step prefixes") {
    const policy::PolicyParams sampler;  // uniform steps give both classes
    selfcorrect::Stage1Config config;
    config.difficulties = {2};
    config.retry_turns = 0;

    std::vector<selfcorrect::TracedEpisode> episodes;
    steprl::rng::SplitRng stream(8);
    for (int i = 0; i < 60; ++i) {
        env::Task t = env::generate_task(stream.next(), 2);
        auto trace =
            selfcorrect::generate_episode(sampler, t, config, stream.split(i));
        episodes.push_back({std::move(t), std::move(trace)});
    }

    const auto fitted = selfcorrect::fit_eval_head(sampler, episodes, config);
    CHECK(fitted.step_weights == sampler.step_weights);

    for (const auto& ep : episodes) {
        const auto& steps = ep.trace.attempts[0].steps;
        const env::ReasoningState full{ep.task.id, steps};
        const double conf =
            policy::self_eval(fitted, ep.task, full, policy::EvalMode::StepCheck);
        if (steps[0] == ep.task.oracle_chain[0]) {
            CHECK(conf > 0.5);
        } else {
            CHECK(conf < 0.5);
        }
    }
}

TEST_CASE("fit_eval_head rejects single-class data") {
    env::Task t = env::generate_task(7, 3);
    selfcorrect::AttemptRecord attempt;
    attempt.turn_index = 1;
    attempt.steps = {10, 19};  // the oracle chain: every label comes out true
    attempt.final_answer = 19;
    attempt.reward = 1;
    selfcorrect::EpisodeTrace trace;
    trace.task_id = t.id;
    trace.attempts.push_back(attempt);
    trace.total_reward = 1;

    const policy::PolicyParams params;
    const selfcorrect::Stage1Config config;
    CHECK_THROWS_AS(
        selfcorrect::fit_eval_head(params, {{t, trace}}, config),
        std::invalid_argument);
}

TEST_CASE("run_stage1 records one metrics row per iteration") {
    const policy::PolicyParams initial;
    const auto config = tiny_config();

    const auto result = selfcorrect::run_stage1(initial, config, 21);
    REQUIRE(result.iterations.size() == 3);
    CHECK(result.iterations[0].iteration == 0);
    CHECK(result.iterations[2].iteration == 2);

    // The anchor is the initial policy, so the first batch is sampled at the
    // anchor itself and its measured divergence must vanish; once the step
    // weights move it must not.
    CHECK(result.iterations[0].mean_kl == 0.0);
    CHECK(result.iterations[2].mean_kl > 0.0);

    for (const auto& im : result.iterations) {
        CHECK(im.mean_turn1_reward >= 0.0);
        CHECK(im.mean_turn1_reward <= 1.0);
        CHECK(im.mean_turn2_reward >= 0.0);
        CHECK(im.mean_turn2_reward <= 1.0);
    }
    CHECK(result.initial_head_accuracy > 0.5);
    CHECK(result.final_head_accuracy > 0.5);

    const auto again = selfcorrect::run_stage1(initial, config, 21);
    CHECK(again.params.step_weights == result.params.step_weights);
    CHECK(again.params.eval_weights == result.params.eval_weights);
}

TEST_CASE("run_stage1 with zero iterations keeps the step weights") {
    steprl::rng::SplitRng r(9);
    const auto initial = random_params(r, 0.5);
    auto config = tiny_config();
    config.iterations = 0;

    const auto result = selfcorrect::run_stage1(initial, config, 4);
    CHECK(result.iterations.empty());
    CHECK(result.params.step_weights == initial.step_weights);

    config.difficulties.clear();
    CHECK_THROWS_AS(selfcorrect::run_stage1(initial, config, 4),
                    std::invalid_argument);
}

TEST_CASE("turn accuracies with zero weights reduce to plain greedy accuracy") {
    const policy::PolicyParams zeros;
    std::vector<env::Task> tasks;
    for (std::uint64_t i = 0; i < 50; ++i) {
        tasks.push_back(env::generate_task(i, 2 + static_cast<int>(i % 2)));
    }
    const auto [turn1, turn2] = selfcorrect::turn_pair_accuracy(zeros, tasks, 4);
    const double greedy = policy::greedy_accuracy(zeros, tasks, 4);
    CHECK(turn1 == greedy);
    CHECK(turn2 == greedy);

    CHECK_THROWS_AS(selfcorrect::turn_pair_accuracy(zeros, {}, 4),
                    std::invalid_argument);
}
