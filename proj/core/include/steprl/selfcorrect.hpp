#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "steprl/env.hpp"
#include "steprl/policy.hpp"
#include "steprl/rng.hpp"

namespace steprl::selfcorrect {

enum class Baseline { BatchMean, None };

struct Stage1Config {
    int retry_turns = 1;  // attempts beyond the first
    double kl_coefficient = 0.05;
    double learning_rate = 0.05;
    int iterations = 200;
    int batch_size = 32;
    Baseline baseline = Baseline::BatchMean;
    int K = 4;
    std::vector<int> difficulties = {2, 3};
    int eval_fit_episodes = 300;
    int eval_fit_iterations = 500;
    double eval_fit_learning_rate = 0.5;
};

struct AttemptRecord {
    int turn_index = 0;  // 1-based: first attempt is 1, last is retry_turns + 1
    std::vector<long long> steps;
    std::vector<int> chosen_indices;
    std::vector<double> step_log_probs;
    long long final_answer = 0;
    int reward = 0;  // 1 when the final answer matches the oracle, else 0
    /* The retry summary this attempt was conditioned on; empty on the first turn.
     * Stored so gradient recomputation sees exactly what sampling saw. */
    std::optional<policy::RetryContext> retry;
};

struct EpisodeTrace {
    std::uint64_t task_id = 0;
    std::vector<AttemptRecord> attempts;
    std::vector<int> instruction_tags;  // one entry per retry turn
    int total_reward = 0;
};

/* An episode together with the task it was sampled on. */
struct TracedEpisode {
    env::Task task;
    EpisodeTrace trace;
};

/* Sample a (1 + retry_turns)-attempt episode. Between attempts the policy's
 * own evaluation head produces the attempt confidence and per-prefix step
 * confidences that parameterize the next attempt's retry context. */
EpisodeTrace generate_episode(const policy::PolicyParams& params, const env::Task& task,
                              const Stage1Config& config, rng::SplitRng episode_rng);

/* Undiscounted sum of attempt rewards. */
double stage1_objective(const EpisodeTrace& trace);

struct ReinforceGrad {
    std::vector<double> grad;  // ascent direction for step_weights
    double mean_kl = 0.0;      // mean KL(params || fix_params) over visited states
};

/* Batch REINFORCE gradient with baseline, minus kl_coefficient times the mean
 * KL gradient over every state visited in the batch. */
ReinforceGrad reinforce_kl_grad(const policy::PolicyParams& params,
                                const policy::PolicyParams& fix_params,
                                const std::vector<TracedEpisode>& batch,
                                const Stage1Config& config);

/* Refit eval_weights by class-balanced logistic regression on self-generated
 * episodes: one labeled row per claimed prefix (label: prefix matches the
 * oracle chain) and one per finished attempt (label: attempt reward).
 * step_weights pass through untouched. Throws std::invalid_argument when the
 * labels are single-class. */
policy::PolicyParams fit_eval_head(const policy::PolicyParams& params,
                                   const std::vector<TracedEpisode>& episodes,
                                   const Stage1Config& config);

struct IterationMetrics {
    int iteration = 0;
    double mean_turn1_reward = 0.0;
    double mean_turn2_reward = 0.0;
    double mean_kl = 0.0;
};

struct Stage1Result {
    policy::PolicyParams params;
    std::vector<IterationMetrics> iterations;
    double initial_head_accuracy = 0.0;
    double final_head_accuracy = 0.0;
};

/* Self-correction training: fit the evaluation head from episodes of the
 * initial policy, run `iterations` REINFORCE updates against the frozen
 * initial policy's KL anchor, then finish with a fresh eval-head fit from the
 * trained policy. iterations = 0 leaves step weights exactly at their initial
 * values. */
Stage1Result run_stage1(const policy::PolicyParams& initial_params,
                        const Stage1Config& config, std::uint64_t task_seed);

/* Greedy accuracy of turn 1, and of turn 2 after a retry conditioned on the
 * evaluation head's confidences. */
std::pair<double, double> turn_pair_accuracy(const policy::PolicyParams& params,
                                             const std::vector<env::Task>& tasks,
                                             int K);

}  // namespace steprl::selfcorrect
