#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "steprl/env.hpp"

namespace steprl::policy {

inline constexpr int kStepFeatureCount = 14;
inline constexpr int kEvalFeatureCount = 11;

/* Linear-softmax step policy plus a linear-sigmoid self-evaluation head over
 * the same parameter object. */
struct PolicyParams {
    std::vector<double> step_weights;
    std::vector<double> eval_weights;

    PolicyParams()
        : step_weights(kStepFeatureCount, 0.0), eval_weights(kEvalFeatureCount, 0.0) {}
};

enum class EvalMode { StepCheck = 0, AttemptCheck = 1 };

/* Summary of the previous attempt, fed to the policy on a retry turn. */
struct RetryContext {
    std::vector<long long> prev_steps;
    long long prev_answer = 0;
    double attempt_confidence = 0.0;
    std::vector<double> step_confidences;
};

using StepFeatures = std::array<double, kStepFeatureCount>;
using EvalFeatures = std::array<double, kEvalFeatureCount>;

/* Features of taking candidate value `cand` from `state`. Uses only the task
 * statement and the claimed steps, never the oracle chain. `retry` may be
 * null (first attempt). */
StepFeatures step_features(const env::Task& task, const env::ReasoningState& state,
                           long long cand, const RetryContext* retry = nullptr);

/* Features of a claimed prefix for the self-evaluation head. Requires at
 * least one claimed step. */
EvalFeatures eval_features(const env::Task& task, const env::ReasoningState& state,
                           EvalMode mode);

/* Numerically stable softmax over logits (max-subtracted). */
std::vector<double> softmax(const std::vector<double>& logits);

double sigmoid(double x);

/* pi(a | s) over the given candidates. */
std::vector<double> step_distribution(const PolicyParams& params, const env::Task& task,
                                      const env::ReasoningState& state,
                                      const std::vector<env::StepAction>& candidates,
                                      const RetryContext* retry = nullptr);

/* Length-adjusted priors pi(a|s) / |a|^lambda, unnormalized. */
std::vector<double> adjusted_priors(const PolicyParams& params, const env::Task& task,
                                    const env::ReasoningState& state,
                                    const std::vector<env::StepAction>& candidates,
                                    double lambda, const RetryContext* retry = nullptr);

/* sigmoid(eval_weights . eval_features). */
double self_eval(const PolicyParams& params, const env::Task& task,
                 const env::ReasoningState& state, EvalMode mode);

struct LogProbGrad {
    double log_prob = 0.0;
    std::vector<double> grad;  // d log pi(chosen | s) / d step_weights
};

LogProbGrad log_prob_grad(const PolicyParams& params, const env::Task& task,
                          const env::ReasoningState& state,
                          const std::vector<env::StepAction>& candidates,
                          int chosen_index, const RetryContext* retry = nullptr);

struct KlGrad {
    double kl = 0.0;
    std::vector<double> grad;  // d KL(pi_params || pi_ref) / d step_weights
};

/* KL divergence between the two policies' step distributions at one state,
 * with its gradient in the first argument's step weights. */
KlGrad kl_divergence(const PolicyParams& params, const PolicyParams& ref,
                     const env::Task& task, const env::ReasoningState& state,
                     const std::vector<env::StepAction>& candidates,
                     const RetryContext* retry = nullptr);

/* Decode a full solution by picking the highest-probability candidate at each
 * step (lowest index on ties). */
env::ReasoningState greedy_decode(const PolicyParams& params, const env::Task& task,
                                  int K, const RetryContext* retry = nullptr);

bool greedy_solves(const PolicyParams& params, const env::Task& task, int K);

double greedy_accuracy(const PolicyParams& params, const std::vector<env::Task>& tasks,
                       int K);

/* Argmax with lowest-index tie break. */
int argmax_index(const std::vector<double>& xs);

}  // namespace steprl::policy
