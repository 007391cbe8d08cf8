#include "steprl/policy.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace steprl::policy {

namespace {

double dot(const std::vector<double>& w, const StepFeatures& f) {
    double s = 0.0;
    for (int i = 0; i < kStepFeatureCount; ++i) s += w[i] * f[i];
    return s;
}

bool divisible_by_3(long long x) { return x % 3 == 0; }

}  // namespace

StepFeatures step_features(const env::Task& task, const env::ReasoningState& state,
                           long long cand, const RetryContext* retry) {
    const int m = task.difficulty();
    const int depth = state.depth();
    const long long prev = env::prev_value(task, state);
    const long long expected = env::expected_next(task, state);
    const char op = task.operators[depth];

    StepFeatures f{};
    f[0] = 1.0;
    f[1] = static_cast<double>(cand) / 100.0;
    f[2] = static_cast<double>(std::llabs(cand - prev)) / 100.0;
    f[3] = static_cast<double>(depth) / m;
    f[4] = op == '+' ? 1.0 : 0.0;
    f[5] = op == '-' ? 1.0 : 0.0;
    f[6] = op == '*' ? 1.0 : 0.0;
    f[7] = static_cast<double>(env::make_action(cand).length()) / 10.0;
    f[8] = divisible_by_3(cand - expected) ? 1.0 : 0.0;
    if (retry != nullptr) {
        f[9] = 1.0;
        f[10] = static_cast<double>(retry->prev_answer) / 100.0;
        f[11] = retry->attempt_confidence;
        const double same = cand == retry->prev_steps.at(depth) ? 1.0 : 0.0;
        f[12] = same;
        f[13] = same * (2.0 * retry->step_confidences.at(depth) - 1.0);
    }
    return f;
}

EvalFeatures eval_features(const env::Task& task, const env::ReasoningState& state,
                           EvalMode mode) {
    const int m = task.difficulty();
    const int depth = state.depth();
    if (depth < 1) {
        throw std::invalid_argument("eval features need at least one claimed step");
    }
    const long long last = state.claimed.back();
    const long long prev = depth >= 2 ? state.claimed[depth - 2] : task.operands.front();
    const char op = task.operators[depth - 1];

    EvalFeatures e{};
    e[0] = 1.0;
    e[1] = static_cast<double>(depth) / m;
    e[2] = static_cast<double>(last) / 100.0;
    e[3] = static_cast<double>(std::llabs(last - prev)) / 100.0;
    e[4] = op == '+' ? 1.0 : 0.0;
    e[5] = op == '-' ? 1.0 : 0.0;
    e[6] = op == '*' ? 1.0 : 0.0;
    e[7] = static_cast<double>(env::make_action(last).length()) / 10.0;
    double residue_ok = 0.0;
    double exact_ok = 0.0;
    for (int k = 0; k < depth; ++k) {
        const long long before = k > 0 ? state.claimed[k - 1] : task.operands.front();
        const long long expected =
            env::apply_op(task.operators[k], before, task.operands[k + 1]);
        const long long residual = state.claimed[k] - expected;
        if (divisible_by_3(residual)) residue_ok += 1.0;
        if (residual == 0) exact_ok += 1.0;
    }
    e[8] = residue_ok / depth;
    e[9] = exact_ok / depth;
    e[10] = mode == EvalMode::AttemptCheck ? 1.0 : 0.0;
    return e;
}

std::vector<double> softmax(const std::vector<double>& logits) {
    double mx = logits.front();
    for (double z : logits) mx = std::max(mx, z);
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (double& x : p) x /= sum;
    return p;
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::vector<double> step_distribution(const PolicyParams& params, const env::Task& task,
                                      const env::ReasoningState& state,
                                      const std::vector<env::StepAction>& candidates,
                                      const RetryContext* retry) {
    if (candidates.empty()) {
        throw std::invalid_argument("step distribution needs at least one candidate");
    }
    std::vector<double> logits(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        logits[i] = dot(params.step_weights,
                        step_features(task, state, candidates[i].value, retry));
    }
    return softmax(logits);
}

std::vector<double> adjusted_priors(const PolicyParams& params, const env::Task& task,
                                    const env::ReasoningState& state,
                                    const std::vector<env::StepAction>& candidates,
                                    double lambda, const RetryContext* retry) {
    std::vector<double> p = step_distribution(params, task, state, candidates, retry);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        p[i] /= std::pow(static_cast<double>(candidates[i].length()), lambda);
    }
    return p;
}

double self_eval(const PolicyParams& params, const env::Task& task,
                 const env::ReasoningState& state, EvalMode mode) {
    const EvalFeatures e = eval_features(task, state, mode);
    double z = 0.0;
    for (int i = 0; i < kEvalFeatureCount; ++i) z += params.eval_weights[i] * e[i];
    /* sigmoid rounds to an endpoint once |z| is large enough; confidences are
     * contractually inside the open unit interval */
    constexpr double kEdge = 0x1.0p-53;
    return std::min(std::max(sigmoid(z), kEdge), 1.0 - kEdge);
}

LogProbGrad log_prob_grad(const PolicyParams& params, const env::Task& task,
                          const env::ReasoningState& state,
                          const std::vector<env::StepAction>& candidates,
                          int chosen_index, const RetryContext* retry) {
    if (chosen_index < 0 || chosen_index >= static_cast<int>(candidates.size())) {
        throw std::invalid_argument("chosen index out of range");
    }
    std::vector<StepFeatures> feats;
    feats.reserve(candidates.size());
    for (const auto& c : candidates) {
        feats.push_back(step_features(task, state, c.value, retry));
    }
    std::vector<double> logits(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        logits[i] = dot(params.step_weights, feats[i]);
    }
    const std::vector<double> p = softmax(logits);

    LogProbGrad out;
    out.log_prob = std::log(p[chosen_index]);
    out.grad.assign(kStepFeatureCount, 0.0);
    for (int j = 0; j < kStepFeatureCount; ++j) {
        double mean_f = 0.0;
        for (std::size_t i = 0; i < candidates.size(); ++i) mean_f += p[i] * feats[i][j];
        out.grad[j] = feats[chosen_index][j] - mean_f;
    }
    return out;
}

KlGrad kl_divergence(const PolicyParams& params, const PolicyParams& ref,
                     const env::Task& task, const env::ReasoningState& state,
                     const std::vector<env::StepAction>& candidates,
                     const RetryContext* retry) {
    std::vector<StepFeatures> feats;
    feats.reserve(candidates.size());
    for (const auto& c : candidates) {
        feats.push_back(step_features(task, state, c.value, retry));
    }
    std::vector<double> zp(candidates.size());
    std::vector<double> zq(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        zp[i] = dot(params.step_weights, feats[i]);
        zq[i] = dot(ref.step_weights, feats[i]);
    }
    const std::vector<double> p = softmax(zp);
    const std::vector<double> q = softmax(zq);

    KlGrad out;
    out.grad.assign(kStepFeatureCount, 0.0);
    std::vector<double> logdiff(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        logdiff[i] = std::log(p[i]) - std::log(q[i]);
        out.kl += p[i] * logdiff[i];
    }
    for (int j = 0; j < kStepFeatureCount; ++j) {
        double mean_f = 0.0;
        for (std::size_t i = 0; i < candidates.size(); ++i) mean_f += p[i] * feats[i][j];
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            out.grad[j] += p[i] * logdiff[i] * (feats[i][j] - mean_f);
        }
    }
    return out;
}

int argmax_index(const std::vector<double>& xs) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(xs.size()); ++i) {
        if (xs[i] > xs[best]) best = i;
    }
    return best;
}

env::ReasoningState greedy_decode(const PolicyParams& params, const env::Task& task,
                                  int K, const RetryContext* retry) {
    env::ReasoningState state{task.id, {}};
    for (int d = 0; d < task.difficulty() - 1; ++d) {
        const auto cands = env::candidate_actions(task, state, K);
        const auto p = step_distribution(params, task, state, cands, retry);
        state = apply_step(state, cands[argmax_index(p)]);
    }
    return state;
}

bool greedy_solves(const PolicyParams& params, const env::Task& task, int K) {
    const env::ReasoningState out = greedy_decode(params, task, K);
    return terminal_status(task, out) == env::TerminalStatus::CorrectTerminal;
}

double greedy_accuracy(const PolicyParams& params, const std::vector<env::Task>& tasks,
                       int K) {
    if (tasks.empty()) throw std::invalid_argument("empty benchmark");
    int hits = 0;
    for (const auto& t : tasks) hits += greedy_solves(params, t, K) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(tasks.size());
}

}  // namespace steprl::policy
