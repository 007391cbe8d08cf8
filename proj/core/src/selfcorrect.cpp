#include "steprl/selfcorrect.hpp"

#include <cmath>
#include <stdexcept>

namespace steprl::selfcorrect {

namespace {

policy::RetryContext retry_from_attempt(const policy::PolicyParams& params,
                                        const env::Task& task,
                                        const std::vector<long long>& steps) {
    policy::RetryContext retry;
    retry.prev_steps = steps;
    retry.prev_answer = steps.back();
    const env::ReasoningState full{task.id, steps};
    retry.attempt_confidence =
        policy::self_eval(params, task, full, policy::EvalMode::AttemptCheck);
    retry.step_confidences.reserve(steps.size());
    for (std::size_t d = 0; d < steps.size(); ++d) {
        const env::ReasoningState prefix{
            task.id, std::vector<long long>(steps.begin(), steps.begin() + d + 1)};
        retry.step_confidences.push_back(
            policy::self_eval(params, task, prefix, policy::EvalMode::StepCheck));
    }
    return retry;
}

int sample_index(const std::vector<double>& p, double u) {
    int i = static_cast<int>(p.size()) - 1;
    double acc = 0.0;
    for (int j = 0; j < static_cast<int>(p.size()); ++j) {
        acc += p[j];
        if (u < acc) {
            i = j;
            break;
        }
    }
    return i;
}

struct VisitedState {
    const env::Task* task;
    env::ReasoningState state;
    const policy::RetryContext* retry;
};

struct EvalFitData {
    std::vector<policy::EvalFeatures> rows;
    std::vector<double> labels;
};

EvalFitData collect_eval_fit_data(const std::vector<TracedEpisode>& episodes) {
    EvalFitData data;
    for (const auto& ep : episodes) {
        for (const auto& attempt : ep.trace.attempts) {
            const auto& steps = attempt.steps;
            env::ReasoningState prefix{ep.task.id, {}};
            bool consistent = true;
            for (std::size_t d = 0; d < steps.size(); ++d) {
                prefix.claimed.push_back(steps[d]);
                consistent = consistent && steps[d] == ep.task.oracle_chain[d];
                data.rows.push_back(
                    policy::eval_features(ep.task, prefix, policy::EvalMode::StepCheck));
                data.labels.push_back(consistent ? 1.0 : 0.0);
            }
            data.rows.push_back(
                policy::eval_features(ep.task, prefix, policy::EvalMode::AttemptCheck));
            data.labels.push_back(static_cast<double>(attempt.reward));
        }
    }
    return data;
}

struct FittedHead {
    std::vector<double> weights;
    double train_accuracy = 0.0;
};

FittedHead fit_head(const EvalFitData& data, const Stage1Config& config) {
    const std::size_t n = data.labels.size();
    double npos = 0.0;
    for (double y : data.labels) npos += y;
    const double nneg = static_cast<double>(n) - npos;
    if (npos == 0.0 || nneg == 0.0) {
        throw std::invalid_argument("eval-head fit needs both label classes");
    }
    std::vector<double> sw(n);
    double sw_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sw[i] = data.labels[i] > 0.5 ? n / (2.0 * npos) : n / (2.0 * nneg);
        sw_sum += sw[i];
    }

    std::vector<double> w(policy::kEvalFeatureCount, 0.0);
    for (int it = 0; it < config.eval_fit_iterations; ++it) {
        std::vector<double> g(policy::kEvalFeatureCount, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double z = 0.0;
            for (int j = 0; j < policy::kEvalFeatureCount; ++j) {
                z += w[j] * data.rows[i][j];
            }
            const double resid = sw[i] * (data.labels[i] - policy::sigmoid(z));
            for (int j = 0; j < policy::kEvalFeatureCount; ++j) {
                g[j] += resid * data.rows[i][j];
            }
        }
        for (int j = 0; j < policy::kEvalFeatureCount; ++j) {
            w[j] += config.eval_fit_learning_rate * g[j] / sw_sum;
        }
    }

    FittedHead out;
    out.weights = std::move(w);
    double hits = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double z = 0.0;
        for (int j = 0; j < policy::kEvalFeatureCount; ++j) {
            z += out.weights[j] * data.rows[i][j];
        }
        const bool pred = policy::sigmoid(z) > 0.5;
        if (pred == (data.labels[i] > 0.5)) hits += 1.0;
    }
    out.train_accuracy = hits / static_cast<double>(n);
    return out;
}

std::vector<TracedEpisode> labeled_episodes(const policy::PolicyParams& params,
                                            const rng::SplitRng& root,
                                            const std::string& label,
                                            const Stage1Config& config) {
    std::vector<TracedEpisode> episodes;
    episodes.reserve(config.eval_fit_episodes);
    const rng::SplitRng task_stream = root.split(label);
    const rng::SplitRng ep_stream = root.split(label + "-ep");
    for (int i = 0; i < config.eval_fit_episodes; ++i) {
        const int m = config.difficulties[i % config.difficulties.size()];
        env::Task task = env::generate_task(
            task_stream.split(static_cast<std::uint64_t>(i)).next(), m);
        EpisodeTrace trace = generate_episode(
            params, task, config, ep_stream.split(static_cast<std::uint64_t>(i)));
        episodes.push_back(TracedEpisode{std::move(task), std::move(trace)});
    }
    return episodes;
}

}  // namespace

EpisodeTrace generate_episode(const policy::PolicyParams& params, const env::Task& task,
                              const Stage1Config& config, rng::SplitRng episode_rng) {
    EpisodeTrace trace;
    trace.task_id = task.id;
    std::optional<policy::RetryContext> retry;
    for (int turn = 0; turn <= config.retry_turns; ++turn) {
        AttemptRecord attempt;
        attempt.turn_index = turn + 1;
        attempt.retry = retry;
        const policy::RetryContext* rptr = retry ? &*retry : nullptr;

        env::ReasoningState state{task.id, {}};
        for (int d = 0; d < task.difficulty() - 1; ++d) {
            const auto cands = env::candidate_actions(task, state, config.K);
            const auto p = policy::step_distribution(params, task, state, cands, rptr);
            const int i = sample_index(p, episode_rng.uniform01());
            attempt.chosen_indices.push_back(i);
            attempt.step_log_probs.push_back(std::log(p[i]));
            state = env::apply_step(state, cands[i]);
            attempt.steps.push_back(cands[i].value);
        }
        attempt.final_answer = state.claimed.back();
        attempt.reward = env::oracle_reward(state.claimed.back(), task);
        trace.total_reward += attempt.reward;

        const bool more_turns = turn < config.retry_turns;
        if (more_turns) {
            retry = retry_from_attempt(params, task, attempt.steps);
            trace.instruction_tags.push_back(1);
        }
        trace.attempts.push_back(std::move(attempt));
    }
    return trace;
}

double stage1_objective(const EpisodeTrace& trace) {
    return static_cast<double>(trace.total_reward);
}

ReinforceGrad reinforce_kl_grad(const policy::PolicyParams& params,
                                const policy::PolicyParams& fix_params,
                                const std::vector<TracedEpisode>& batch,
                                const Stage1Config& config) {
    if (batch.empty()) throw std::invalid_argument("empty episode batch");

    std::vector<std::vector<double>> episode_grads;
    std::vector<double> rewards;
    std::vector<VisitedState> visited;
    episode_grads.reserve(batch.size());
    rewards.reserve(batch.size());

    for (const auto& ep : batch) {
        std::vector<double> g(policy::kStepFeatureCount, 0.0);
        for (const auto& attempt : ep.trace.attempts) {
            const policy::RetryContext* rptr =
                attempt.retry ? &*attempt.retry : nullptr;
            env::ReasoningState state{ep.task.id, {}};
            for (std::size_t d = 0; d < attempt.chosen_indices.size(); ++d) {
                const auto cands = env::candidate_actions(ep.task, state, config.K);
                const auto lg = policy::log_prob_grad(params, ep.task, state, cands,
                                                      attempt.chosen_indices[d], rptr);
                for (int j = 0; j < policy::kStepFeatureCount; ++j) g[j] += lg.grad[j];
                visited.push_back(VisitedState{&ep.task, state, rptr});
                state = env::apply_step(state, cands[attempt.chosen_indices[d]]);
            }
        }
        episode_grads.push_back(std::move(g));
        rewards.push_back(stage1_objective(ep.trace));
    }

    double base = 0.0;
    if (config.baseline == Baseline::BatchMean) {
        for (double r : rewards) base += r;
        base /= static_cast<double>(rewards.size());
    }

    ReinforceGrad out;
    out.grad.assign(policy::kStepFeatureCount, 0.0);
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const double scale = rewards[b] - base;
        for (int j = 0; j < policy::kStepFeatureCount; ++j) {
            out.grad[j] += scale * episode_grads[b][j];
        }
    }
    for (int j = 0; j < policy::kStepFeatureCount; ++j) {
        out.grad[j] /= static_cast<double>(batch.size());
    }

    std::vector<double> kl_grad(policy::kStepFeatureCount, 0.0);
    for (const auto& v : visited) {
        const auto cands = env::candidate_actions(*v.task, v.state, config.K);
        const auto kg =
            policy::kl_divergence(params, fix_params, *v.task, v.state, cands, v.retry);
        out.mean_kl += kg.kl;
        for (int j = 0; j < policy::kStepFeatureCount; ++j) kl_grad[j] += kg.grad[j];
    }
    const double inv_states = 1.0 / static_cast<double>(visited.size());
    out.mean_kl *= inv_states;
    for (int j = 0; j < policy::kStepFeatureCount; ++j) {
        out.grad[j] -= config.kl_coefficient * kl_grad[j] * inv_states;
    }
    return out;
}

policy::PolicyParams fit_eval_head(const policy::PolicyParams& params,
                                   const std::vector<TracedEpisode>& episodes,
                                   const Stage1Config& config) {
    const FittedHead head = fit_head(collect_eval_fit_data(episodes), config);
    policy::PolicyParams out = params;
    out.eval_weights = head.weights;
    return out;
}

Stage1Result run_stage1(const policy::PolicyParams& initial_params,
                        const Stage1Config& config, std::uint64_t task_seed) {
    if (config.difficulties.empty()) {
        throw std::invalid_argument("stage-1 difficulty list is empty");
    }
    Stage1Result result;
    result.params = initial_params;
    const policy::PolicyParams fix = initial_params;
    const rng::SplitRng root = rng::SplitRng(task_seed).split("stage1");

    /* First head fit from the untrained policy: retry confidences must be
     * informative while the step weights train, or the gate features stay
     * flat and receive no gradient. */
    {
        const auto eps = labeled_episodes(result.params, root, "evalfit0", config);
        const FittedHead head = fit_head(collect_eval_fit_data(eps), config);
        result.params.eval_weights = head.weights;
        result.initial_head_accuracy = head.train_accuracy;
    }

    std::uint64_t tcount = 0;
    const rng::SplitRng ep_stream = root.split("episode");
    for (int it = 0; it < config.iterations; ++it) {
        std::vector<TracedEpisode> batch;
        batch.reserve(config.batch_size);
        for (int b = 0; b < config.batch_size; ++b) {
            const int m = config.difficulties[tcount % config.difficulties.size()];
            env::Task task = env::generate_task(root.split(tcount).next(), m);
            EpisodeTrace trace = generate_episode(result.params, task, config,
                                                  ep_stream.split(tcount));
            ++tcount;
            batch.push_back(TracedEpisode{std::move(task), std::move(trace)});
        }

        const ReinforceGrad rg = reinforce_kl_grad(result.params, fix, batch, config);
        for (int j = 0; j < policy::kStepFeatureCount; ++j) {
            result.params.step_weights[j] += config.learning_rate * rg.grad[j];
        }

        IterationMetrics im;
        im.iteration = it;
        for (const auto& ep : batch) {
            im.mean_turn1_reward += ep.trace.attempts.front().reward;
            if (ep.trace.attempts.size() > 1) {
                im.mean_turn2_reward += ep.trace.attempts[1].reward;
            }
        }
        im.mean_turn1_reward /= config.batch_size;
        im.mean_turn2_reward /= config.batch_size;
        im.mean_kl = rg.mean_kl;
        result.iterations.push_back(im);
    }

    {
        const auto eps = labeled_episodes(result.params, root, "evalfit", config);
        const FittedHead head = fit_head(collect_eval_fit_data(eps), config);
        result.params.eval_weights = head.weights;
        result.final_head_accuracy = head.train_accuracy;
    }
    return result;
}

std::pair<double, double> turn_pair_accuracy(const policy::PolicyParams& params,
                                             const std::vector<env::Task>& tasks,
                                             int K) {
    if (tasks.empty()) throw std::invalid_argument("empty benchmark");
    int hits1 = 0;
    int hits2 = 0;
    for (const auto& task : tasks) {
        const env::ReasoningState first = policy::greedy_decode(params, task, K);
        if (terminal_status(task, first) == env::TerminalStatus::CorrectTerminal) {
            ++hits1;
        }
        const policy::RetryContext retry =
            retry_from_attempt(params, task, first.claimed);
        const env::ReasoningState second = policy::greedy_decode(params, task, K, &retry);
        if (terminal_status(task, second) == env::TerminalStatus::CorrectTerminal) {
            ++hits2;
        }
    }
    const double n = static_cast<double>(tasks.size());
    return {hits1 / n, hits2 / n};
}

}  // namespace steprl::selfcorrect
