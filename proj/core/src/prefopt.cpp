#include "steprl/prefopt.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>
#include <unordered_map>

#include "steprl/rng.hpp"

namespace steprl::prefopt {

std::vector<PreferencePair> extract_pairs(const search::SearchTree& tree,
                                          const DpoConfig& config) {
    std::vector<PreferencePair> pairs;
    std::deque<const search::TreeNode*> queue{tree.root.get()};
    while (!queue.empty()) {
        const search::TreeNode* node = queue.front();
        queue.pop_front();
        if (!node->expanded()) continue;

        int best = -1;
        int worst = -1;
        int qualifying = 0;
        for (int i = 0; i < static_cast<int>(node->edges.size()); ++i) {
            const search::Edge& e = node->edges[i];
            if (e.child->n_visits < config.n_min) continue;
            ++qualifying;
            if (best < 0 || e.q > node->edges[best].q) best = i;
            if (worst < 0 || e.q < node->edges[worst].q) worst = i;
        }
        if (qualifying >= 2 &&
            node->edges[best].q - node->edges[worst].q >= config.delta) {
            PreferencePair p;
            p.task_id = tree.task_id;
            p.prefix = node->state.claimed;
            p.chosen = node->edges[best].action.value;
            p.rejected = node->edges[worst].action.value;
            p.q_chosen = node->edges[best].q;
            p.q_rejected = node->edges[worst].q;
            p.depth = node->state.depth();
            pairs.push_back(std::move(p));
        }
        for (const search::Edge& e : node->edges) queue.push_back(e.child.get());
    }
    return pairs;
}

DpoLossGrad dpo_loss_grad(const policy::PolicyParams& params,
                          const policy::PolicyParams& ref_params,
                          const PreferencePair& pair, const env::Task& task, int K,
                          double beta) {
    if (task.id != pair.task_id) {
        throw std::invalid_argument("pair does not belong to the given task");
    }
    const env::ReasoningState state{task.id, pair.prefix};
    const auto cands = env::candidate_actions(task, state, K);
    int ci = -1;
    int ri = -1;
    for (int i = 0; i < static_cast<int>(cands.size()); ++i) {
        if (cands[i].value == pair.chosen) ci = i;
        if (cands[i].value == pair.rejected) ri = i;
    }
    if (ci < 0 || ri < 0) {
        throw std::invalid_argument("pair actions not found among regenerated candidates");
    }
    const auto lp = policy::step_distribution(params, task, state, cands);
    const auto lref = policy::step_distribution(ref_params, task, state, cands);
    const double margin = beta * ((std::log(lp[ci]) - std::log(lref[ci])) -
                                  (std::log(lp[ri]) - std::log(lref[ri])));

    DpoLossGrad out;
    out.loss = -std::log(policy::sigmoid(margin));
    const auto gc = policy::log_prob_grad(params, task, state, cands, ci);
    const auto gr = policy::log_prob_grad(params, task, state, cands, ri);
    out.grad.assign(policy::kStepFeatureCount, 0.0);
    const double coeff = -policy::sigmoid(-margin) * beta;
    for (int j = 0; j < policy::kStepFeatureCount; ++j) {
        out.grad[j] = coeff * (gc.grad[j] - gr.grad[j]);
    }
    return out;
}

policy::PolicyParams train_round(const policy::PolicyParams& params,
                                 const policy::PolicyParams& ref_params,
                                 const std::vector<PreferencePair>& pairs,
                                 const std::vector<env::Task>& tasks, int K,
                                 const DpoConfig& config) {
    if (pairs.empty()) {
        throw std::invalid_argument("train_round requires a non-empty pair set");
    }
    std::unordered_map<std::uint64_t, const env::Task*> by_id;
    for (const auto& t : tasks) by_id.emplace(t.id, &t);

    policy::PolicyParams out = params;
    const int n = static_cast<int>(pairs.size());
    for (int b0 = 0; b0 < n; b0 += config.batch_size) {
        const int b1 = std::min(n, b0 + config.batch_size);
        std::vector<double> g(policy::kStepFeatureCount, 0.0);
        for (int i = b0; i < b1; ++i) {
            const auto it = by_id.find(pairs[i].task_id);
            if (it == by_id.end()) {
                throw std::invalid_argument("pair references an unknown task");
            }
            const DpoLossGrad lg =
                dpo_loss_grad(out, ref_params, pairs[i], *it->second, K, config.beta);
            for (int j = 0; j < policy::kStepFeatureCount; ++j) g[j] += lg.grad[j];
        }
        const double inv = 1.0 / (b1 - b0);
        for (int j = 0; j < policy::kStepFeatureCount; ++j) {
            out.step_weights[j] -= config.learning_rate * g[j] * inv;
        }
    }
    return out;
}

Stage2Result run_stage2(const policy::PolicyParams& initial_params,
                        const policy::PolicyParams& stage1_params,
                        std::uint64_t task_seed, const DpoConfig& config,
                        const search::SearchConfig& search_config) {
    if (config.difficulties.empty()) {
        throw std::invalid_argument("stage-2 difficulty list is empty");
    }
    std::vector<env::Task> heldout;
    {
        const rng::SplitRng hr = rng::SplitRng(task_seed).split("stage2-heldout");
        const int hdiffs[2] = {2, 3};
        heldout.reserve(config.heldout_size);
        for (int i = 0; i < config.heldout_size; ++i) {
            heldout.push_back(env::generate_task(
                hr.split(static_cast<std::uint64_t>(i)).next(), hdiffs[i % 2]));
        }
    }

    Stage2Result result;
    result.params = initial_params;
    const rng::SplitRng root = rng::SplitRng(task_seed).split("stage2");
    std::uint64_t tcount = 0;
    for (int round = 0; round < config.rounds; ++round) {
        const policy::PolicyParams ref =
            config.fixed_reference ? initial_params : result.params;
        std::vector<env::Task> tasks;
        std::vector<PreferencePair> pairs;
        tasks.reserve(config.trees_per_round);
        for (int i = 0; i < config.trees_per_round; ++i) {
            const int m = config.difficulties[tcount % config.difficulties.size()];
            env::Task t = env::generate_task(root.split(tcount).next(), m);
            const search::SearchTree tree =
                search::run_search(t, env::ReasoningState{t.id, {}}, result.params,
                                   stage1_params, search_config, tcount);
            ++tcount;
            auto tree_pairs = extract_pairs(tree, config);
            pairs.insert(pairs.end(), tree_pairs.begin(), tree_pairs.end());
            tasks.push_back(std::move(t));
        }
        result.total_pairs += static_cast<long long>(pairs.size());

        double mean_loss = 0.0;
        if (!pairs.empty()) {
            /* Loss is measured against the parameters entering the round,
             * then the same batching order is used for the update pass. */
            for (const auto& p : pairs) {
                const auto it = std::find_if(tasks.begin(), tasks.end(),
                                             [&](const env::Task& t) {
                                                 return t.id == p.task_id;
                                             });
                mean_loss += dpo_loss_grad(result.params, ref, p, *it,
                                           search_config.K, config.beta)
                                 .loss;
            }
            mean_loss /= static_cast<double>(pairs.size());
            result.params = train_round(result.params, ref, pairs, tasks,
                                        search_config.K, config);
        }

        RoundMetrics rm;
        rm.round = round;
        rm.pair_count = static_cast<int>(pairs.size());
        rm.mean_loss = mean_loss;
        rm.heldout_accuracy =
            policy::greedy_accuracy(result.params, heldout, search_config.K);
        result.rounds.push_back(rm);
    }
    return result;
}

}  // namespace steprl::prefopt
