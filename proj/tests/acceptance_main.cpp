/* Acceptance gate: every release-blocking property in one binary. Each check
 * prints a single [PASS]/[FAIL] line with its elapsed time and enforces its
 * own wall-clock budget. Exit status is the number of failed checks. */

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "steprl/config.hpp"
#include "steprl/env.hpp"
#include "steprl/pipeline.hpp"
#include "steprl/policy.hpp"
#include "steprl/prefopt.hpp"
#include "steprl/rng.hpp"
#include "steprl/search.hpp"
#include "steprl/selfcorrect.hpp"

using namespace steprl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

Outcome ok(std::string detail) { return {true, std::move(detail)}; }
Outcome fail(std::string detail) { return {false, std::move(detail)}; }

policy::PolicyParams random_params(rng::SplitRng& r, double scale) {
    policy::PolicyParams p;
    for (auto& w : p.step_weights) w = (r.uniform01() * 2.0 - 1.0) * scale;
    for (auto& w : p.eval_weights) w = (r.uniform01() * 2.0 - 1.0) * scale;
    return p;
}

/* A state `depth` random steps into the task. */
env::ReasoningState random_state(const env::Task& task, int depth, int K,
                                 rng::SplitRng& r) {
    env::ReasoningState state{task.id, {}};
    for (int d = 0; d < depth; ++d) {
        const auto cands = env::candidate_actions(task, state, K);
        state = env::apply_step(state, cands[r.bounded(cands.size())]);
    }
    return state;
}

template <typename F>
void walk_tree(const search::TreeNode& node, F&& f) {
    f(node);
    for (const auto& e : node.edges) walk_tree(*e.child, std::forward<F>(f));
}

double rel_err(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path scratch_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("steprl-acceptance-" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", x);
    return buf;
}

/* ---- 1. selection rule equals a brute-force score scan ---- */

Outcome check_selection_oracle() {
    rng::SplitRng r(101);
    search::SearchConfig config;
    int checked = 0;
    while (checked < 1000) {
        config.c_puct = 0.25 + r.uniform01() * 3.0;
        search::TreeNode node;
        node.n_visits = 1 + static_cast<int>(r.bounded(50));
        const int fanout = 2 + static_cast<int>(r.bounded(5));
        for (int i = 0; i < fanout; ++i) {
            search::Edge e;
            e.q = r.uniform01() * 4.0 - 2.0;
            e.prior = 0.05 + r.uniform01();
            e.child = std::make_unique<search::TreeNode>();
            e.child->n_visits = static_cast<int>(r.bounded(21));
            node.edges.push_back(std::move(e));
        }

        std::vector<double> scores;
        const double sqrt_n = std::sqrt(static_cast<double>(node.n_visits));
        for (const auto& e : node.edges) {
            scores.push_back(e.q + config.c_puct * e.prior * sqrt_n /
                                       (1.0 + e.child->n_visits));
        }
        bool near_tie = false;
        for (std::size_t i = 0; i < scores.size() && !near_tie; ++i) {
            for (std::size_t j = i + 1; j < scores.size(); ++j) {
                if (std::abs(scores[i] - scores[j]) < 1e-12) {
                    near_tie = true;
                    break;
                }
            }
        }
        if (near_tie) continue;

        int best = 0;
        for (std::size_t i = 1; i < scores.size(); ++i) {
            if (scores[i] > scores[best]) best = static_cast<int>(i);
        }
        if (search::puct_select(node, config) != best) {
            return fail("selection disagreed with the brute-force argmax on node " +
                        std::to_string(checked));
        }
        ++checked;
    }
    return ok("exact agreement on 1000 randomized nodes");
}

/* ---- 2. visit and value conservation under a shadow ledger ---- */

Outcome check_backup_conservation() {
    rng::SplitRng r(202);
    long long nodes_checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const env::Task task = env::generate_task(4000 + trial * 13, 2 + trial % 4);
        const auto params = random_params(r, 1.5);
        const auto stage1 = random_params(r, 1.5);
        search::SearchConfig config;
        config.budget = 1 + trial * 7 % 64;
        config.gamma = trial % 3 == 0 ? 0.9 : 1.0;
        config.verify_enabled = trial % 2 == 1;

        /* Replay the search loop by hand, mirroring the production sequence,
         * while an independent ledger records every value credited to every
         * node. */
        auto root = search::make_node(task, env::ReasoningState{task.id, {}},
                                      params, stage1, config);
        std::unordered_map<const search::TreeNode*, std::pair<int, double>> ledger;
        for (int sim = 0; sim < config.budget; ++sim) {
            search::TreeNode* node = root.get();
            std::vector<std::pair<search::TreeNode*, int>> path;
            while (node->expanded()) {
                const int i = search::puct_select(*node, config);
                path.emplace_back(node, i);
                node = node->edges[i].child.get();
            }
            double leaf_value = 0.0;
            if (node->terminal()) {
                leaf_value = node->reward;
            } else {
                search::expand(*node, task, params, stage1, config);
                std::vector<double> priors;
                priors.reserve(node->edges.size());
                for (const auto& e : node->edges) priors.push_back(e.prior);
                const auto& top = node->edges[policy::argmax_index(priors)];
                leaf_value = top.child->terminal()
                                 ? top.child->reward
                                 : search::rollout(*top.child, task, params,
                                                   stage1, config);
            }
            double v = leaf_value;
            auto& seed_slot = ledger[node];
            seed_slot.first += 1;
            seed_slot.second += v;
            for (auto it = path.rbegin(); it != path.rend(); ++it) {
                v = it->first->edges[it->second].r + config.gamma * v;
                auto& slot = ledger[it->first];
                slot.first += 1;
                slot.second += v;
            }
            search::backup(path, *node, leaf_value, config);
        }

        std::string problem;
        walk_tree(*root, [&](const search::TreeNode& node) {
            if (!problem.empty()) return;
            ++nodes_checked;
            const auto it = ledger.find(&node);
            const int count = it == ledger.end() ? 0 : it->second.first;
            const double sum = it == ledger.end() ? 0.0 : it->second.second;
            if (node.n_visits != count) {
                problem = "visit count diverged from the ledger";
                return;
            }
            if (count > 0 && std::abs(node.value() - sum / count) > 1e-12) {
                problem = "node value diverged from the ledger mean";
                return;
            }
            if (node.expanded()) {
                int child_total = 0;
                for (const auto& e : node.edges) child_total += e.child->n_visits;
                if (node.n_visits != 1 + child_total) {
                    problem = "expanded node does not hold 1 + sum of child visits";
                }
            }
        });
        if (!problem.empty()) {
            return fail(problem + " (trial " + std::to_string(trial) + ")");
        }

        /* The replay must be indistinguishable from the production search. */
        const auto tree = search::run_search(task, env::ReasoningState{task.id, {}},
                                             params, stage1, config, trial);
        std::vector<std::pair<const search::TreeNode*, const search::TreeNode*>> q{
            {root.get(), tree.root.get()}};
        while (!q.empty()) {
            const auto [a, b] = q.back();
            q.pop_back();
            if (a->n_visits != b->n_visits || a->value_sum != b->value_sum ||
                a->reward != b->reward || a->edges.size() != b->edges.size()) {
                return fail("hand replay diverged from run_search (trial " +
                            std::to_string(trial) + ")");
            }
            for (std::size_t i = 0; i < a->edges.size(); ++i) {
                if (a->edges[i].q != b->edges[i].q) {
                    return fail("edge q diverged from run_search (trial " +
                                std::to_string(trial) + ")");
                }
                q.emplace_back(a->edges[i].child.get(), b->edges[i].child.get());
            }
        }
    }
    return ok("200 searches, " + std::to_string(nodes_checked) +
              " nodes conserved");
}

/* ---- 3. composite rewards reconstruct from their parts ---- */

Outcome check_reward_algebra() {
    rng::SplitRng r(303);
    long long nodes_checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const env::Task task = env::generate_task(7000 + trial * 11, 2 + trial % 4);
        const auto params = random_params(r, 1.5);
        const auto stage1 = random_params(r, 1.5);
        search::SearchConfig config;
        config.budget = 24;
        config.verify_enabled = trial % 2 == 1;
        const auto tree = search::run_search(task, env::ReasoningState{task.id, {}},
                                             params, stage1, config, trial);

        std::string problem;
        walk_tree(*tree.root, [&](const search::TreeNode& node) {
            if (!problem.empty()) return;
            ++nodes_checked;
            if (node.reward !=
                search::state_reward(node.o_score, node.c_score) + node.c_hat) {
                problem = "stored reward is not O + C + verification bonus";
                return;
            }
            const auto status = env::terminal_status(task, node.state);
            const int want = status == env::TerminalStatus::CorrectTerminal ? 1
                             : status == env::TerminalStatus::IncorrectTerminal ? -1
                                                                                : 0;
            if (node.o_score != want) {
                problem = "outcome score does not match the terminal class";
                return;
            }
            if (!config.verify_enabled && node.c_hat != 0.0) {
                problem = "verification bonus present with verification disabled";
            }
        });
        if (!problem.empty()) {
            return fail(problem + " (trial " + std::to_string(trial) + ")");
        }
    }
    return ok("exact reconstruction on " + std::to_string(nodes_checked) + " nodes");
}

/* ---- 4. analytic gradients match central finite differences ---- */

Outcome check_gradients() {
    constexpr double kH = 1e-5;
    constexpr double kTol = 1e-6;
    rng::SplitRng r(404);

    for (int inst = 0; inst < 100; ++inst) {
        const env::Task task = env::generate_task(100 + inst, 2 + inst % 4);
        auto params = random_params(r, 1.5);
        const auto state =
            random_state(task, static_cast<int>(r.bounded(task.difficulty() - 1)),
                         4, r);
        const auto cands = env::candidate_actions(task, state, 4);
        const int chosen = static_cast<int>(r.bounded(cands.size()));

        const auto lg = policy::log_prob_grad(params, task, state, cands, chosen);
        for (int j = 0; j < policy::kStepFeatureCount; ++j) {
            auto hi = params;
            auto lo = params;
            hi.step_weights[j] += kH;
            lo.step_weights[j] -= kH;
            const double fd =
                (policy::log_prob_grad(hi, task, state, cands, chosen).log_prob -
                 policy::log_prob_grad(lo, task, state, cands, chosen).log_prob) /
                (2.0 * kH);
            if (rel_err(lg.grad[j], fd) >= kTol) {
                return fail("log-prob gradient mismatch at instance " +
                            std::to_string(inst));
            }
        }
    }

    for (int inst = 0; inst < 100; ++inst) {
        const env::Task task = env::generate_task(300 + inst, 2 + inst % 4);
        auto params = random_params(r, 1.2);
        const auto ref = random_params(r, 1.2);
        const auto state =
            random_state(task, static_cast<int>(r.bounded(task.difficulty() - 1)),
                         4, r);
        const auto cands = env::candidate_actions(task, state, 4);
        prefopt::PreferencePair pair;
        pair.task_id = task.id;
        pair.prefix = state.claimed;
        pair.depth = state.depth();
        const int ci = static_cast<int>(r.bounded(cands.size()));
        int rj = static_cast<int>(r.bounded(cands.size() - 1));
        if (rj >= ci) ++rj;
        pair.chosen = cands[ci].value;
        pair.rejected = cands[rj].value;

        const auto dg = prefopt::dpo_loss_grad(params, ref, pair, task, 4, 0.1);
        for (int j = 0; j < policy::kStepFeatureCount; ++j) {
            auto hi = params;
            auto lo = params;
            hi.step_weights[j] += kH;
            lo.step_weights[j] -= kH;
            const double fd =
                (prefopt::dpo_loss_grad(hi, ref, pair, task, 4, 0.1).loss -
                 prefopt::dpo_loss_grad(lo, ref, pair, task, 4, 0.1).loss) /
                (2.0 * kH);
            if (rel_err(dg.grad[j], fd) >= kTol) {
                return fail("preference-loss gradient mismatch at instance " +
                            std::to_string(inst));
            }
        }
    }

    for (int inst = 0; inst < 100; ++inst) {
        const env::Task task = env::generate_task(500 + inst, 2 + inst % 4);
        auto params = random_params(r, 1.2);
        const auto ref = random_params(r, 1.2);
        const auto state =
            random_state(task, static_cast<int>(r.bounded(task.difficulty() - 1)),
                         4, r);
        const auto cands = env::candidate_actions(task, state, 4);

        const auto kg = policy::kl_divergence(params, ref, task, state, cands);
        for (int j = 0; j < policy::kStepFeatureCount; ++j) {
            auto hi = params;
            auto lo = params;
            hi.step_weights[j] += kH;
            lo.step_weights[j] -= kH;
            const double fd =
                (policy::kl_divergence(hi, ref, task, state, cands).kl -
                 policy::kl_divergence(lo, ref, task, state, cands).kl) /
                (2.0 * kH);
            if (rel_err(kg.grad[j], fd) >= kTol) {
                return fail("KL gradient mismatch at instance " +
                            std::to_string(inst));
            }
        }
    }
    return ok("3 x 100 instances within 1e-6 relative error");
}

/* ---- 5. REINFORCE estimator is unbiased ---- */

Outcome check_reinforce_unbiased() {
    constexpr int kEpisodes = 10000;
    selfcorrect::Stage1Config config;
    config.retry_turns = 1;
    config.K = 3;
    config.kl_coefficient = 0.0;
    config.baseline = selfcorrect::Baseline::None;

    rng::SplitRng r(505);
    for (int t = 0; t < 3; ++t) {
        const env::Task task = env::generate_task(900 + t, 2);
        const auto params = random_params(r, 0.5);
        const env::ReasoningState root{task.id, {}};
        const auto cands = env::candidate_actions(task, root, config.K);
        const auto p1 = policy::step_distribution(params, task, root, cands);

        /* Exhaustive enumeration over both attempts' single steps. */
        std::vector<double> exact(policy::kStepFeatureCount, 0.0);
        for (std::size_t a1 = 0; a1 < cands.size(); ++a1) {
            const auto g1 = policy::log_prob_grad(params, task, root, cands,
                                                  static_cast<int>(a1));
            const double r1 = env::oracle_reward(cands[a1].value, task);

            policy::RetryContext retry;
            retry.prev_steps = {cands[a1].value};
            retry.prev_answer = cands[a1].value;
            const env::ReasoningState full{task.id, {cands[a1].value}};
            retry.attempt_confidence = policy::self_eval(
                params, task, full, policy::EvalMode::AttemptCheck);
            retry.step_confidences = {policy::self_eval(
                params, task, full, policy::EvalMode::StepCheck)};

            const auto p2 =
                policy::step_distribution(params, task, root, cands, &retry);
            for (std::size_t a2 = 0; a2 < cands.size(); ++a2) {
                const auto g2 = policy::log_prob_grad(
                    params, task, root, cands, static_cast<int>(a2), &retry);
                const double r2 = env::oracle_reward(cands[a2].value, task);
                const double w = p1[a1] * p2[a2] * (r1 + r2);
                for (int j = 0; j < policy::kStepFeatureCount; ++j) {
                    exact[j] += w * (g1.grad[j] + g2.grad[j]);
                }
            }
        }

        std::vector<double> sum(policy::kStepFeatureCount, 0.0);
        std::vector<double> sumsq(policy::kStepFeatureCount, 0.0);
        const rng::SplitRng episodes = rng::SplitRng(7700 + t).split("episodes");
        for (int e = 0; e < kEpisodes; ++e) {
            auto trace = selfcorrect::generate_episode(params, task, config,
                                                       episodes.split(e));
            std::vector<selfcorrect::TracedEpisode> batch;
            batch.push_back(selfcorrect::TracedEpisode{task, std::move(trace)});
            const auto rg = selfcorrect::reinforce_kl_grad(params, params, batch,
                                                           config);
            for (int j = 0; j < policy::kStepFeatureCount; ++j) {
                sum[j] += rg.grad[j];
                sumsq[j] += rg.grad[j] * rg.grad[j];
            }
        }

        for (int j = 0; j < policy::kStepFeatureCount; ++j) {
            const double mean = sum[j] / kEpisodes;
            const double var =
                std::max(0.0, (sumsq[j] - kEpisodes * mean * mean) /
                                  (kEpisodes - 1.0));
            const double se = std::sqrt(var / kEpisodes);
            if (std::abs(mean - exact[j]) > 3.0 * se + 1e-12) {
                return fail("coordinate " + std::to_string(j) + " off by " +
                            fmt(std::abs(mean - exact[j]) / (se > 0.0 ? se : 1.0)) +
                            " standard errors on task " + std::to_string(t));
            }
        }
    }
    return ok("sampled means within 3 standard errors on 3 tasks x 10000 episodes");
}

/* ---- 6. self-correction training widens the turn-2 margin ---- */

Outcome check_stage1_improvement() {
    const iolayer::RunConfig base;
    const auto bench = pipeline::benchmark_tasks(777, 500, {2, 3});
    std::vector<double> gains;
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto res =
            selfcorrect::run_stage1(policy::PolicyParams{}, base.stage1, seed);
        const auto [turn1, turn2] =
            selfcorrect::turn_pair_accuracy(res.params, bench, base.stage1.K);
        gains.push_back(turn2 - turn1);
    }
    const double med = pipeline::median(gains);
    if (med < 0.03) {
        return fail("median turn-2 gain " + fmt(med) + " is below 0.03");
    }
    return ok("median turn-2 gain " + fmt(med) + " over 3 seeds");
}

/* ---- 7. preference training beats the initial policy ---- */

Outcome check_stage2_improvement() {
    const iolayer::RunConfig base;
    const auto bench = pipeline::benchmark_tasks(777, 500, {2, 3});
    const policy::PolicyParams initial;
    const double acc0 = pipeline::evaluate(initial, bench, base.candidate_count);
    std::vector<double> gains;
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto res = prefopt::run_stage2(initial, initial, seed, base.stage2,
                                             base.search);
        gains.push_back(pipeline::evaluate(res.params, bench, base.candidate_count) -
                        acc0);
    }
    const double med = pipeline::median(gains);
    if (med < 0.05) {
        return fail("median accuracy gain " + fmt(med) + " over initial " +
                    fmt(acc0) + " is below 0.05");
    }
    return ok("median gain " + fmt(med) + " over initial accuracy " + fmt(acc0));
}

/* ---- 8. the combined pipeline tops each single stage ---- */

Outcome check_synergy_ordering() {
    const iolayer::RunConfig base;
    const fs::path dir = scratch_dir("ablation");
    const auto reports = pipeline::run_ablation(base, 0, dir);
    double ours = -1.0;
    double isc = -1.0;
    double mcts = -1.0;
    for (const auto& rep : reports) {
        if (rep.variant == "ours") ours = rep.median_accuracy;
        if (rep.variant == "isc_only") isc = rep.median_accuracy;
        if (rep.variant == "mcts_dpo_only") mcts = rep.median_accuracy;
    }
    if (ours < 0.0 || isc < 0.0 || mcts < 0.0) {
        return fail("ablation reports are missing a variant");
    }
    if (ours < isc || ours < mcts) {
        return fail("ours " + fmt(ours) + " vs isc_only " + fmt(isc) +
                    " vs mcts_dpo_only " + fmt(mcts));
    }
    return ok("ours " + fmt(ours) + " >= isc_only " + fmt(isc) +
              " and mcts_dpo_only " + fmt(mcts));
}

/* ---- 9. identical runs leave byte-identical artifacts ---- */

Outcome check_determinism() {
    const iolayer::RunConfig config =
        pipeline::variant_config(iolayer::RunConfig{}, pipeline::Variant::Ours);
    const fs::path a = scratch_dir("repro-a");
    const fs::path b = scratch_dir("repro-b");
    if (pipeline::run_full(config, 1, a) != 0 ||
        pipeline::run_full(config, 1, b) != 0) {
        return fail("full pipeline run reported failure");
    }
    for (const char* name :
         {"metrics.jsonl", "stage1.ckpt", "stage2.ckpt", "final.ckpt"}) {
        const std::string bytes_a = read_bytes(a / name);
        const std::string bytes_b = read_bytes(b / name);
        if (bytes_a.empty()) {
            return fail(std::string(name) + " is missing or empty");
        }
        if (bytes_a != bytes_b) {
            return fail(std::string(name) + " differs between identical runs");
        }
    }
    return ok("metrics and all checkpoints byte-identical across two runs");
}

/* ---- 10. preference-loss invariances ---- */

Outcome check_dpo_invariances() {
    const double log2 = std::log(2.0);
    rng::SplitRng r(1010);
    for (int trial = 0; trial < 20; ++trial) {
        const env::Task task = env::generate_task(1200 + trial, 2 + trial % 4);
        auto state = random_state(
            task, static_cast<int>(r.bounded(task.difficulty() - 1)), 4, r);
        const auto cands = env::candidate_actions(task, state, 4);
        prefopt::PreferencePair pair;
        pair.task_id = task.id;
        pair.prefix = state.claimed;
        pair.depth = state.depth();
        pair.chosen = cands[0].value;
        pair.rejected = cands[1].value;

        const auto params = random_params(r, 1.5);
        const double at_ref =
            prefopt::dpo_loss_grad(params, params, pair, task, 4, 0.1).loss;
        if (std::abs(at_ref - log2) > 1e-12) {
            return fail("loss at the reference is " + fmt(at_ref) +
                        ", expected log 2");
        }

        const auto ref = random_params(r, 1.5);
        const double base =
            prefopt::dpo_loss_grad(params, ref, pair, task, 4, 0.1).loss;
        auto shifted = params;
        auto shifted_ref = ref;
        shifted.step_weights[0] += 3.25;
        shifted_ref.step_weights[0] -= 1.5;
        const double moved =
            prefopt::dpo_loss_grad(shifted, shifted_ref, pair, task, 4, 0.1).loss;
        if (std::abs(base - moved) > 1e-12) {
            return fail("loss moved by " + fmt(std::abs(base - moved)) +
                        " under a shared logit shift");
        }
    }
    return ok("log 2 at the reference and shift-invariant on 20 instances");
}

struct Criterion {
    const char* name;
    double budget_seconds;  // 0 means no wall-clock budget
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"selection equals brute-force argmax on 1000 random nodes", 1.0,
         check_selection_oracle},
        {"visit and value conservation over 200 random searches", 10.0,
         check_backup_conservation},
        {"composite rewards reconstruct exactly on every node", 0.0,
         check_reward_algebra},
        {"analytic gradients match central finite differences", 5.0,
         check_gradients},
        {"REINFORCE gradient estimate is unbiased", 30.0,
         check_reinforce_unbiased},
        {"stage-1 training lifts turn-2 accuracy by >= 3 points", 120.0,
         check_stage1_improvement},
        {"stage-2 training lifts greedy accuracy by >= 5 points", 300.0,
         check_stage2_improvement},
        {"combined pipeline matches or beats both single stages", 600.0,
         check_synergy_ordering},
        {"identical runs produce byte-identical artifacts", 600.0,
         check_determinism},
        {"preference loss is log 2 at the reference and shift-invariant", 1.0,
         check_dpo_invariances},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& c = criteria[i];
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& ex) {
            outcome = fail(std::string("unhandled exception: ") + ex.what());
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        if (outcome.pass && c.budget_seconds > 0.0 &&
            elapsed >= c.budget_seconds) {
            outcome = fail("exceeded the " + fmt(c.budget_seconds) +
                           " s time budget");
        }
        if (!outcome.pass) ++failures;
        std::printf("[%s] %2zu. %s (%.2f s", outcome.pass ? "PASS" : "FAIL",
                    i + 1, c.name, elapsed);
        if (c.budget_seconds > 0.0) {
            std::printf(" / budget %.0f s", c.budget_seconds);
        }
        std::printf(")%s%s\n", outcome.detail.empty() ? "" : " -- ",
                    outcome.detail.c_str());
    }
    std::printf("%zu/%zu acceptance criteria passed\n", criteria.size() - failures,
                criteria.size());
    return failures == 0 ? 0 : 1;
}
