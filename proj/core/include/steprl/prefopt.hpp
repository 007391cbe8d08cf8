#pragma once

#include <cstdint>
#include <vector>

#include "steprl/env.hpp"
#include "steprl/policy.hpp"
#include "steprl/search.hpp"

namespace steprl::prefopt {

/* A step-level preference extracted from one search tree node: from the given
 * prefix, `chosen` had the highest backed-up q and `rejected` the lowest. */
struct PreferencePair {
    std::uint64_t task_id = 0;
    std::vector<long long> prefix;
    long long chosen = 0;
    long long rejected = 0;
    double q_chosen = 0.0;
    double q_rejected = 0.0;
    int depth = 0;
};

struct DpoConfig {
    double beta = 0.1;
    double learning_rate = 0.05;
    int rounds = 8;
    int trees_per_round = 64;
    int n_min = 2;       // minimum child visits for an edge to qualify
    double delta = 0.1;  // minimum q gap between chosen and rejected
    int batch_size = 16;
    bool fixed_reference = false;  // keep the round-0 reference for all rounds
    std::vector<int> difficulties = {3};
    int heldout_size = 100;
};

/* Walk the tree breadth-first and emit at most one pair per interior node:
 * among edges whose child has at least n_min visits, the argmax-q vs argmin-q
 * actions (lowest candidate index on ties), kept only when the q gap is at
 * least delta. */
std::vector<PreferencePair> extract_pairs(const search::SearchTree& tree,
                                          const DpoConfig& config);

struct DpoLossGrad {
    double loss = 0.0;
    std::vector<double> grad;  // d loss / d step_weights
};

/* Preference loss -log sigmoid(beta * margin) for one pair, where margin is
 * the chosen-minus-rejected difference of log-probability ratios against the
 * reference policy. K must match the candidate count the tree was built
 * with, so the regenerated candidate set contains both pair actions. */
DpoLossGrad dpo_loss_grad(const policy::PolicyParams& params,
                          const policy::PolicyParams& ref_params,
                          const PreferencePair& pair, const env::Task& task, int K,
                          double beta);

/* One pass over `pairs` in fixed order with mini-batch SGD (batch gradients
 * averaged). Throws std::invalid_argument on an empty pair set. `tasks` must
 * contain every task referenced by the pairs. */
policy::PolicyParams train_round(const policy::PolicyParams& params,
                                 const policy::PolicyParams& ref_params,
                                 const std::vector<PreferencePair>& pairs,
                                 const std::vector<env::Task>& tasks, int K,
                                 const DpoConfig& config);

struct RoundMetrics {
    int round = 0;
    int pair_count = 0;
    double mean_loss = 0.0;
    double heldout_accuracy = 0.0;
};

struct Stage2Result {
    policy::PolicyParams params;
    std::vector<RoundMetrics> rounds;
    long long total_pairs = 0;
};

/* Full search-and-learn loop: each round builds trees_per_round search trees
 * from fresh tasks, extracts pairs, and applies one train_round. The
 * reference policy is re-snapshotted at the start of every round unless
 * fixed_reference is set. Rounds that extract no pairs leave the parameters
 * untouched. `stage1_params` supplies the verification head when
 * search_config.verify_enabled is set. */
Stage2Result run_stage2(const policy::PolicyParams& initial_params,
                        const policy::PolicyParams& stage1_params,
                        std::uint64_t task_seed, const DpoConfig& config,
                        const search::SearchConfig& search_config);

}  // namespace steprl::prefopt
