#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "steprl/env.hpp"
#include "steprl/policy.hpp"

namespace steprl::search {

enum class RolloutPolicy { GreedyPrior };

struct SearchConfig {
    double c_puct = 1.25;
    double length_lambda = 0.5;
    int K = 4;
    int budget = 64;
    double gamma = 1.0;
    bool verify_enabled = false;
    RolloutPolicy rollout_policy = RolloutPolicy::GreedyPrior;
};

struct TreeNode;

struct Edge {
    env::StepAction action;
    double prior = 0.0;  // length-adjusted prior of this action
    double q = 0.0;      // r + gamma * child value, refreshed on backup
    double r = 0.0;      // step reward R(child) - R(parent)
    std::unique_ptr<TreeNode> child;
};

struct TreeNode {
    env::ReasoningState state;
    int o_score = 0;       // oracle component: +1 / -1 terminal, 0 otherwise
    double c_score = 0.0;  // self-consistency component from the search policy
    double c_hat = 0.0;    // verification component from the stage-1 head
    double reward = 0.0;   // composite state reward
    int n_visits = 0;
    double value_sum = 0.0;
    std::vector<Edge> edges;

    [[nodiscard]] double value() const {
        return n_visits > 0 ? value_sum / n_visits : 0.0;
    }
    [[nodiscard]] bool expanded() const { return !edges.empty(); }
    [[nodiscard]] bool terminal() const { return o_score != 0; }
};

struct SearchTree {
    std::unique_ptr<TreeNode> root;
    std::uint64_t task_id = 0;
    SearchConfig config;
    std::uint64_t seed = 0;
    int simulations = 0;
};

/* Composite state reward before verification: outcome score plus the search
 * policy's consistency estimate. */
double state_reward(int o_score, double c_score);

/* Step reward of the edge into a child: R(child) - R(parent). */
double step_reward(double r_parent, double r_child);

/* Verification bonus: the stage-1 head's step confidence added onto an
 * existing composite reward. Requires a state with at least one claimed
 * step. */
double verify_augment(double reward, const policy::PolicyParams& stage1_params,
                      const env::Task& task, const env::ReasoningState& state);

/* Node with its composite reward evaluated: oracle score plus the policy's
 * own consistency estimate, plus the stage-1 verification estimate when
 * enabled. The root of an empty prefix has no eval features; both heads
 * contribute the sigmoid midpoint 0.5 there. */
std::unique_ptr<TreeNode> make_node(const env::Task& task, env::ReasoningState state,
                                    const policy::PolicyParams& params,
                                    const policy::PolicyParams& stage1_params,
                                    const SearchConfig& config);

/* Create all K children with their length-adjusted priors, step rewards, and
 * initial q = r. */
void expand(TreeNode& node, const env::Task& task, const policy::PolicyParams& params,
            const policy::PolicyParams& stage1_params, const SearchConfig& config);

/* Index of the edge maximizing q + c_puct * prior * sqrt(N) / (1 + N_child);
 * lowest index wins ties. */
int puct_select(const TreeNode& node, const SearchConfig& config);

/* Greedy length-adjusted-prior descent to a terminal state; returns that
 * terminal state's composite reward. */
double rollout(const TreeNode& node, const env::Task& task,
               const policy::PolicyParams& params,
               const policy::PolicyParams& stage1_params, const SearchConfig& config);

/* Credit a finished simulation: seed the leaf with `leaf_value`, then walk the
 * path back to the root accumulating value = r + gamma * value into each
 * node's running mean and refreshing each traversed edge's q. `path` holds
 * (node, edge index) pairs from the root downward; an empty path seeds only
 * the leaf. */
void backup(std::vector<std::pair<TreeNode*, int>>& path, TreeNode& leaf,
            double leaf_value, const SearchConfig& config);

/* Run `budget` simulations from `root_state`. Each simulation descends via
 * puct_select to an unexpanded node, expands it (unless terminal), estimates
 * its value with one greedy rollout through the highest-prior new child, and
 * backs the value up with the stopped node as the leaf. Every expanded node
 * therefore holds one visit of its own plus the visits of its children.
 * `seed` is recorded in the returned tree; the search itself is deterministic
 * under the greedy rollout policy. */
SearchTree run_search(const env::Task& task, env::ReasoningState root_state,
                      const policy::PolicyParams& policy_params,
                      const policy::PolicyParams& stage1_params,
                      const SearchConfig& config, std::uint64_t seed);

}  // namespace steprl::search
