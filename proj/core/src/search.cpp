#include "steprl/search.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace steprl::search {

namespace {

double head_or_midpoint(const policy::PolicyParams& params, const env::Task& task,
                        const env::ReasoningState& state) {
    if (state.depth() == 0) return 0.5;
    return policy::self_eval(params, task, state, policy::EvalMode::StepCheck);
}

}  // namespace

double state_reward(int o_score, double c_score) {
    return o_score + c_score;
}

double step_reward(double r_parent, double r_child) {
    return r_child - r_parent;
}

double verify_augment(double reward, const policy::PolicyParams& stage1_params,
                      const env::Task& task, const env::ReasoningState& state) {
    return reward + policy::self_eval(stage1_params, task, state,
                                      policy::EvalMode::StepCheck);
}

std::unique_ptr<TreeNode> make_node(const env::Task& task, env::ReasoningState state,
                                    const policy::PolicyParams& params,
                                    const policy::PolicyParams& stage1_params,
                                    const SearchConfig& config) {
    auto node = std::make_unique<TreeNode>();
    node->o_score = env::outcome_score(task, state);
    node->c_score = head_or_midpoint(params, task, state);
    node->reward = state_reward(node->o_score, node->c_score);
    if (config.verify_enabled) {
        if (state.depth() == 0) {
            node->c_hat = 0.5;
            node->reward += node->c_hat;
        } else {
            const double augmented = verify_augment(node->reward, stage1_params,
                                                    task, state);
            node->c_hat = augmented - node->reward;
            node->reward = augmented;
        }
    }
    node->state = std::move(state);
    return node;
}

void expand(TreeNode& node, const env::Task& task, const policy::PolicyParams& params,
            const policy::PolicyParams& stage1_params, const SearchConfig& config) {
    if (node.expanded()) throw std::logic_error("node already expanded");
    if (node.terminal()) throw std::logic_error("cannot expand a terminal node");
    const auto cands = env::candidate_actions(task, node.state, config.K);
    const auto priors = policy::adjusted_priors(params, task, node.state, cands,
                                                config.length_lambda);
    node.edges.reserve(cands.size());
    for (std::size_t i = 0; i < cands.size(); ++i) {
        Edge e;
        e.action = cands[i];
        e.prior = priors[i];
        e.child = make_node(task, env::apply_step(node.state, cands[i]), params,
                            stage1_params, config);
        e.r = step_reward(node.reward, e.child->reward);
        e.q = e.r;
        node.edges.push_back(std::move(e));
    }
}

int puct_select(const TreeNode& node, const SearchConfig& config) {
    if (!node.expanded()) {
        throw std::logic_error("puct_select on an unexpanded node");
    }
    double best = -std::numeric_limits<double>::infinity();
    int best_i = 0;
    const double sqrt_n = std::sqrt(static_cast<double>(node.n_visits));
    for (int i = 0; i < static_cast<int>(node.edges.size()); ++i) {
        const Edge& e = node.edges[i];
        const double score =
            e.q + config.c_puct * e.prior * sqrt_n / (1.0 + e.child->n_visits);
        if (score > best + 1e-15) {
            best = score;
            best_i = i;
        }
    }
    return best_i;
}

double rollout(const TreeNode& node, const env::Task& task,
               const policy::PolicyParams& params,
               const policy::PolicyParams& stage1_params, const SearchConfig& config) {
    env::ReasoningState state = node.state;
    while (env::terminal_status(task, state) == env::TerminalStatus::Intermediate) {
        const auto cands = env::candidate_actions(task, state, config.K);
        const auto adj = policy::adjusted_priors(params, task, state, cands,
                                                 config.length_lambda);
        state = env::apply_step(state, cands[policy::argmax_index(adj)]);
    }
    return make_node(task, std::move(state), params, stage1_params, config)->reward;
}

void backup(std::vector<std::pair<TreeNode*, int>>& path, TreeNode& leaf,
            double leaf_value, const SearchConfig& config) {
    double value = leaf_value;
    leaf.n_visits += 1;
    leaf.value_sum += value;
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        TreeNode* parent = it->first;
        Edge& e = parent->edges[it->second];
        value = e.r + config.gamma * value;
        parent->n_visits += 1;
        parent->value_sum += value;
        e.q = e.r + config.gamma * e.child->value();
    }
}

SearchTree run_search(const env::Task& task, env::ReasoningState root_state,
                      const policy::PolicyParams& policy_params,
                      const policy::PolicyParams& stage1_params,
                      const SearchConfig& config, std::uint64_t seed) {
    if (config.budget <= 0) {
        throw std::invalid_argument("search budget must be positive");
    }
    if (env::terminal_status(task, root_state) != env::TerminalStatus::Intermediate) {
        throw std::invalid_argument("root state is already terminal");
    }
    SearchTree tree;
    tree.task_id = task.id;
    tree.config = config;
    tree.seed = seed;
    tree.root = make_node(task, std::move(root_state), policy_params, stage1_params,
                          config);
    for (int sim = 0; sim < config.budget; ++sim) {
        TreeNode* node = tree.root.get();
        std::vector<std::pair<TreeNode*, int>> path;
        while (node->expanded()) {
            const int i = puct_select(*node, config);
            path.emplace_back(node, i);
            node = node->edges[i].child.get();
        }
        double leaf_value = 0.0;
        if (node->terminal()) {
            leaf_value = node->reward;
        } else {
            expand(*node, task, policy_params, stage1_params, config);
            std::vector<double> priors;
            priors.reserve(node->edges.size());
            for (const Edge& e : node->edges) priors.push_back(e.prior);
            const Edge& top = node->edges[policy::argmax_index(priors)];
            // equals a greedy rollout from `node` itself: the descent's first
            // step is the highest-prior child, already created by expand
            leaf_value = top.child->terminal()
                             ? top.child->reward
                             : rollout(*top.child, task, policy_params,
                                       stage1_params, config);
        }
        backup(path, *node, leaf_value, config);
        tree.simulations += 1;
    }
    return tree;
}

}  // namespace steprl::search
