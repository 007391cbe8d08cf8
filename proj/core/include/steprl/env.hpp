#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace steprl::env {

inline constexpr char kOps[3] = {'+', '-', '*'};

/* One arithmetic chain task: operands o_0..o_{m-1}, operators op_0..op_{m-2},
 * and the oracle chain of intermediate values v_k = op_k(v_{k-1}, o_{k+1})
 * with v_{-1} = o_0. The final chain entry is the answer. */
struct Task {
    std::uint64_t id = 0;
    std::vector<int> operands;
    std::vector<char> operators;
    std::vector<long long> oracle_chain;
    long long oracle_answer = 0;

    [[nodiscard]] int difficulty() const { return static_cast<int>(operands.size()); }
};

/* Partial solution: the values claimed for steps 0..depth-1. */
struct ReasoningState {
    std::uint64_t task_id = 0;
    std::vector<long long> claimed;

    [[nodiscard]] int depth() const { return static_cast<int>(claimed.size()); }
};

/* A candidate next step: the claimed value, its decimal rendering, and the
 * rendering's character count (sign included). */
struct StepAction {
    long long value = 0;
    std::string rendering;

    [[nodiscard]] int length() const { return static_cast<int>(rendering.size()); }
};

enum class TerminalStatus { Intermediate, CorrectTerminal, IncorrectTerminal };

long long apply_op(char op, long long a, long long b);

/* Value the next step builds on: the last claimed value, or the first
 * operand when nothing has been claimed yet. */
long long prev_value(const Task& task, const ReasoningState& state);

/* The locally consistent value for the next step given what was claimed. */
long long expected_next(const Task& task, const ReasoningState& state);

StepAction make_action(long long value);

/* Deterministic task from (seed, difficulty). difficulty = operand count,
 * must be in [2, 6]. */
Task generate_task(std::uint64_t seed, int difficulty);

/* Recompute the oracle chain from operands and operators. */
std::vector<long long> compute_chain(const std::vector<int>& operands,
                                     const std::vector<char>& operators);

/* K candidate next steps. Contains the locally consistent value exactly once;
 * the rest are near-miss, sign-flip and wrong-operator distractors, padded
 * with wider near-misses when dedup runs short. Order is a deterministic
 * shuffle keyed by (task, state) so position carries no information. */
std::vector<StepAction> candidate_actions(const Task& task,
                                          const ReasoningState& state, int K);

ReasoningState apply_step(const ReasoningState& state, const StepAction& action);

/* Intermediate until m-1 steps are claimed, then correct iff the last
 * claimed value equals the oracle answer. Throws std::invalid_argument when
 * the state's task_id does not match the task. */
TerminalStatus terminal_status(const Task& task, const ReasoningState& state);

/* The answer checker: 1 iff response_answer equals the oracle answer, else 0. */
int oracle_reward(long long response_answer, const Task& task);

/* +1 / -1 / 0 for correct-terminal / incorrect-terminal / intermediate. */
int outcome_score(const Task& task, const ReasoningState& state);

}  // namespace steprl::env
