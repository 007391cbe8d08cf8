#include "steprl/env.hpp"

#include <algorithm>
#include <stdexcept>

#include "steprl/rng.hpp"

namespace steprl::env {

long long apply_op(char op, long long a, long long b) {
    switch (op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        default: throw std::invalid_argument(std::string("unknown operator: ") + op);
    }
}

long long prev_value(const Task& task, const ReasoningState& state) {
    return state.claimed.empty() ? task.operands.front() : state.claimed.back();
}

long long expected_next(const Task& task, const ReasoningState& state) {
    const int d = state.depth();
    return apply_op(task.operators[d], prev_value(task, state), task.operands[d + 1]);
}

StepAction make_action(long long value) {
    return StepAction{value, std::to_string(value)};
}

std::vector<long long> compute_chain(const std::vector<int>& operands,
                                     const std::vector<char>& operators) {
    std::vector<long long> chain;
    chain.reserve(operators.size());
    long long acc = operands.front();
    for (std::size_t k = 0; k < operators.size(); ++k) {
        acc = apply_op(operators[k], acc, operands[k + 1]);
        chain.push_back(acc);
    }
    return chain;
}

Task generate_task(std::uint64_t seed, int difficulty) {
    if (difficulty < 2 || difficulty > 6) {
        throw std::invalid_argument("task difficulty must be between 2 and 6");
    }
    rng::SplitRng r = rng::SplitRng(seed).split("gen-task").split(
        static_cast<std::uint64_t>(difficulty));
    Task task;
    task.operands.reserve(difficulty);
    for (int i = 0; i < difficulty; ++i) {
        task.operands.push_back(r.uniform_int(1, 9));
    }
    task.operators.reserve(difficulty - 1);
    for (int i = 0; i < difficulty - 1; ++i) {
        task.operators.push_back(kOps[r.bounded(3)]);
    }
    task.oracle_chain = compute_chain(task.operands, task.operators);
    task.oracle_answer = task.oracle_chain.back();
    task.id = rng::mix64((seed * rng::kGolden) ^ static_cast<std::uint64_t>(difficulty));
    return task;
}

std::vector<StepAction> candidate_actions(const Task& task,
                                          const ReasoningState& state, int K) {
    const int depth = state.depth();
    if (depth >= task.difficulty() - 1) {
        throw std::invalid_argument("no next step: state is already terminal");
    }
    if (K < 2) {
        throw std::invalid_argument("candidate count must be at least 2");
    }
    const long long prev = prev_value(task, state);
    const long long correct = expected_next(task, state);
    const long long s = correct >= prev ? 1 : -1;

    std::vector<long long> pool;
    pool.push_back(correct + s);
    pool.push_back(-correct);
    const char op = task.operators[depth];
    const long long operand = task.operands[depth + 1];
    for (char o : kOps) {
        if (o != op) pool.push_back(apply_op(o, prev, operand));
    }
    pool.push_back(correct - s);
    for (long long k = 2; static_cast<int>(pool.size()) < 4 * K; ++k) {
        pool.push_back(correct + k * s);
        pool.push_back(correct - k * s);
    }

    std::vector<long long> values;
    values.reserve(K);
    values.push_back(correct);
    for (long long v : pool) {
        if (static_cast<int>(values.size()) >= K) break;
        if (std::find(values.begin(), values.end(), v) == values.end()) {
            values.push_back(v);
        }
    }

    std::uint64_t key = task.id;
    key = rng::mix64(key ^ (static_cast<std::uint64_t>(depth + 1) * rng::kGolden));
    for (long long v : state.claimed) {
        key = rng::mix64(key ^ (static_cast<std::uint64_t>(v) * 0xBF58476D1CE4E5B9ull));
    }
    rng::SplitRng r(key);
    for (std::size_t i = values.size() - 1; i > 0; --i) {
        const std::size_t j = r.bounded(i + 1);
        std::swap(values[i], values[j]);
    }

    std::vector<StepAction> actions;
    actions.reserve(values.size());
    for (long long v : values) actions.push_back(make_action(v));
    return actions;
}

ReasoningState apply_step(const ReasoningState& state, const StepAction& action) {
    ReasoningState next = state;
    next.claimed.push_back(action.value);
    return next;
}

TerminalStatus terminal_status(const Task& task, const ReasoningState& state) {
    if (state.task_id != task.id) {
        throw std::invalid_argument("state does not belong to this task");
    }
    if (state.depth() < task.difficulty() - 1) return TerminalStatus::Intermediate;
    return state.claimed.back() == task.oracle_answer ? TerminalStatus::CorrectTerminal
                                                      : TerminalStatus::IncorrectTerminal;
}

int oracle_reward(long long response_answer, const Task& task) {
    return response_answer == task.oracle_answer ? 1 : 0;
}

int outcome_score(const Task& task, const ReasoningState& state) {
    switch (terminal_status(task, state)) {
        case TerminalStatus::CorrectTerminal: return 1;
        case TerminalStatus::IncorrectTerminal: return -1;
        case TerminalStatus::Intermediate: return 0;
    }
    return 0;
}

}  // namespace steprl::env
