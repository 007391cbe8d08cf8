#include "steprl/textio.hpp"

#include <deque>
#include <fstream>

#include "json.hpp"

namespace steprl::iolayer {

namespace {

using Json = nlohmann::ordered_json;

template <typename T, typename ToJson>
void save_lines(const std::filesystem::path& path, const std::vector<T>& items,
                ToJson to_json) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot open for writing: " + path.string());
    for (const auto& item : items) out << to_json(item) << "\n";
    if (!out) throw FormatError("write failed: " + path.string());
}

template <typename T, typename FromJson>
std::vector<T> load_lines(const std::filesystem::path& path, FromJson from_json) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open: " + path.string());
    std::vector<T> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(from_json(line));
        } catch (const std::exception& e) {
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " +
                              e.what());
        }
    }
    return out;
}

}  // namespace

std::string task_to_json(const env::Task& task) {
    Json j;
    j["id"] = task.id;
    j["operands"] = task.operands;
    std::vector<std::string> ops;
    ops.reserve(task.operators.size());
    for (char op : task.operators) ops.emplace_back(1, op);
    j["operators"] = ops;
    j["oracle_answer"] = task.oracle_answer;
    return j.dump();
}

env::Task task_from_json(const std::string& line) {
    const Json j = Json::parse(line);
    env::Task task;
    task.id = j.at("id").get<std::uint64_t>();
    task.operands = j.at("operands").get<std::vector<int>>();
    for (const auto& op : j.at("operators")) {
        const auto s = op.get<std::string>();
        if (s.size() != 1 || (s[0] != '+' && s[0] != '-' && s[0] != '*')) {
            throw FormatError("bad operator '" + s + "'");
        }
        task.operators.push_back(s[0]);
    }
    if (task.operands.size() < 2 || task.operators.size() + 1 != task.operands.size()) {
        throw FormatError("operand/operator counts do not form a chain");
    }
    task.oracle_chain = env::compute_chain(task.operands, task.operators);
    task.oracle_answer = task.oracle_chain.back();
    const auto stored = j.at("oracle_answer").get<long long>();
    if (stored != task.oracle_answer) {
        throw FormatError("stored answer " + std::to_string(stored) +
                          " disagrees with recomputed chain (" +
                          std::to_string(task.oracle_answer) + ")");
    }
    return task;
}

void save_tasks(const std::filesystem::path& path, const std::vector<env::Task>& tasks) {
    save_lines(path, tasks, task_to_json);
}

std::vector<env::Task> load_tasks(const std::filesystem::path& path) {
    return load_lines<env::Task>(path, task_from_json);
}

std::string pair_to_json(const prefopt::PreferencePair& pair) {
    Json j;
    j["task_id"] = pair.task_id;
    j["prefix"] = pair.prefix;
    j["chosen"] = pair.chosen;
    j["rejected"] = pair.rejected;
    j["q_chosen"] = pair.q_chosen;
    j["q_rejected"] = pair.q_rejected;
    j["depth"] = pair.depth;
    return j.dump();
}

prefopt::PreferencePair pair_from_json(const std::string& line) {
    const Json j = Json::parse(line);
    prefopt::PreferencePair p;
    p.task_id = j.at("task_id").get<std::uint64_t>();
    p.prefix = j.at("prefix").get<std::vector<long long>>();
    p.chosen = j.at("chosen").get<long long>();
    p.rejected = j.at("rejected").get<long long>();
    p.q_chosen = j.at("q_chosen").get<double>();
    p.q_rejected = j.at("q_rejected").get<double>();
    p.depth = j.at("depth").get<int>();
    return p;
}

void save_pairs(const std::filesystem::path& path,
                const std::vector<prefopt::PreferencePair>& pairs) {
    save_lines(path, pairs, pair_to_json);
}

std::vector<prefopt::PreferencePair> load_pairs(const std::filesystem::path& path) {
    return load_lines<prefopt::PreferencePair>(path, pair_from_json);
}

namespace {

Json retry_to_json(const policy::RetryContext& retry) {
    Json j;
    j["prev_steps"] = retry.prev_steps;
    j["prev_answer"] = retry.prev_answer;
    j["attempt_confidence"] = retry.attempt_confidence;
    j["step_confidences"] = retry.step_confidences;
    return j;
}

policy::RetryContext retry_from_json(const Json& j) {
    policy::RetryContext r;
    r.prev_steps = j.at("prev_steps").get<std::vector<long long>>();
    r.prev_answer = j.at("prev_answer").get<long long>();
    r.attempt_confidence = j.at("attempt_confidence").get<double>();
    r.step_confidences = j.at("step_confidences").get<std::vector<double>>();
    return r;
}

}  // namespace

std::string episode_to_json(const selfcorrect::EpisodeTrace& trace) {
    Json j;
    j["task_id"] = trace.task_id;
    j["total_reward"] = trace.total_reward;
    j["instruction_tags"] = trace.instruction_tags;
    Json attempts = Json::array();
    for (const auto& a : trace.attempts) {
        Json aj;
        aj["turn_index"] = a.turn_index;
        aj["steps"] = a.steps;
        aj["chosen_indices"] = a.chosen_indices;
        aj["step_log_probs"] = a.step_log_probs;
        aj["final_answer"] = a.final_answer;
        aj["reward"] = a.reward;
        if (a.retry) aj["retry"] = retry_to_json(*a.retry);
        attempts.push_back(std::move(aj));
    }
    j["attempts"] = std::move(attempts);
    return j.dump();
}

selfcorrect::EpisodeTrace episode_from_json(const std::string& line) {
    const Json j = Json::parse(line);
    selfcorrect::EpisodeTrace trace;
    trace.task_id = j.at("task_id").get<std::uint64_t>();
    trace.total_reward = j.at("total_reward").get<int>();
    trace.instruction_tags = j.at("instruction_tags").get<std::vector<int>>();
    for (const auto& aj : j.at("attempts")) {
        selfcorrect::AttemptRecord a;
        a.turn_index = aj.at("turn_index").get<int>();
        a.steps = aj.at("steps").get<std::vector<long long>>();
        a.chosen_indices = aj.at("chosen_indices").get<std::vector<int>>();
        a.step_log_probs = aj.at("step_log_probs").get<std::vector<double>>();
        a.final_answer = aj.at("final_answer").get<long long>();
        a.reward = aj.at("reward").get<int>();
        if (aj.contains("retry")) a.retry = retry_from_json(aj.at("retry"));
        trace.attempts.push_back(std::move(a));
    }
    return trace;
}

void save_episodes(const std::filesystem::path& path,
                   const std::vector<selfcorrect::EpisodeTrace>& traces) {
    save_lines(path, traces, episode_to_json);
}

std::vector<selfcorrect::EpisodeTrace> load_episodes(const std::filesystem::path& path) {
    return load_lines<selfcorrect::EpisodeTrace>(path, episode_from_json);
}

std::string outcome_to_json(const TaskOutcome& outcome) {
    Json j;
    j["task_id"] = outcome.task_id;
    j["difficulty"] = outcome.difficulty;
    j["final_answer"] = outcome.final_answer;
    j["correct"] = outcome.correct;
    if (outcome.has_turn2) {
        j["turn2_final_answer"] = outcome.turn2_final_answer;
        j["turn2_correct"] = outcome.turn2_correct;
    }
    return j.dump();
}

TaskOutcome outcome_from_json(const std::string& line) {
    const Json j = Json::parse(line);
    TaskOutcome o;
    o.task_id = j.at("task_id").get<std::uint64_t>();
    o.difficulty = j.at("difficulty").get<int>();
    o.final_answer = j.at("final_answer").get<long long>();
    o.correct = j.at("correct").get<bool>();
    if (j.contains("turn2_correct")) {
        o.has_turn2 = true;
        o.turn2_final_answer = j.at("turn2_final_answer").get<long long>();
        o.turn2_correct = j.at("turn2_correct").get<bool>();
    }
    return o;
}

void save_outcomes(const std::filesystem::path& path,
                   const std::vector<TaskOutcome>& outcomes) {
    save_lines(path, outcomes, outcome_to_json);
}

std::vector<TaskOutcome> load_outcomes(const std::filesystem::path& path) {
    return load_lines<TaskOutcome>(path, outcome_from_json);
}

std::string dump_tree(const search::SearchTree& tree) {
    std::string out;
    std::deque<const search::TreeNode*> queue{tree.root.get()};
    while (!queue.empty()) {
        const search::TreeNode* node = queue.front();
        queue.pop_front();
        Json j;
        j["depth"] = node->state.depth();
        j["claimed"] = node->state.claimed;
        j["visits"] = node->n_visits;
        j["value"] = node->value();
        j["reward"] = node->reward;
        j["oracle"] = node->o_score;
        j["consistency"] = node->c_score;
        j["verification"] = node->c_hat;
        Json edges = Json::array();
        for (const auto& e : node->edges) {
            Json ej;
            ej["action"] = e.action.value;
            ej["prior"] = e.prior;
            ej["q"] = e.q;
            ej["r"] = e.r;
            ej["child_visits"] = e.child->n_visits;
            edges.push_back(std::move(ej));
            queue.push_back(e.child.get());
        }
        j["edges"] = std::move(edges);
        out += j.dump();
        out += "\n";
    }
    return out;
}

void save_tree_dump(const std::filesystem::path& path, const search::SearchTree& tree) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot open for writing: " + path.string());
    out << dump_tree(tree);
    if (!out) throw FormatError("write failed: " + path.string());
}

}  // namespace steprl::iolayer
