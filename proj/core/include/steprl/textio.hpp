#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "steprl/env.hpp"
#include "steprl/prefopt.hpp"
#include "steprl/search.hpp"
#include "steprl/selfcorrect.hpp"

namespace steprl::iolayer {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/* All files here are line-delimited JSON, one record per line.
 * Loaders name the file and line number in every error. */

std::string task_to_json(const env::Task& task);
env::Task task_from_json(const std::string& line);

void save_tasks(const std::filesystem::path& path, const std::vector<env::Task>& tasks);

/* Recomputes each task's oracle chain from its operands and operators and
 * rejects records whose stored answer disagrees. */
std::vector<env::Task> load_tasks(const std::filesystem::path& path);

std::string pair_to_json(const prefopt::PreferencePair& pair);
prefopt::PreferencePair pair_from_json(const std::string& line);

void save_pairs(const std::filesystem::path& path,
                const std::vector<prefopt::PreferencePair>& pairs);
std::vector<prefopt::PreferencePair> load_pairs(const std::filesystem::path& path);

std::string episode_to_json(const selfcorrect::EpisodeTrace& trace);
selfcorrect::EpisodeTrace episode_from_json(const std::string& line);

void save_episodes(const std::filesystem::path& path,
                   const std::vector<selfcorrect::EpisodeTrace>& traces);
std::vector<selfcorrect::EpisodeTrace> load_episodes(const std::filesystem::path& path);

/* Per-task evaluation outcome, the persisted ground truth that reports are
 * recomputed from. */
struct TaskOutcome {
    std::uint64_t task_id = 0;
    int difficulty = 0;
    long long final_answer = 0;
    bool correct = false;
    bool has_turn2 = false;
    long long turn2_final_answer = 0;
    bool turn2_correct = false;
};

std::string outcome_to_json(const TaskOutcome& outcome);
TaskOutcome outcome_from_json(const std::string& line);

void save_outcomes(const std::filesystem::path& path,
                   const std::vector<TaskOutcome>& outcomes);
std::vector<TaskOutcome> load_outcomes(const std::filesystem::path& path);

/* One record per tree node in breadth-first order: statistics, composite
 * reward terms, and the outgoing edges with their visit counts and values. */
std::string dump_tree(const search::SearchTree& tree);

void save_tree_dump(const std::filesystem::path& path, const search::SearchTree& tree);

}  // namespace steprl::iolayer
