#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "steprl/prefopt.hpp"
#include "steprl/search.hpp"
#include "steprl/selfcorrect.hpp"

namespace steprl::iolayer {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/* Everything the CLI and pipeline read. One candidate count is shared by
 * training and search; the loader propagates it into the nested configs. */
struct RunConfig {
    int candidate_count = 4;

    selfcorrect::Stage1Config stage1;
    prefopt::DpoConfig stage2;
    search::SearchConfig search;

    int task_count = 500;
    std::vector<int> task_difficulties = {2, 3};

    std::uint64_t benchmark_seed = 777;
    int benchmark_size = 500;
    std::vector<int> benchmark_difficulties = {2, 3};
    bool eval_turn2 = true;

    std::vector<std::uint64_t> ablation_seeds = {1, 2, 3};
    std::vector<std::string> ablation_variants = {"baseline", "isc_only",
                                                  "mcts_dpo_only", "ours"};

    bool stage1_enabled = true;
    bool stage2_enabled = true;
};

/* Parse INI-style text: [section] headers, key = value entries, # comments.
 * Unknown sections or keys and malformed lines raise ConfigError naming the
 * source (`name`) and line number. */
RunConfig parse_config(const std::string& text, const std::string& name);

RunConfig load_config(const std::filesystem::path& path);

/* Canonical text form of every setting, in a fixed order. parse_config on the
 * result reproduces the input config. */
std::string dump_config(const RunConfig& config);

/* One "section.key: old -> new" line per setting that differs. */
std::vector<std::string> diff_configs(const RunConfig& a, const RunConfig& b);

/* Shortest decimal rendering that parses back to the same double. */
std::string format_double(double x);

}  // namespace steprl::iolayer
