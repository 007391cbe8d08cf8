#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "steprl/config.hpp"
#include "steprl/metrics.hpp"
#include "steprl/textio.hpp"

namespace steprl::pipeline {

enum class Variant { Baseline, IscOnly, MctsDpoOnly, Ours };

Variant parse_variant(const std::string& name);
std::string variant_name(Variant v);

/* The shared evaluation set: task i is drawn from the "bench" stream of
 * `seed` with difficulties cycling through `difficulties`. Every variant and
 * seed sees byte-identical tasks. */
std::vector<env::Task> benchmark_tasks(std::uint64_t seed, int count,
                                       const std::vector<int>& difficulties);

/* Greedy accuracy of `params` on `tasks`. */
double evaluate(const policy::PolicyParams& params, const std::vector<env::Task>& tasks,
                int K);

/* Per-task outcomes, optionally including a confidence-conditioned second
 * attempt. */
std::vector<iolayer::TaskOutcome> evaluate_outcomes(const policy::PolicyParams& params,
                                                    const std::vector<env::Task>& tasks,
                                                    int K, bool with_turn2);

struct OutcomeReport {
    std::string variant;
    std::uint64_t seed = 0;
    int task_count = 0;
    double accuracy = 0.0;
    bool has_turn2 = false;
    double turn2_accuracy = 0.0;
};

/* Accuracies recomputed from persisted outcome records. */
OutcomeReport report_from_outcomes(const std::string& variant, std::uint64_t seed,
                                   const std::vector<iolayer::TaskOutcome>& outcomes);

/* The four studied configurations expressed as config toggles on a base
 * config: which stages run and whether search uses the verification bonus. */
iolayer::RunConfig variant_config(const iolayer::RunConfig& base, Variant v);

/* Train from zero-initialized parameters under `config`'s stage toggles.
 * Stage 2's verification head comes from stage 1 when stage 1 ran, otherwise
 * from the untrained initial parameters. Per-iteration and per-round
 * measurements go to `metrics` when given. */
policy::PolicyParams train_pipeline(const iolayer::RunConfig& config,
                                    std::uint64_t seed,
                                    iolayer::MetricsWriter* metrics);

struct AblationConfig {
    std::vector<std::string> variants = {"baseline", "isc_only", "mcts_dpo_only", "ours"};
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    int benchmark_size = 500;
    std::uint64_t benchmark_seed = 777;
    std::vector<int> benchmark_difficulties = {2, 3};
    bool eval_turn2 = true;
};

/* The ablation settings carried by a run config's pipeline section. */
AblationConfig ablation_config(const iolayer::RunConfig& base);

/* One report per variant across all seeds. */
struct EvalReport {
    std::string variant;
    std::vector<std::uint64_t> seeds;
    std::vector<double> per_seed_accuracy;
    double median_accuracy = 0.0;
    bool has_turn2 = false;
    std::vector<double> per_seed_turn2_accuracy;
    double median_turn2_accuracy = 0.0;
};

double median(std::vector<double> xs);

/* Train and evaluate every configured variant on every configured seed
 * against the shared benchmark. The effective training seed for declared
 * seed s is base_seed + s. All artifacts (benchmark, per-variant effective
 * configs and their diffs against the base config, outcome logs, reports,
 * metrics) land in out_dir. */
std::vector<EvalReport> run_ablation(const iolayer::RunConfig& base,
                                     std::uint64_t base_seed,
                                     const std::filesystem::path& out_dir);

/* End-to-end run: benchmark generation, enabled training stages, evaluation,
 * checkpoints, metrics, effective config, and a manifest. Returns 0 on
 * success. */
int run_full(const iolayer::RunConfig& config, std::uint64_t seed,
             const std::filesystem::path& out_dir);

}  // namespace steprl::pipeline
