#include "steprl/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "steprl/checkpoint.hpp"
#include "steprl/rng.hpp"

namespace steprl::pipeline {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void emit_stage1_metrics(iolayer::MetricsWriter* metrics, std::uint64_t seed,
                         const selfcorrect::Stage1Result& result) {
    if (metrics == nullptr) return;
    for (const auto& im : result.iterations) {
        metrics->emit("stage1", im.iteration, seed,
                      {{"mean_turn1_reward", im.mean_turn1_reward},
                       {"mean_turn2_reward", im.mean_turn2_reward},
                       {"mean_kl", im.mean_kl}});
    }
    metrics->emit("stage1_head", 0, seed,
                  {{"initial_fit_accuracy", result.initial_head_accuracy},
                   {"final_fit_accuracy", result.final_head_accuracy}});
}

void emit_stage2_metrics(iolayer::MetricsWriter* metrics, std::uint64_t seed,
                         const prefopt::Stage2Result& result) {
    if (metrics == nullptr) return;
    for (const auto& rm : result.rounds) {
        metrics->emit("stage2", rm.round, seed,
                      {{"pair_count", static_cast<double>(rm.pair_count)},
                       {"mean_loss", rm.mean_loss},
                       {"heldout_accuracy", rm.heldout_accuracy}});
    }
}

}  // namespace

Variant parse_variant(const std::string& name) {
    if (name == "baseline") return Variant::Baseline;
    if (name == "isc_only") return Variant::IscOnly;
    if (name == "mcts_dpo_only") return Variant::MctsDpoOnly;
    if (name == "ours") return Variant::Ours;
    throw std::invalid_argument(
        "unknown variant '" + name +
        "' (expected baseline, isc_only, mcts_dpo_only, or ours)");
}

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::Baseline: return "baseline";
        case Variant::IscOnly: return "isc_only";
        case Variant::MctsDpoOnly: return "mcts_dpo_only";
        case Variant::Ours: return "ours";
    }
    return "unknown";
}

std::vector<env::Task> benchmark_tasks(std::uint64_t seed, int count,
                                       const std::vector<int>& difficulties) {
    if (difficulties.empty()) throw std::invalid_argument("empty difficulty list");
    const rng::SplitRng root = rng::SplitRng(seed).split("bench");
    std::vector<env::Task> tasks;
    tasks.reserve(count);
    for (int i = 0; i < count; ++i) {
        tasks.push_back(
            env::generate_task(root.split(static_cast<std::uint64_t>(i)).next(),
                               difficulties[i % difficulties.size()]));
    }
    return tasks;
}

double evaluate(const policy::PolicyParams& params, const std::vector<env::Task>& tasks,
                int K) {
    return policy::greedy_accuracy(params, tasks, K);
}

std::vector<iolayer::TaskOutcome> evaluate_outcomes(const policy::PolicyParams& params,
                                                    const std::vector<env::Task>& tasks,
                                                    int K, bool with_turn2) {
    std::vector<iolayer::TaskOutcome> outcomes;
    outcomes.reserve(tasks.size());
    for (const auto& task : tasks) {
        iolayer::TaskOutcome o;
        o.task_id = task.id;
        o.difficulty = task.difficulty();
        const env::ReasoningState first = policy::greedy_decode(params, task, K);
        o.final_answer = first.claimed.back();
        o.correct = o.final_answer == task.oracle_answer;
        if (with_turn2) {
            policy::RetryContext retry;
            retry.prev_steps = first.claimed;
            retry.prev_answer = first.claimed.back();
            retry.attempt_confidence = policy::self_eval(
                params, task, first, policy::EvalMode::AttemptCheck);
            for (std::size_t d = 0; d < first.claimed.size(); ++d) {
                const env::ReasoningState prefix{
                    task.id, std::vector<long long>(first.claimed.begin(),
                                                    first.claimed.begin() + d + 1)};
                retry.step_confidences.push_back(policy::self_eval(
                    params, task, prefix, policy::EvalMode::StepCheck));
            }
            const env::ReasoningState second =
                policy::greedy_decode(params, task, K, &retry);
            o.has_turn2 = true;
            o.turn2_final_answer = second.claimed.back();
            o.turn2_correct = o.turn2_final_answer == task.oracle_answer;
        }
        outcomes.push_back(o);
    }
    return outcomes;
}

OutcomeReport report_from_outcomes(const std::string& variant, std::uint64_t seed,
                                   const std::vector<iolayer::TaskOutcome>& outcomes) {
    if (outcomes.empty()) throw std::invalid_argument("no outcomes to report on");
    OutcomeReport report;
    report.variant = variant;
    report.seed = seed;
    report.task_count = static_cast<int>(outcomes.size());
    int hits = 0;
    int hits2 = 0;
    bool any_turn2 = true;
    for (const auto& o : outcomes) {
        hits += o.correct ? 1 : 0;
        any_turn2 = any_turn2 && o.has_turn2;
        hits2 += o.has_turn2 && o.turn2_correct ? 1 : 0;
    }
    report.accuracy = static_cast<double>(hits) / outcomes.size();
    report.has_turn2 = any_turn2;
    if (any_turn2) {
        report.turn2_accuracy = static_cast<double>(hits2) / outcomes.size();
    }
    return report;
}

iolayer::RunConfig variant_config(const iolayer::RunConfig& base, Variant v) {
    iolayer::RunConfig cfg = base;
    switch (v) {
        case Variant::Baseline:
            cfg.stage1_enabled = false;
            cfg.stage2_enabled = false;
            cfg.search.verify_enabled = false;
            break;
        case Variant::IscOnly:
            cfg.stage1_enabled = true;
            cfg.stage2_enabled = false;
            cfg.search.verify_enabled = false;
            break;
        case Variant::MctsDpoOnly:
            cfg.stage1_enabled = false;
            cfg.stage2_enabled = true;
            cfg.search.verify_enabled = false;
            break;
        case Variant::Ours:
            cfg.stage1_enabled = true;
            cfg.stage2_enabled = true;
            cfg.search.verify_enabled = true;
            break;
    }
    return cfg;
}

policy::PolicyParams train_pipeline(const iolayer::RunConfig& config,
                                    std::uint64_t seed,
                                    iolayer::MetricsWriter* metrics) {
    policy::PolicyParams params;
    policy::PolicyParams verify_source = params;
    if (config.stage1_enabled) {
        const selfcorrect::Stage1Result s1 =
            selfcorrect::run_stage1(params, config.stage1, seed);
        emit_stage1_metrics(metrics, seed, s1);
        params = s1.params;
        verify_source = s1.params;
    }
    if (config.stage2_enabled) {
        const prefopt::Stage2Result s2 = prefopt::run_stage2(
            params, verify_source, seed, config.stage2, config.search);
        emit_stage2_metrics(metrics, seed, s2);
        params = s2.params;
    }
    return params;
}

double median(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("median of empty set");
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    if (n % 2 == 1) return xs[n / 2];
    return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

AblationConfig ablation_config(const iolayer::RunConfig& base) {
    AblationConfig ab;
    ab.variants = base.ablation_variants;
    ab.seeds = base.ablation_seeds;
    ab.benchmark_size = base.benchmark_size;
    ab.benchmark_seed = base.benchmark_seed;
    ab.benchmark_difficulties = base.benchmark_difficulties;
    ab.eval_turn2 = base.eval_turn2;
    return ab;
}

std::vector<EvalReport> run_ablation(const iolayer::RunConfig& base,
                                     std::uint64_t base_seed,
                                     const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const AblationConfig ab = ablation_config(base);
    const std::vector<env::Task> bench = benchmark_tasks(
        ab.benchmark_seed, ab.benchmark_size, ab.benchmark_difficulties);
    iolayer::save_tasks(out_dir / "benchmark.jsonl", bench);
    write_text(out_dir / "config_base.ini", iolayer::dump_config(base));

    std::vector<EvalReport> reports;
    iolayer::MetricsWriter metrics(out_dir / "ablation_metrics.jsonl");
    for (const auto& vname : ab.variants) {
        const Variant v = parse_variant(vname);
        const iolayer::RunConfig cfg = variant_config(base, v);
        write_text(out_dir / ("config_" + vname + ".ini"), iolayer::dump_config(cfg));
        std::string diff_text;
        for (const auto& d : iolayer::diff_configs(base, cfg)) diff_text += d + "\n";
        write_text(out_dir / ("config_" + vname + ".diff"), diff_text);

        EvalReport report;
        report.variant = vname;
        report.has_turn2 = ab.eval_turn2;
        for (std::uint64_t declared : ab.seeds) {
            const std::uint64_t seed = base_seed + declared;
            const policy::PolicyParams params = train_pipeline(cfg, seed, &metrics);
            const auto outcomes =
                evaluate_outcomes(params, bench, cfg.candidate_count, ab.eval_turn2);
            const auto outcome_path =
                out_dir / ("outcomes_" + vname + "_seed" + std::to_string(seed) +
                           ".jsonl");
            iolayer::save_outcomes(outcome_path, outcomes);
            const OutcomeReport per_seed =
                report_from_outcomes(vname, seed, iolayer::load_outcomes(outcome_path));

            report.seeds.push_back(seed);
            report.per_seed_accuracy.push_back(per_seed.accuracy);
            report.has_turn2 = report.has_turn2 && per_seed.has_turn2;
            report.per_seed_turn2_accuracy.push_back(per_seed.turn2_accuracy);
            metrics.emit("ablation_eval", static_cast<long long>(seed), seed,
                         {{"accuracy", per_seed.accuracy},
                          {"turn2_accuracy", per_seed.turn2_accuracy}});
        }
        report.median_accuracy = median(report.per_seed_accuracy);
        if (report.has_turn2) {
            report.median_turn2_accuracy = median(report.per_seed_turn2_accuracy);
        }
        reports.push_back(std::move(report));
    }

    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    nlohmann::ordered_json medians;
    for (const auto& report : reports) {
        for (std::size_t i = 0; i < report.seeds.size(); ++i) {
            nlohmann::ordered_json j;
            j["variant"] = report.variant;
            j["seed"] = report.seeds[i];
            j["accuracy"] = report.per_seed_accuracy[i];
            if (report.has_turn2) j["turn2_accuracy"] = report.per_seed_turn2_accuracy[i];
            rows.push_back(std::move(j));
        }
        medians[report.variant] = report.median_accuracy;
    }
    nlohmann::ordered_json top;
    top["rows"] = std::move(rows);
    top["median_accuracy"] = std::move(medians);
    write_text(out_dir / "ablation_report.json", top.dump(2) + "\n");
    return reports;
}

int run_full(const iolayer::RunConfig& config, std::uint64_t seed,
             const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::string config_dump = iolayer::dump_config(config);
    write_text(out_dir / "config.ini", config_dump);

    const std::vector<env::Task> bench = benchmark_tasks(
        config.benchmark_seed, config.benchmark_size, config.benchmark_difficulties);
    iolayer::save_tasks(out_dir / "benchmark.jsonl", bench);

    iolayer::MetricsWriter metrics(out_dir / "metrics.jsonl");
    policy::PolicyParams params;
    policy::PolicyParams verify_source = params;
    std::vector<std::string> artifacts = {"config.ini", "benchmark.jsonl",
                                          "metrics.jsonl"};

    if (config.stage1_enabled) {
        const selfcorrect::Stage1Result s1 =
            selfcorrect::run_stage1(params, config.stage1, seed);
        emit_stage1_metrics(&metrics, seed, s1);
        params = s1.params;
        verify_source = s1.params;
        iolayer::save_checkpoint(out_dir / "stage1.ckpt", params, "stage1", seed);
        artifacts.push_back("stage1.ckpt");
    }
    if (config.stage2_enabled) {
        const prefopt::Stage2Result s2 = prefopt::run_stage2(
            params, verify_source, seed, config.stage2, config.search);
        emit_stage2_metrics(&metrics, seed, s2);
        params = s2.params;
        iolayer::save_checkpoint(out_dir / "stage2.ckpt", params, "stage2", seed);
        artifacts.push_back("stage2.ckpt");
    }
    iolayer::save_checkpoint(out_dir / "final.ckpt", params, "final", seed);
    artifacts.push_back("final.ckpt");

    const auto outcomes =
        evaluate_outcomes(params, bench, config.candidate_count, config.eval_turn2);
    iolayer::save_outcomes(out_dir / "outcomes.jsonl", outcomes);
    artifacts.push_back("outcomes.jsonl");
    const OutcomeReport report = report_from_outcomes(
        "run", seed, iolayer::load_outcomes(out_dir / "outcomes.jsonl"));
    metrics.emit("eval", 0, seed,
                 {{"accuracy", report.accuracy},
                  {"turn2_accuracy", report.has_turn2 ? report.turn2_accuracy : 0.0}});

    nlohmann::ordered_json manifest;
    manifest["config_fnv1a"] = rng::fnv1a(config_dump);
    manifest["seed"] = seed;
    manifest["checkpoint_version"] = iolayer::kCheckpointVersion;
    manifest["task_count"] = static_cast<int>(bench.size());
    manifest["accuracy"] = report.accuracy;
    if (report.has_turn2) manifest["turn2_accuracy"] = report.turn2_accuracy;
    manifest["artifacts"] = artifacts;
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
    return 0;
}

}  // namespace steprl::pipeline
