/*
 * Command-line driver for the steprl training pipeline.
 *
 * Subcommands:
 *   gen-tasks     write a line-delimited task file
 *   stage1        self-correction training (policy gradient + KL anchor)
 *   stage2        search-guided preference optimization
 *   eval          greedy evaluation of a checkpoint on the benchmark
 *   ablate        train and compare the studied variants across seeds
 *   search-debug  dump one search tree node by node
 *   run           full pipeline: stages, evaluation, manifest
 *
 * Output directory resolution: --out if given, else $STEPRL_OUT, else
 * ./steprl-out.
 */

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "steprl/checkpoint.hpp"
#include "steprl/config.hpp"
#include "steprl/metrics.hpp"
#include "steprl/pipeline.hpp"
#include "steprl/rng.hpp"
#include "steprl/textio.hpp"

namespace {

namespace fs = std::filesystem;
using steprl::iolayer::RunConfig;

struct CommonArgs {
    std::string config_path;
    std::uint64_t seed = 1;
    std::string out_dir;
    std::string variant;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Config file (INI-style)");
    cmd->add_option("--seed", args.seed, "Run seed")->capture_default_str();
    cmd->add_option("--out", args.out_dir,
                    "Output directory (default: $STEPRL_OUT, then ./steprl-out)");
}

RunConfig resolve_config(const CommonArgs& args) {
    if (args.config_path.empty()) return RunConfig{};
    return steprl::iolayer::load_config(args.config_path);
}

fs::path resolve_out(const CommonArgs& args) {
    fs::path out;
    if (!args.out_dir.empty()) {
        out = args.out_dir;
    } else if (const char* env = std::getenv("STEPRL_OUT"); env != nullptr && *env) {
        out = env;
    } else {
        out = "steprl-out";
    }
    fs::create_directories(out);
    return out;
}

void write_config_dump(const RunConfig& config, const fs::path& out) {
    std::ofstream f(out / "config.ini", std::ios::trunc);
    f << steprl::iolayer::dump_config(config);
}

int cmd_gen_tasks(const CommonArgs& args) {
    const RunConfig config = resolve_config(args);
    const fs::path out = resolve_out(args);
    const steprl::rng::SplitRng root = steprl::rng::SplitRng(args.seed).split("tasks");
    std::vector<steprl::env::Task> tasks;
    tasks.reserve(config.task_count);
    for (int i = 0; i < config.task_count; ++i) {
        tasks.push_back(steprl::env::generate_task(
            root.split(static_cast<std::uint64_t>(i)).next(),
            config.task_difficulties[i % config.task_difficulties.size()]));
    }
    steprl::iolayer::save_tasks(out / "tasks.jsonl", tasks);
    write_config_dump(config, out);
    std::cout << "wrote " << tasks.size() << " tasks to " << (out / "tasks.jsonl")
              << "\n";
    return 0;
}

int cmd_stage1(const CommonArgs& args) {
    const RunConfig config = resolve_config(args);
    const fs::path out = resolve_out(args);
    steprl::iolayer::MetricsWriter metrics(out / "stage1_metrics.jsonl");
    const steprl::policy::PolicyParams initial;
    const auto result = steprl::selfcorrect::run_stage1(initial, config.stage1, args.seed);
    for (const auto& im : result.iterations) {
        metrics.emit("stage1", im.iteration, args.seed,
                     {{"mean_turn1_reward", im.mean_turn1_reward},
                      {"mean_turn2_reward", im.mean_turn2_reward},
                      {"mean_kl", im.mean_kl}});
    }
    steprl::iolayer::save_checkpoint(out / "stage1.ckpt", result.params, "stage1",
                                     args.seed);
    steprl::iolayer::save_checkpoint(out / "final.ckpt", result.params, "final",
                                     args.seed);
    write_config_dump(config, out);
    std::cout << "stage1 done: head fit accuracy " << result.final_head_accuracy
              << ", checkpoint " << (out / "stage1.ckpt") << "\n";
    return 0;
}

int cmd_stage2(const CommonArgs& args, const std::string& init_ckpt,
               const std::string& stage1_ckpt) {
    const RunConfig config = resolve_config(args);
    const fs::path out = resolve_out(args);
    steprl::policy::PolicyParams initial;
    if (!init_ckpt.empty()) {
        initial = steprl::iolayer::load_checkpoint(init_ckpt).params;
    }
    steprl::policy::PolicyParams verify_source = initial;
    if (!stage1_ckpt.empty()) {
        verify_source = steprl::iolayer::load_checkpoint(stage1_ckpt).params;
    }
    const auto result = steprl::prefopt::run_stage2(initial, verify_source, args.seed,
                                                    config.stage2, config.search);
    steprl::iolayer::MetricsWriter metrics(out / "stage2_metrics.jsonl");
    for (const auto& rm : result.rounds) {
        metrics.emit("stage2", rm.round, args.seed,
                     {{"pair_count", static_cast<double>(rm.pair_count)},
                      {"mean_loss", rm.mean_loss},
                      {"heldout_accuracy", rm.heldout_accuracy}});
    }
    steprl::iolayer::save_checkpoint(out / "stage2.ckpt", result.params, "stage2",
                                     args.seed);
    steprl::iolayer::save_checkpoint(out / "final.ckpt", result.params, "final",
                                     args.seed);
    write_config_dump(config, out);
    std::cout << "stage2 done: " << result.total_pairs << " pairs, checkpoint "
              << (out / "stage2.ckpt") << "\n";
    return 0;
}

int cmd_eval(const CommonArgs& args, const std::string& ckpt_path) {
    const RunConfig config = resolve_config(args);
    const fs::path out = resolve_out(args);
    const fs::path ckpt = ckpt_path.empty() ? out / "final.ckpt" : fs::path(ckpt_path);
    const auto checkpoint = steprl::iolayer::load_checkpoint(ckpt);
    const auto bench = steprl::pipeline::benchmark_tasks(
        config.benchmark_seed, config.benchmark_size, config.benchmark_difficulties);
    const auto outcomes = steprl::pipeline::evaluate_outcomes(
        checkpoint.params, bench, config.candidate_count, config.eval_turn2);
    steprl::iolayer::save_outcomes(out / "outcomes.jsonl", outcomes);
    const auto report = steprl::pipeline::report_from_outcomes(
        "eval", args.seed, steprl::iolayer::load_outcomes(out / "outcomes.jsonl"));
    std::cout << "accuracy " << report.accuracy;
    if (report.has_turn2) std::cout << "  turn2 " << report.turn2_accuracy;
    std::cout << "  (" << report.task_count << " tasks, checkpoint role '"
              << checkpoint.header.role << "')\n";
    return 0;
}

int cmd_ablate(const CommonArgs& args, std::uint64_t base_seed) {
    RunConfig config = resolve_config(args);
    if (!args.variant.empty()) {
        steprl::pipeline::parse_variant(args.variant);
        config.ablation_variants = {args.variant};
    }
    const fs::path out = resolve_out(args);
    const auto reports = steprl::pipeline::run_ablation(config, base_seed, out);
    for (const auto& report : reports) {
        for (std::size_t i = 0; i < report.seeds.size(); ++i) {
            std::cout << report.variant << " seed " << report.seeds[i]
                      << ": accuracy " << report.per_seed_accuracy[i];
            if (report.has_turn2) {
                std::cout << " turn2 " << report.per_seed_turn2_accuracy[i];
            }
            std::cout << "\n";
        }
        std::cout << "median " << report.variant << ": " << report.median_accuracy
                  << "\n";
    }
    return 0;
}

int cmd_search_debug(const CommonArgs& args, int difficulty,
                     const std::string& ckpt_path, const std::string& stage1_ckpt) {
    const RunConfig config = resolve_config(args);
    const fs::path out = resolve_out(args);
    steprl::policy::PolicyParams params;
    if (!ckpt_path.empty()) {
        params = steprl::iolayer::load_checkpoint(ckpt_path).params;
    }
    steprl::policy::PolicyParams verify_source = params;
    if (!stage1_ckpt.empty()) {
        verify_source = steprl::iolayer::load_checkpoint(stage1_ckpt).params;
    }
    const auto task = steprl::env::generate_task(
        steprl::rng::SplitRng(args.seed).split("search-debug").next(), difficulty);
    const auto tree = steprl::search::run_search(
        task, steprl::env::ReasoningState{task.id, {}}, params, verify_source,
        config.search, args.seed);
    steprl::iolayer::save_tree_dump(out / "tree.jsonl", tree);

    std::cout << "task " << task.id << " difficulty " << difficulty << " answer "
              << task.oracle_answer << "\n";
    std::cout << "root visits " << tree.root->n_visits << " value "
              << tree.root->value() << "\n";
    for (const auto& e : tree.root->edges) {
        std::cout << "  action " << e.action.value << "  q " << e.q << "  prior "
                  << e.prior << "  visits " << e.child->n_visits << "\n";
    }
    std::cout << "tree dump: " << (out / "tree.jsonl") << "\n";
    return 0;
}

int cmd_run(const CommonArgs& args) {
    RunConfig config = resolve_config(args);
    if (!args.variant.empty()) {
        config = steprl::pipeline::variant_config(
            config, steprl::pipeline::parse_variant(args.variant));
    }
    const fs::path out = resolve_out(args);
    const int rc = steprl::pipeline::run_full(config, args.seed, out);
    std::cout << "run complete, artifacts in " << out << "\n";
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"steprl: step-level search and self-correction trainer"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string init_ckpt;
    std::string stage1_ckpt;
    std::string eval_ckpt;
    int debug_difficulty = 3;

    CLI::App* gen = app.add_subcommand("gen-tasks", "Write a task file");
    add_common(gen, args);

    CLI::App* s1 = app.add_subcommand("stage1", "Run self-correction training");
    add_common(s1, args);

    CLI::App* s2 = app.add_subcommand("stage2", "Run search-guided preference tuning");
    add_common(s2, args);
    s2->add_option("--init-checkpoint", init_ckpt,
                   "Starting parameters (default: zero-initialized)");
    s2->add_option("--stage1-checkpoint", stage1_ckpt,
                   "Verification head source (default: the starting parameters)");

    CLI::App* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
    add_common(ev, args);
    ev->add_option("--checkpoint", eval_ckpt, "Checkpoint path (default: OUT/final.ckpt)");

    std::uint64_t ablate_base_seed = 0;
    CLI::App* ab = app.add_subcommand("ablate", "Train and compare variants");
    ab->add_option("--config", args.config_path, "Config file (INI-style)");
    ab->add_option("--seed", ablate_base_seed,
                   "Offset added to each configured ablation seed")
        ->capture_default_str();
    ab->add_option("--out", args.out_dir,
                   "Output directory (default: $STEPRL_OUT, then ./steprl-out)");
    ab->add_option("--variant", args.variant,
                   "Restrict to one variant (baseline, isc_only, mcts_dpo_only, ours)");

    CLI::App* sd = app.add_subcommand("search-debug", "Dump one search tree");
    add_common(sd, args);
    sd->add_option("--difficulty", debug_difficulty, "Task difficulty")
        ->capture_default_str();
    sd->add_option("--checkpoint", eval_ckpt, "Policy checkpoint (default: zeros)");
    sd->add_option("--stage1-checkpoint", stage1_ckpt,
                   "Verification head source (default: the policy checkpoint)");

    CLI::App* rn = app.add_subcommand("run", "Full pipeline run");
    add_common(rn, args);
    rn->add_option("--variant", args.variant,
                   "Apply a variant's stage toggles before running");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_tasks(args);
        if (s1->parsed()) return cmd_stage1(args);
        if (s2->parsed()) return cmd_stage2(args, init_ckpt, stage1_ckpt);
        if (ev->parsed()) return cmd_eval(args, eval_ckpt);
        if (ab->parsed()) return cmd_ablate(args, ablate_base_seed);
        if (sd->parsed()) return cmd_search_debug(args, debug_difficulty, eval_ckpt,
                                                  stage1_ckpt);
        if (rn->parsed()) return cmd_run(args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
