#include "steprl/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace steprl::iolayer {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail_value(const std::string& what, const std::string& value) {
    throw ConfigError("expected " + what + ", got '" + value + "'");
}

long long parse_int(const std::string& v) {
    long long out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) fail_value("an integer", v);
    return out;
}

std::uint64_t parse_u64(const std::string& v) {
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) {
        fail_value("a non-negative integer", v);
    }
    return out;
}

double parse_double(const std::string& v) {
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) fail_value("a number", v);
    return out;
}

bool parse_bool(const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    fail_value("true or false", v);
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> parts;
    std::string cur;
    std::stringstream ss(v);
    while (std::getline(ss, cur, ',')) {
        const std::string t = trim(cur);
        if (t.empty()) fail_value("a comma-separated list", v);
        parts.push_back(t);
    }
    if (parts.empty()) fail_value("a non-empty list", v);
    return parts;
}

std::vector<int> parse_int_list(const std::string& v) {
    std::vector<int> out;
    for (const auto& p : split_list(v)) out.push_back(static_cast<int>(parse_int(p)));
    return out;
}

std::vector<std::uint64_t> parse_u64_list(const std::string& v) {
    std::vector<std::uint64_t> out;
    for (const auto& p : split_list(v)) out.push_back(parse_u64(p));
    return out;
}

template <typename T>
std::string join(const std::vector<T>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ",";
        if constexpr (std::is_same_v<T, std::string>) {
            out += xs[i];
        } else {
            out += std::to_string(xs[i]);
        }
    }
    return out;
}

selfcorrect::Baseline parse_baseline(const std::string& v) {
    if (v == "batch_mean") return selfcorrect::Baseline::BatchMean;
    if (v == "none") return selfcorrect::Baseline::None;
    fail_value("batch_mean or none", v);
}

std::string baseline_name(selfcorrect::Baseline b) {
    return b == selfcorrect::Baseline::BatchMean ? "batch_mean" : "none";
}

search::RolloutPolicy parse_rollout(const std::string& v) {
    if (v == "greedy_prior") return search::RolloutPolicy::GreedyPrior;
    fail_value("greedy_prior", v);
}

struct Binding {
    const char* section;
    const char* key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

const std::vector<Binding>& bindings() {
    static const std::vector<Binding> table = {
        {"env", "task_count",
         [](RunConfig& c, const std::string& v) {
             c.task_count = static_cast<int>(parse_int(v));
         },
         [](const RunConfig& c) { return std::to_string(c.task_count); }},
        {"env", "difficulties",
         [](RunConfig& c, const std::string& v) { c.task_difficulties = parse_int_list(v); },
         [](const RunConfig& c) { return join(c.task_difficulties); }},

        {"policy", "candidates",
         [](RunConfig& c, const std::string& v) {
             c.candidate_count = static_cast<int>(parse_int(v));
         },
         [](const RunConfig& c) { return std::to_string(c.candidate_count); }},

        {"search", "c_puct",
         [](RunConfig& c, const std::string& v) { c.search.c_puct = parse_double(v); },
         [](const RunConfig& c) { return format_double(c.search.c_puct); }},
        {"search", "length_lambda",
         [](RunConfig& c, const std::string& v) { c.search.length_lambda = parse_double(v); },
         [](const RunConfig& c) { return format_double(c.search.length_lambda); }},
        {"search", "budget",
         [](RunConfig& c, const std::string& v) {
             c.search.budget = static_cast<int>(parse_int(v));
         },
         [](const RunConfig& c) { return std::to_string(c.search.budget); }},
        {"search", "gamma",
         [](RunConfig& c, const std::string& v) { c.search.gamma = parse_double(v); },
         [](const RunConfig& c) { return format_double(c.search.gamma); }},
        {"search", "verify_enabled",
         [](RunConfig& c, const std::string& v) { c.search.verify_enabled = parse_bool(v); },
         [](const RunConfig& c) {
             return std::string(c.search.verify_enabled ? "true" : "false");
         }},
        {"search", "rollout_policy",
         [](RunConfig& c, const std::string& v) {
             c.search.rollout_policy = parse_rollout(v);
         },
         [](const RunConfig&) { return std::string("greedy_prior"); }},

        {"prefopt", "beta",
         [](RunConfig& c, const std::string& v) { c.stage2.beta = parse_double(v); },
         [](const RunConfig& c) { return format_double(c.stage2.beta); }},
        {"prefopt", "learning_rate",
         [](RunConfig& c, const std::string& v) { c.stage2.learning_rate = parse_double(v); },
         [](const RunConfig& c) { return format_double(c.stage2.learning_rate); }},
        {"prefopt", "rounds",
         [](RunConfig& c, const std::string& v) {
             c.stage2.rounds = static_cast<int>(parse_int(v));
         },
         [](const RunConfig& c) { return std::to_string(c.stage2.rounds); }},
        {"prefopt", "trees_per_round",
         [](RunConfig& c, const std::string& v) {
             c.stage2.trees_per_round = static_cast<int>(parse_int(v));
         },
         [](const RunConfig& c) { return std::to_string(c.stage2.trees_per_round); }},
        {"prefopt", "n_min",
         [](RunConfig& c, const std::string& v) {
             c.stage2.n_min = static_cast<int>(parse_int(v));
         },
         [](const RunConfig& c) { return std::to_string(c.stage2.n_min); }},
        {"prefopt", "delta",
         [](RunConfig& c, const std::string& v) { c.stage2.delta = parse_double(v); },
         [](const RunConfig& c) { return format_double(c.stage2.delta); }},
        {"prefopt", "batch_size",
         [](RunConfig& c, const std::string& v) {
             c.stage2.batch_size = static_cast<int>(parse_int(v));
         },
         [](const RunConfig& c) { return std::to_string(c.stage2.batch_size); }},
        {"prefopt", "fixed_reference",
         [](RunConfig& c, const std::string& v) { c.stage2.fixed_reference = parse_bool(v); },
         [](const RunConfig& c) {
             return std::string(c.stage2.fixed_reference ? "true" : "false");
         }},
        {"prefopt", "difficulties",
         [](RunConfig& c, const std::string& v) {
             c.stage2.difficulties = parse_int_list(v);
         },
         [](const RunConfig& c) { return join(c.stage2.difficulties); }},
        {"prefopt", "heldout_size",
         [](RunConfig& c, const std::string& v) {
             c.stage2.heldout_size = static_cast<int>(parse_int(v));
         },
         [](const RunConfig& c) { return std::to_string(c.stage2.heldout_size); }},

        {"selfcorrect", "retry_turns",
         [](RunConfig& c, const std::string& v) {
             c.stage1.retry_turns = static_cast<int>(parse_int(v));
         },
         [](const RunConfig& c) { return std::to_string(c.stage1.retry_turns); }},
        {"selfcorrect", "kl_coefficient",
         [](RunConfig& c, const std::string& v) { c.stage1.kl_coefficient = parse_double(v); },
         [](const RunConfig& c) { return format_double(c.stage1.kl_coefficient); }},
        {"selfcorrect", "learning_rate",
         [](RunConfig& c, const std::string& v) { c.stage1.learning_rate = parse_double(v); },
         [](const RunConfig& c) { return format_double(c.stage1.learning_rate); }},
        {"selfcorrect", "iterations",
         [](RunConfig& c, const std::string& v) {
             c.stage1.iterations = static_cast<int>(parse_int(v));
         },
         [](const RunConfig& c) { return std::to_string(c.stage1.iterations); }},
        {"selfcorrect", "batch_size",
         [](RunConfig& c, const std::string& v) {
             c.stage1.batch_size = static_cast<int>(parse_int(v));
         },
         [](const RunConfig& c) { return std::to_string(c.stage1.batch_size); }},
        {"selfcorrect", "baseline",
         [](RunConfig& c, const std::string& v) { c.stage1.baseline = parse_baseline(v); },
         [](const RunConfig& c) { return baseline_name(c.stage1.baseline); }},
        {"selfcorrect", "difficulties",
         [](RunConfig& c, const std::string& v) {
             c.stage1.difficulties = parse_int_list(v);
         },
         [](const RunConfig& c) { return join(c.stage1.difficulties); }},
        {"selfcorrect", "eval_fit_episodes",
         [](RunConfig& c, const std::string& v) {
             c.stage1.eval_fit_episodes = static_cast<int>(parse_int(v));
         },
         [](const RunConfig& c) { return std::to_string(c.stage1.eval_fit_episodes); }},
        {"selfcorrect", "eval_fit_iterations",
         [](RunConfig& c, const std::string& v) {
             c.stage1.eval_fit_iterations = static_cast<int>(parse_int(v));
         },
         [](const RunConfig& c) { return std::to_string(c.stage1.eval_fit_iterations); }},
        {"selfcorrect", "eval_fit_learning_rate",
         [](RunConfig& c, const std::string& v) {
             c.stage1.eval_fit_learning_rate = parse_double(v);
         },
         [](const RunConfig& c) {
             return format_double(c.stage1.eval_fit_learning_rate);
         }},

        {"pipeline", "benchmark_seed",
         [](RunConfig& c, const std::string& v) { c.benchmark_seed = parse_u64(v); },
         [](const RunConfig& c) { return std::to_string(c.benchmark_seed); }},
        {"pipeline", "benchmark_size",
         [](RunConfig& c, const std::string& v) {
             c.benchmark_size = static_cast<int>(parse_int(v));
         },
         [](const RunConfig& c) { return std::to_string(c.benchmark_size); }},
        {"pipeline", "benchmark_difficulties",
         [](RunConfig& c, const std::string& v) {
             c.benchmark_difficulties = parse_int_list(v);
         },
         [](const RunConfig& c) { return join(c.benchmark_difficulties); }},
        {"pipeline", "eval_turn2",
         [](RunConfig& c, const std::string& v) { c.eval_turn2 = parse_bool(v); },
         [](const RunConfig& c) { return std::string(c.eval_turn2 ? "true" : "false"); }},

        {"pipeline", "ablation_seeds",
         [](RunConfig& c, const std::string& v) { c.ablation_seeds = parse_u64_list(v); },
         [](const RunConfig& c) { return join(c.ablation_seeds); }},
        {"pipeline", "ablation_variants",
         [](RunConfig& c, const std::string& v) { c.ablation_variants = split_list(v); },
         [](const RunConfig& c) { return join(c.ablation_variants); }},

        {"pipeline", "stage1_enabled",
         [](RunConfig& c, const std::string& v) { c.stage1_enabled = parse_bool(v); },
         [](const RunConfig& c) {
             return std::string(c.stage1_enabled ? "true" : "false");
         }},
        {"pipeline", "stage2_enabled",
         [](RunConfig& c, const std::string& v) { c.stage2_enabled = parse_bool(v); },
         [](const RunConfig& c) {
             return std::string(c.stage2_enabled ? "true" : "false");
         }},
    };
    return table;
}

const Binding* find_binding(const std::string& section, const std::string& key) {
    for (const auto& b : bindings()) {
        if (section == b.section && key == b.key) return &b;
    }
    return nullptr;
}

bool known_section(const std::string& section) {
    for (const auto& b : bindings()) {
        if (section == b.section) return true;
    }
    return false;
}

void propagate_shared(RunConfig& c) {
    c.stage1.K = c.candidate_count;
    c.search.K = c.candidate_count;
}

void require(bool ok, const std::string& key, const std::string& why, const std::string& got) {
    if (!ok) {
        throw ConfigError("invalid value for " + key + ": " + why + " (got " + got + ")");
    }
}

void require_difficulties(const std::vector<int>& ds, const std::string& key) {
    require(!ds.empty(), key, "must list at least one difficulty", "empty list");
    for (int d : ds) require(d >= 2, key, "every difficulty must be >= 2", std::to_string(d));
}

void validate(const RunConfig& c) {
    require(c.task_count >= 1, "env.task_count", "must be >= 1", std::to_string(c.task_count));
    require_difficulties(c.task_difficulties, "env.difficulties");
    require(c.candidate_count >= 2, "policy.candidates", "must be >= 2",
            std::to_string(c.candidate_count));
    require(c.search.c_puct > 0.0, "search.c_puct", "must be positive",
            format_double(c.search.c_puct));
    require(c.search.length_lambda >= 0.0, "search.length_lambda", "must be >= 0",
            format_double(c.search.length_lambda));
    require(c.search.budget >= 1, "search.budget", "must be >= 1",
            std::to_string(c.search.budget));
    require(c.search.gamma > 0.0 && c.search.gamma <= 1.0, "search.gamma",
            "must be in (0, 1]", format_double(c.search.gamma));
    require(c.stage2.beta > 0.0, "prefopt.beta", "must be positive",
            format_double(c.stage2.beta));
    require(c.stage2.learning_rate >= 0.0, "prefopt.learning_rate", "must be >= 0",
            format_double(c.stage2.learning_rate));
    require(c.stage2.rounds >= 0, "prefopt.rounds", "must be >= 0",
            std::to_string(c.stage2.rounds));
    require(c.stage2.trees_per_round >= 1, "prefopt.trees_per_round", "must be >= 1",
            std::to_string(c.stage2.trees_per_round));
    require(c.stage2.n_min >= 1, "prefopt.n_min", "must be >= 1",
            std::to_string(c.stage2.n_min));
    require(c.stage2.delta >= 0.0, "prefopt.delta", "must be >= 0",
            format_double(c.stage2.delta));
    require(c.stage2.batch_size >= 1, "prefopt.batch_size", "must be >= 1",
            std::to_string(c.stage2.batch_size));
    require(c.stage2.heldout_size >= 1, "prefopt.heldout_size", "must be >= 1",
            std::to_string(c.stage2.heldout_size));
    require_difficulties(c.stage2.difficulties, "prefopt.difficulties");
    require(c.stage1.retry_turns >= 0, "selfcorrect.retry_turns", "must be >= 0",
            std::to_string(c.stage1.retry_turns));
    require(c.stage1.kl_coefficient >= 0.0, "selfcorrect.kl_coefficient", "must be >= 0",
            format_double(c.stage1.kl_coefficient));
    require(c.stage1.learning_rate >= 0.0, "selfcorrect.learning_rate", "must be >= 0",
            format_double(c.stage1.learning_rate));
    require(c.stage1.iterations >= 0, "selfcorrect.iterations", "must be >= 0",
            std::to_string(c.stage1.iterations));
    require(c.stage1.batch_size >= 1, "selfcorrect.batch_size", "must be >= 1",
            std::to_string(c.stage1.batch_size));
    require_difficulties(c.stage1.difficulties, "selfcorrect.difficulties");
    require(c.stage1.eval_fit_episodes >= 1, "selfcorrect.eval_fit_episodes", "must be >= 1",
            std::to_string(c.stage1.eval_fit_episodes));
    require(c.stage1.eval_fit_iterations >= 0, "selfcorrect.eval_fit_iterations",
            "must be >= 0", std::to_string(c.stage1.eval_fit_iterations));
    require(c.stage1.eval_fit_learning_rate >= 0.0, "selfcorrect.eval_fit_learning_rate",
            "must be >= 0", format_double(c.stage1.eval_fit_learning_rate));
    require(c.benchmark_size >= 1, "pipeline.benchmark_size", "must be >= 1",
            std::to_string(c.benchmark_size));
    require_difficulties(c.benchmark_difficulties, "pipeline.benchmark_difficulties");
    require(!c.ablation_seeds.empty(), "pipeline.ablation_seeds",
            "must list at least one seed", "empty list");
    require(!c.ablation_variants.empty(), "pipeline.ablation_variants",
            "must list at least one variant", "empty list");
    for (const auto& v : c.ablation_variants) {
        require(v == "baseline" || v == "isc_only" || v == "mcts_dpo_only" || v == "ours",
                "pipeline.ablation_variants",
                "variants are baseline, isc_only, mcts_dpo_only, ours", v);
    }
}

}  // namespace

std::string format_double(double x) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, p);
}

RunConfig parse_config(const std::string& text, const std::string& name) {
    RunConfig config;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string where = name + ":" + std::to_string(lineno);
        std::string line = raw;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ConfigError(where + ": malformed section header '" + raw + "'");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (!known_section(section)) {
                throw ConfigError(where + ": unknown section '" + section + "'");
            }
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(where + ": expected 'key = value', got '" + raw + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(where + ": missing key before '='");
        }
        if (section.empty()) {
            throw ConfigError(where + ": key '" + key + "' appears before any section");
        }
        const Binding* b = find_binding(section, key);
        if (b == nullptr) {
            throw ConfigError(where + ": unknown key '" + key + "' in section [" +
                              section + "]");
        }
        try {
            b->set(config, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + ": key '" + key + "': " + e.what());
        }
    }
    propagate_shared(config);
    validate(config);
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.filename().string());
}

std::string dump_config(const RunConfig& config) {
    std::string out;
    std::string section;
    for (const auto& b : bindings()) {
        if (section != b.section) {
            if (!out.empty()) out += "\n";
            section = b.section;
            out += "[" + section + "]\n";
        }
        out += std::string(b.key) + " = " + b.get(config) + "\n";
    }
    return out;
}

std::vector<std::string> diff_configs(const RunConfig& a, const RunConfig& b) {
    std::vector<std::string> out;
    for (const auto& binding : bindings()) {
        const std::string va = binding.get(a);
        const std::string vb = binding.get(b);
        if (va != vb) {
            out.push_back(std::string(binding.section) + "." + binding.key + ": " + va +
                          " -> " + vb);
        }
    }
    return out;
}

}  // namespace steprl::iolayer
