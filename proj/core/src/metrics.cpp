#include "steprl/metrics.hpp"

#include <stdexcept>

#include "json.hpp"

namespace steprl::iolayer {

std::string metrics_record_to_json(const MetricsRecord& record) {
    nlohmann::ordered_json j;
    j["timestamp"] = record.timestamp;
    j["stage"] = record.stage;
    j["iteration"] = record.iteration;
    j["seed"] = record.seed;
    nlohmann::ordered_json values;
    for (const auto& [k, v] : record.values) values[k] = v;
    j["values"] = std::move(values);
    return j.dump();
}

MetricsRecord metrics_record_from_json(const std::string& line) {
    const auto j = nlohmann::ordered_json::parse(line);
    MetricsRecord r;
    r.timestamp = j.at("timestamp").get<long long>();
    r.stage = j.at("stage").get<std::string>();
    r.iteration = j.at("iteration").get<long long>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [k, v] : j.at("values").items()) {
        r.values.emplace_back(k, v.get<double>());
    }
    return r;
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path)
    : out_(path, std::ios::trunc) {
    if (!out_) {
        throw std::runtime_error("cannot open metrics file: " + path.string());
    }
}

void MetricsWriter::emit(const std::string& stage, long long iteration,
                         std::uint64_t seed,
                         const std::vector<std::pair<std::string, double>>& values) {
    MetricsRecord r;
    r.timestamp = clock_++;
    r.stage = stage;
    r.iteration = iteration;
    r.seed = seed;
    r.values = values;
    out_ << metrics_record_to_json(r) << "\n";
    out_.flush();
}

std::vector<MetricsRecord> load_metrics(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open metrics file: " + path.string());
    std::vector<MetricsRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(metrics_record_from_json(line));
    }
    return out;
}

}  // namespace steprl::iolayer
