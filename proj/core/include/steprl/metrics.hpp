#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace steprl::iolayer {

/* One measurement row. The timestamp is a logical clock (a per-writer
 * counter), never wall time, so identical runs write identical bytes. */
struct MetricsRecord {
    long long timestamp = 0;
    std::string stage;
    long long iteration = 0;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, double>> values;
};

std::string metrics_record_to_json(const MetricsRecord& record);

MetricsRecord metrics_record_from_json(const std::string& line);

/* Appends one JSON object per line; assigns timestamps in emission order. */
class MetricsWriter {
public:
    explicit MetricsWriter(const std::filesystem::path& path);

    void emit(const std::string& stage, long long iteration, std::uint64_t seed,
              const std::vector<std::pair<std::string, double>>& values);

    [[nodiscard]] long long records_written() const { return clock_; }

private:
    std::ofstream out_;
    long long clock_ = 0;
};

std::vector<MetricsRecord> load_metrics(const std::filesystem::path& path);

}  // namespace steprl::iolayer
