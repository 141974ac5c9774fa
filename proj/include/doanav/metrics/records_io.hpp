#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "doanav/metrics/metrics.hpp"

namespace doanav::metrics {

/// One JSON object per line with keys: success, path_len, optimal_len
/// (null when unreachable), actions, target, world_seed, attention (list of N-vectors).
nlohmann::json record_to_json(const EpisodeRecord& r);
EpisodeRecord record_from_json(const nlohmann::json& j);
void write_records_jsonl(const std::filesystem::path& path, const std::vector<EpisodeRecord>& records);
std::vector<EpisodeRecord> read_records_jsonl(const std::filesystem::path& path);

nlohmann::json summary_to_json(const MetricsSummary& s);
nlohmann::json report_to_json(const MetricsReport& r);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// Plain numeric CSV matrix, optional header line of column names.
void write_csv_matrix(const std::filesystem::path& path, const std::vector<std::vector<double>>& rows,
                      const std::vector<std::string>& header = {});
std::vector<std::vector<double>> read_csv_matrix(const std::filesystem::path& path, bool has_header);

}  // namespace doanav::metrics
