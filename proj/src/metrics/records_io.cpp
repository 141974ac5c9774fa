#include "doanav/metrics/records_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "doanav/sim/env.hpp"

namespace doanav::metrics {

nlohmann::json record_to_json(const EpisodeRecord& r) {
  nlohmann::json j{{"success", r.success},
                   {"path_len", r.path_len},
                   {"actions", r.actions},
                   {"target", r.target},
                   {"world_seed", r.world_seed},
                   {"attention", r.per_step_attention}};
  if (r.optimal_len == sim::kUnreachable)
    j["optimal_len"] = nullptr;
  else
    j["optimal_len"] = r.optimal_len;
  return j;
}

EpisodeRecord record_from_json(const nlohmann::json& j) {
  EpisodeRecord r;
  r.success = j.at("success").get<bool>();
  r.path_len = j.at("path_len").get<int>();
  r.optimal_len = j.at("optimal_len").is_null() ? sim::kUnreachable : j.at("optimal_len").get<int>();
  r.actions = j.at("actions").get<std::vector<int>>();
  r.target = j.at("target").get<int>();
  r.world_seed = j.value("world_seed", std::uint64_t{0});
  if (j.contains("attention")) r.per_step_attention = j.at("attention").get<std::vector<std::vector<double>>>();
  return r;
}

void write_records_jsonl(const std::filesystem::path& path, const std::vector<EpisodeRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

std::vector<EpisodeRecord> read_records_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<EpisodeRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(record_from_json(nlohmann::json::parse(line)));
  }
  return out;
}

nlohmann::json summary_to_json(const MetricsSummary& s) {
  return {{"sr", s.sr}, {"spl", s.spl}, {"sae", s.sae}, {"n_episodes", s.n_episodes}};
}

nlohmann::json report_to_json(const MetricsReport& r) {
  nlohmann::json per_target = nlohmann::json::object();
  for (const auto& [t, s] : r.per_target) per_target[std::to_string(t)] = summary_to_json(s);
  return {{"all", summary_to_json(r.all)}, {"long_paths", summary_to_json(r.long_paths)},
          {"per_target", per_target}};
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_csv_matrix(const std::filesystem::path& path, const std::vector<std::vector<double>>& rows,
                      const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  if (!header.empty()) out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
}

std::vector<std::vector<double>> read_csv_matrix(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  if (has_header) std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc()) throw std::runtime_error("bad number in " + path.string() + ": " + cell);
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace doanav::metrics
