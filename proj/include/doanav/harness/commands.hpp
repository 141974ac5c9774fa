#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "doanav/harness/experiment.hpp"
#include "doanav/metrics/metrics.hpp"
#include "doanav/model/params.hpp"

namespace doanav::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

struct SplitStats {
  metrics::MetricsSummary mean;
  metrics::MetricsSummary std;
};

struct EvalReport {
  std::vector<std::uint64_t> seeds;
  std::vector<metrics::MetricsReport> per_seed;
  SplitStats all;
  SplitStats long_paths;
  std::vector<metrics::EpisodeRecord> records;  // every seed, in seed order
};

/// Evaluates params on the held-out worlds once per eval seed.
EvalReport run_eval(const model::ModelParams& params, const ExperimentConfig& cfg, bool log_attention = false);
nlohmann::json eval_report_to_json(const EvalReport& r);

struct DiagnoseReport {
  std::vector<double> attention;  // mean G_t per class, negatives clipped to 0
  int clipped_entries = 0;
  metrics::BiasStats bias;
  std::vector<std::vector<double>> view_samples;
  /// Per-class entropy of detected visual features; NaN when too few samples.
  std::vector<double> feature_entropy;
  EvalReport eval;
};

DiagnoseReport run_diagnose(const model::ModelParams& params, const ExperimentConfig& cfg,
                            bool feature_entropy = false);

/// "use_uaoa,use_uaia,use_abed" -> names; throws ConfigError on unknown toggles.
std::vector<std::string> parse_grid(const std::string& spec);

/// Loads a checkpoint and checks it against the config's model shapes.
model::ModelParams load_for(const std::filesystem::path& checkpoint, const ExperimentConfig& cfg);

int cmd_train(const std::filesystem::path& config, std::ostream& out, std::ostream& err);
int cmd_eval(const std::filesystem::path& checkpoint, const std::filesystem::path& config,
             std::ostream& out, std::ostream& err);
int cmd_ablate(const std::filesystem::path& config, const std::string& grid, std::ostream& out,
               std::ostream& err);
int cmd_diagnose(const std::filesystem::path& checkpoint, const std::filesystem::path& config,
                 bool feature_entropy, std::ostream& out, std::ostream& err);

}  // namespace doanav::harness
