#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

namespace doanav::metrics {

class EmptyInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct EpisodeRecord {
  bool success = false;
  int path_len = 0;     // actions issued, Done included
  int optimal_len = 0;  // shortest action count, Done excluded; kUnreachable if none
  std::vector<int> actions;
  int target = 0;
  std::uint64_t world_seed = 0;
  std::vector<std::vector<double>> per_step_attention;
};

double sr(std::span<const EpisodeRecord> records);
/// Records with an unreachable optimal length are skipped (and counted in
/// *excluded when given).
double spl(std::span<const EpisodeRecord> records, std::size_t* excluded = nullptr);
/// Position-changing actions (MoveAhead) over all issued actions, Done included.
double sae(std::span<const EpisodeRecord> records);

struct MetricsSummary {
  double sr = 0.0;
  double spl = 0.0;
  double sae = 0.0;
  std::size_t n_episodes = 0;
};

struct MetricsReport {
  MetricsSummary all;
  MetricsSummary long_paths;  // optimal length >= 5
  std::map<int, MetricsSummary> per_target;
};

inline constexpr int kLongPathThreshold = 5;

MetricsSummary summarize(std::span<const EpisodeRecord> records);
MetricsReport report(std::span<const EpisodeRecord> records);

/// Mean per-object attention over every logged step of every episode.
std::vector<double> attention_distribution(std::span<const EpisodeRecord> records);

struct BiasStats {
  double ratio = 0.0;               // max / max(min, floor)
  double normalized_entropy = 0.0;  // H(p) / log N over the normalized distribution
};

inline constexpr double kBiasFloor = 1e-8;

/// Throws std::invalid_argument on negative entries or an all-zero distribution.
BiasStats bias_ratio(std::span<const double> distribution);

}  // namespace doanav::metrics
