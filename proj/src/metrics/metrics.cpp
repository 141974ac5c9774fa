#include "doanav/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "doanav/sim/env.hpp"

namespace doanav::metrics {
namespace {

void require_nonempty(std::span<const EpisodeRecord> records, const char* what) {
  if (records.empty()) throw EmptyInputError(std::string(what) + ": no episode records");
}

}  // namespace

double sr(std::span<const EpisodeRecord> records) {
  require_nonempty(records, "sr");
  double s = 0.0;
  for (const auto& r : records) s += r.success ? 1.0 : 0.0;
  return s / static_cast<double>(records.size());
}

double spl(std::span<const EpisodeRecord> records, std::size_t* excluded) {
  require_nonempty(records, "spl");
  double s = 0.0;
  std::size_t used = 0, skipped = 0;
  for (const auto& r : records) {
    if (r.optimal_len == sim::kUnreachable || r.optimal_len < 0) {
      ++skipped;
      continue;
    }
    ++used;
    if (!r.success) continue;
    const double denom = std::max(r.path_len, r.optimal_len);
    s += denom > 0 ? r.optimal_len / denom : 1.0;
  }
  if (excluded) *excluded = skipped;
  if (used == 0) throw EmptyInputError("spl: every record has an unreachable optimal length");
  return s / static_cast<double>(used);
}

double sae(std::span<const EpisodeRecord> records) {
  require_nonempty(records, "sae");
  double s = 0.0;
  for (const auto& r : records) {
    if (!r.success || r.actions.empty()) continue;
    const auto moves = std::count(r.actions.begin(), r.actions.end(),
                                  static_cast<int>(sim::Action::MoveAhead));
    s += static_cast<double>(moves) / static_cast<double>(r.actions.size());
  }
  return s / static_cast<double>(records.size());
}

MetricsSummary summarize(std::span<const EpisodeRecord> records) {
  MetricsSummary m;
  m.n_episodes = records.size();
  if (records.empty()) return m;
  m.sr = sr(records);
  m.spl = spl(records);
  m.sae = sae(records);
  return m;
}

MetricsReport report(std::span<const EpisodeRecord> records) {
  require_nonempty(records, "report");
  MetricsReport rep;
  rep.all = summarize(records);
  std::vector<EpisodeRecord> longer;
  std::map<int, std::vector<EpisodeRecord>> by_target;
  for (const auto& r : records) {
    if (r.optimal_len != sim::kUnreachable && r.optimal_len >= kLongPathThreshold) longer.push_back(r);
    by_target[r.target].push_back(r);
  }
  rep.long_paths = summarize(longer);
  for (const auto& [t, rs] : by_target) rep.per_target[t] = summarize(rs);
  return rep;
}

std::vector<double> attention_distribution(std::span<const EpisodeRecord> records) {
  std::vector<double> acc;
  std::size_t steps = 0;
  for (const auto& r : records) {
    for (const auto& a : r.per_step_attention) {
      if (acc.empty()) acc.assign(a.size(), 0.0);
      if (a.size() != acc.size()) throw std::invalid_argument("attention logs differ in length");
      for (std::size_t q = 0; q < a.size(); ++q) acc[q] += a[q];
      ++steps;
    }
  }
  for (double& v : acc) v /= static_cast<double>(std::max<std::size_t>(steps, 1));
  return acc;
}

BiasStats bias_ratio(std::span<const double> distribution) {
  if (distribution.empty()) throw std::invalid_argument("bias_ratio: empty distribution");
  double mx = 0.0, mn = std::numeric_limits<double>::infinity(), total = 0.0;
  for (double v : distribution) {
    if (v < 0.0 || !std::isfinite(v)) throw std::invalid_argument("bias_ratio: entries must be finite and >= 0");
    mx = std::max(mx, v);
    mn = std::min(mn, v);
    total += v;
  }
  if (mx <= 0.0) throw std::invalid_argument("bias_ratio: all-zero distribution");
  BiasStats b;
  b.ratio = mx / std::max(mn, kBiasFloor);
  double h = 0.0;
  for (double v : distribution) {
    const double p = v / total;
    if (p > 0.0) h -= p * std::log(p);
  }
  b.normalized_entropy = distribution.size() > 1 ? h / std::log(static_cast<double>(distribution.size())) : 1.0;
  return b;
}

}  // namespace doanav::metrics
