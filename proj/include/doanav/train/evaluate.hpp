#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "doanav/metrics/metrics.hpp"
#include "doanav/model/params.hpp"
#include "doanav/sim/world.hpp"

namespace doanav::train {

struct EvalOptions {
  int n_episodes = 100;
  std::uint64_t seed = 0;
  bool log_attention = true;
  bool greedy = false;  // argmax instead of sampling
};

/// Called on every observation the evaluated agent receives.
using ObservationHook = std::function<void(const sim::Observation&, int target)>;

/// Episode i runs on worlds[i % size] with a target and start drawn from the
/// eval seed. Dropout is off. optimal_len comes from breadth-first search.
std::vector<metrics::EpisodeRecord> evaluate(const model::ModelParams& params,
                                             const std::vector<sim::World>& worlds,
                                             const EvalOptions& opts,
                                             const ObservationHook& hook = {});

}  // namespace doanav::train
