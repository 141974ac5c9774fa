#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>

#include "doanav/common/rng.hpp"
#include "doanav/sim/world.hpp"

namespace doanav::sim {

/// Renders the detector rows and image grid for a pose. Noise is drawn from rng.
Observation observe(const World& world, const AgentState& state, int target_class, Rng& rng);

/// One navigation episode on a world. Owns its pose, step counter and noise stream.
class NavEnv {
 public:
  NavEnv(const World& world, std::uint64_t seed);

  /// Starts an episode at a uniformly random free pose (or start, if given).
  /// Throws EpisodeSpecError when target_class is absent from the world.
  std::pair<AgentState, Observation> reset(int target_class,
                                           std::optional<AgentState> start = std::nullopt);
  StepOutcome step(Action action);
  StepOutcome step(int action_index) { return step(action_from_index(action_index)); }

  const World& world() const { return *world_; }
  const AgentState& state() const { return state_; }
  int target() const { return target_; }
  int steps_taken() const { return steps_; }
  bool done() const { return done_; }
  Rng& rng() { return rng_; }

 private:
  const World* world_;
  Rng rng_;
  AgentState state_;
  int target_ = -1;
  int steps_ = 0;
  bool done_ = true;
};

/// Marker for an unreachable target.
inline constexpr int kUnreachable = std::numeric_limits<int>::max();

/// Minimal action count (Done excluded) from pose until the success predicate
/// holds, by breadth-first search over (x, y, yaw, pitch).
int shortest_path_length(const World& world, const AgentState& pose, int target_class);

}  // namespace doanav::sim
