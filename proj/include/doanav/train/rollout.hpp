#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "doanav/model/policy.hpp"
#include "doanav/sim/env.hpp"
#include "doanav/train/a3c.hpp"

namespace doanav::train {

/// Action distribution after the done reminder, on the forward pass's tape.
struct ActionDist {
  Var log_probs;  // 1 x 6
  Var entropy;    // 1 x 1
  std::vector<double> probs;
};

ActionDist action_distribution(model::ForwardPass& pass, const model::PolicyOutput& out,
                               const sim::Observation& obs, int target);

/// Inverse-CDF draw from a probability vector.
int sample_action(std::span<const double> probs, Rng& rng);

struct EpisodeEnd {
  bool success = false;
  int steps = 0;
};

/// One rollout worker: owns its episode stream over a shared world pool,
/// the recurrent state, and its rng streams. The hidden state is carried
/// across rollouts (truncated backprop) and reset on episode end.
class Worker {
 public:
  Worker(const std::vector<sim::World>& worlds, std::uint64_t seed, std::uint64_t index);

  Rollout collect(model::ForwardPass& pass, int len, bool training);

  std::vector<EpisodeEnd> take_finished();
  std::int64_t env_steps() const { return env_steps_; }

 private:
  void start_episode(const model::ModelConfig& cfg);

  const std::vector<sim::World>* worlds_;
  std::uint64_t seed_;
  Rng rng_;
  Rng dropout_rng_;
  std::unique_ptr<sim::NavEnv> env_;
  sim::Observation obs_;
  int prev_action_ = model::kStartActionToken;
  model::LstmState hidden_;
  bool active_ = false;
  std::uint64_t episodes_started_ = 0;
  std::int64_t env_steps_ = 0;
  std::vector<EpisodeEnd> finished_;
};

/// Uniformly chosen class present in the world.
int sample_target(const sim::World& world, Rng& rng);

}  // namespace doanav::train
