#include "doanav/sim/env.hpp"

#include <random>

namespace doanav::sim {

NavEnv::NavEnv(const World& world, std::uint64_t seed) : world_(&world), rng_(seed) {}

std::pair<AgentState, Observation> NavEnv::reset(int target_class, std::optional<AgentState> start) {
  if (!world_->class_present(target_class)) {
    throw EpisodeSpecError("target class " + std::to_string(target_class) +
                           " is not present in the world");
  }
  if (start) {
    if (world_->blocked(start->x, start->y)) throw EpisodeSpecError("start pose is blocked");
    state_ = *start;
  } else {
    const auto cells = world_->free_cells();
    const auto [x, y] = cells[std::uniform_int_distribution<std::size_t>(0, cells.size() - 1)(rng_)];
    state_.x = x;
    state_.y = y;
    state_.yaw = 90 * std::uniform_int_distribution<int>(0, 3)(rng_);
    state_.pitch = static_cast<Pitch>(std::uniform_int_distribution<int>(0, 2)(rng_));
  }
  target_ = target_class;
  steps_ = 0;
  done_ = false;
  return {state_, observe(*world_, state_, target_, rng_)};
}

StepOutcome NavEnv::step(Action action) {
  if (done_) throw std::logic_error("step() on a finished episode; call reset()");
  const WorldConfig& cfg = world_->cfg;
  StepOutcome out;
  ++steps_;
  switch (action) {
    case Action::MoveAhead: {
      static constexpr int dx[4] = {1, 0, -1, 0};
      static constexpr int dy[4] = {0, 1, 0, -1};
      const int k = state_.yaw / 90;
      const int nx = state_.x + dx[k], ny = state_.y + dy[k];
      if (world_->blocked(nx, ny)) {
        out.info.collided = true;
      } else {
        state_.x = nx;
        state_.y = ny;
      }
      break;
    }
    case Action::RotateLeft: state_.yaw = (state_.yaw + 270) % 360; break;
    case Action::RotateRight: state_.yaw = (state_.yaw + 90) % 360; break;
    case Action::LookDown:
      if (state_.pitch != Pitch::Down) state_.pitch = static_cast<Pitch>(static_cast<int>(state_.pitch) - 1);
      break;
    case Action::LookUp:
      if (state_.pitch != Pitch::Up) state_.pitch = static_cast<Pitch>(static_cast<int>(state_.pitch) + 1);
      break;
    case Action::Done: break;
  }

  out.info.dist_to_target = distance_to_class(*world_, state_, target_);
  out.info.target_visible = class_visible(*world_, state_, target_);
  out.reward = cfg.reward_step;
  if (action == Action::Done) {
    out.done = true;
    out.success = success_predicate(*world_, state_, target_);
    if (out.success) out.reward = cfg.reward_success;
  } else if (steps_ >= cfg.max_steps) {
    out.done = true;
  }
  done_ = out.done;
  out.next_state = state_;
  out.observation = observe(*world_, state_, target_, rng_);
  return out;
}

}  // namespace doanav::sim
