#include "doanav/train/rollout.hpp"

#include <memory>
#include <stdexcept>

#include "doanav/ad/ops.hpp"

namespace doanav::train {

ActionDist action_distribution(model::ForwardPass& pass, const model::PolicyOutput& out,
                               const sim::Observation& obs, int target) {
  const auto boosted = model::action_logits(pass.cfg(), out, obs, target);
  Var logits = out.logits;
  const auto& raw = out.logits.value();
  ad::Tensor offset(1, sim::kNumActions);
  bool any = false;
  for (int a = 0; a < sim::kNumActions; ++a) {
    offset(0, a) = boosted[a] - raw(0, a);
    any = any || offset(0, a) != 0.0;
  }
  // The reminder is a constant shift; gradients flow through the raw logits.
  if (any) logits = ad::add(logits, pass.constant(offset));
  ActionDist d;
  d.log_probs = ad::log_softmax_rows(logits);
  Var probs = ad::softmax_rows(logits);
  d.entropy = ad::scale(ad::sum(ad::mul(probs, d.log_probs)), -1.0);
  d.probs.assign(probs.value().data().begin(), probs.value().data().end());
  return d;
}

int sample_action(std::span<const double> probs, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = u(rng);
  for (std::size_t a = 0; a < probs.size(); ++a) {
    x -= probs[a];
    if (x < 0.0) return static_cast<int>(a);
  }
  // Rounding left a sliver past the last bin; take the last nonzero entry.
  for (std::size_t a = probs.size(); a-- > 0;)
    if (probs[a] > 0.0) return static_cast<int>(a);
  throw std::invalid_argument("sample_action: all-zero distribution");
}

int sample_target(const sim::World& world, Rng& rng) {
  const auto classes = world.classes_present();
  if (classes.empty()) throw sim::EpisodeSpecError("world has no objects");
  std::uniform_int_distribution<std::size_t> pick(0, classes.size() - 1);
  return classes[pick(rng)];
}

Worker::Worker(const std::vector<sim::World>& worlds, std::uint64_t seed, std::uint64_t index)
    : worlds_(&worlds),
      seed_(derive_seed(seed, "worker", index)),
      rng_(make_rng(seed_, "policy")),
      dropout_rng_(make_rng(seed_, "dropout")) {
  if (worlds.empty()) throw std::invalid_argument("worker needs at least one world");
}

void Worker::start_episode(const model::ModelConfig& cfg) {
  std::uniform_int_distribution<std::size_t> pick(0, worlds_->size() - 1);
  const sim::World& world = (*worlds_)[pick(rng_)];
  const int target = sample_target(world, rng_);
  env_ = std::make_unique<sim::NavEnv>(world, derive_seed(seed_, "env", episodes_started_++));
  obs_ = env_->reset(target).second;
  prev_action_ = model::kStartActionToken;
  hidden_ = model::LstmState::zeros(cfg.lstm_hidden);
  active_ = true;
}

Rollout Worker::collect(model::ForwardPass& pass, int len, bool training) {
  if (len < 1) throw std::invalid_argument("rollout length must be >= 1");
  if (!active_) start_episode(pass.cfg());
  Rollout r;
  Var h = pass.constant(hidden_.h);
  Var c = pass.constant(hidden_.c);
  for (int t = 0; t < len; ++t) {
    const int target = env_->target();
    auto out = pass.step(obs_, target, prev_action_, h, c, training, &dropout_rng_);
    auto dist = action_distribution(pass, out, obs_, target);
    const int action = sample_action(dist.probs, rng_);
    auto outcome = env_->step(action);
    ++env_steps_;

    Transition tr;
    tr.log_prob = ad::pick(dist.log_probs, static_cast<std::size_t>(action));
    tr.value = out.value;
    tr.entropy = dist.entropy;
    tr.action = action;
    tr.reward = outcome.reward;
    tr.done = outcome.done;
    tr.attention = std::move(out.attention.values);
    r.transitions.push_back(std::move(tr));

    h = out.h;
    c = out.c;
    prev_action_ = action;
    obs_ = std::move(outcome.observation);
    if (outcome.done) {
      finished_.push_back({outcome.success, env_->steps_taken()});
      active_ = false;
      break;
    }
  }
  if (active_) {
    hidden_ = {h.value(), c.value()};
    auto boot = pass.step(obs_, env_->target(), prev_action_, h, c, false, nullptr);
    r.bootstrap_value = boot.value.value().item();
  }
  return r;
}

std::vector<EpisodeEnd> Worker::take_finished() {
  std::vector<EpisodeEnd> out;
  out.swap(finished_);
  return out;
}

}  // namespace doanav::train
