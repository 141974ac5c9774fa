#include "doanav/train/evaluate.hpp"

#include <algorithm>
#include <stdexcept>

#include "doanav/model/policy.hpp"
#include "doanav/sim/env.hpp"
#include "doanav/train/rollout.hpp"

namespace doanav::train {

namespace {

metrics::EpisodeRecord run_episode(const model::ModelParams& params, const sim::World& world,
                                   std::uint64_t seed, const EvalOptions& opts,
                                   const ObservationHook& hook) {
  Rng rng = make_rng(seed, "episode");
  const int target = sample_target(world, rng);
  sim::NavEnv env(world, derive_seed(seed, "env"));
  auto [start, obs] = env.reset(target);

  metrics::EpisodeRecord rec;
  rec.target = target;
  rec.world_seed = world.seed;
  rec.optimal_len = sim::shortest_path_length(world, start, target);

  model::LstmState hidden = model::LstmState::zeros(params.cfg.lstm_hidden);
  int prev = model::kStartActionToken;
  while (!env.done()) {
    if (hook) hook(obs, target);
    // A fresh tape per step keeps memory flat; nothing is differentiated here.
    ad::Tape tape;
    ad::ParamBinding bind(tape, params.store);
    model::ForwardPass pass(params, bind);
    auto out = pass.step(obs, target, prev, tape.constant(hidden.h), tape.constant(hidden.c), false, nullptr);
    auto dist = action_distribution(pass, out, obs, target);
    const int action = opts.greedy
                           ? static_cast<int>(std::max_element(dist.probs.begin(), dist.probs.end()) -
                                              dist.probs.begin())
                           : sample_action(dist.probs, rng);
    if (opts.log_attention) rec.per_step_attention.push_back(out.attention.values);
    hidden = {out.h.value(), out.c.value()};
    prev = action;
    auto step = env.step(action);
    rec.actions.push_back(action);
    rec.success = step.success;
    obs = std::move(step.observation);
  }
  rec.path_len = static_cast<int>(rec.actions.size());
  return rec;
}

}  // namespace

std::vector<metrics::EpisodeRecord> evaluate(const model::ModelParams& params,
                                             const std::vector<sim::World>& worlds,
                                             const EvalOptions& opts, const ObservationHook& hook) {
  if (opts.n_episodes <= 0) throw metrics::EmptyInputError("evaluation needs at least one episode");
  if (worlds.empty()) throw std::invalid_argument("evaluation needs at least one world");
  std::vector<metrics::EpisodeRecord> out;
  out.reserve(opts.n_episodes);
  for (int i = 0; i < opts.n_episodes; ++i)
    out.push_back(run_episode(params, worlds[i % worlds.size()], derive_seed(opts.seed, "eval", i), opts, hook));
  return out;
}

}  // namespace doanav::train
