#include "doanav/train/a3c.hpp"

#include <stdexcept>

#include "doanav/ad/ops.hpp"

namespace doanav::train {

std::vector<double> compute_returns(std::span<const double> rewards, double bootstrap, double gamma) {
  std::vector<double> out(rewards.size());
  double r = bootstrap;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    r = rewards[i] + gamma * r;
    out[i] = r;
  }
  return out;
}

LossParts a3c_loss(const Rollout& rollout, const LossCoefs& coefs) {
  const auto& ts = rollout.transitions;
  if (ts.empty()) throw std::invalid_argument("a3c_loss: empty rollout");
  if (!(coefs.gamma > 0.0 && coefs.gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");

  std::vector<double> rewards;
  rewards.reserve(ts.size());
  for (const auto& t : ts) rewards.push_back(t.reward);
  const double bootstrap = ts.back().done ? 0.0 : rollout.bootstrap_value;
  const auto returns = compute_returns(rewards, bootstrap, coefs.gamma);

  ad::Tape& tape = *ts.front().value.tape;
  LossParts parts;
  std::vector<Var> terms;
  terms.reserve(ts.size() * 3);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto& t = ts[i];
    Var ret = tape.constant(ad::Tensor::scalar(returns[i]));
    Var adv = ad::sub(ret, t.value);
    Var adv_fixed = ad::detach(adv);
    Var policy = ad::scale(ad::mul(t.log_prob, adv_fixed), -1.0);
    Var value = ad::scale(ad::mul(adv, adv), coefs.value_coef);
    Var ent = ad::scale(t.entropy, -coefs.beta_entropy);
    parts.policy += policy.value().item();
    parts.value += value.value().item();
    parts.entropy += t.entropy.value().item();
    terms.push_back(policy);
    terms.push_back(value);
    terms.push_back(ent);
  }
  parts.total = ad::sum(ad::concat(terms, 0));
  return parts;
}

}  // namespace doanav::train
