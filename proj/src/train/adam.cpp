#include "doanav/train/adam.hpp"

#include <cmath>

namespace doanav::train {

AdamState AdamState::zeros_like(const ad::ParamStore& store) {
  AdamState s;
  for (const auto& p : store.params()) {
    s.m.emplace_back(p.value.shape(), 0.0);
    s.v.emplace_back(p.value.shape(), 0.0);
  }
  return s;
}

void adam_update(ad::ParamStore& params, const ad::GradBuffer& grads, AdamState& state,
                 const AdamConfig& cfg) {
  if (grads.grads.size() != params.size() || state.m.size() != params.size()) {
    throw ad::DimensionError("adam_update: parameter, gradient and state counts differ");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    ad::Tensor& w = params.value(k);
    const ad::Tensor& g = grads.grads[k];
    if (g.size() != w.size()) throw ad::DimensionError("adam_update: shape mismatch for " + params.name(k));
    ad::Tensor& m = state.m[k];
    ad::Tensor& v = state.v[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      w[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

double clip_grad_norm(ad::GradBuffer& grads, double max_norm) {
  const double norm = grads.l2_norm();
  if (max_norm > 0.0 && norm > max_norm) grads.scale(max_norm / norm);
  return norm;
}

}  // namespace doanav::train
