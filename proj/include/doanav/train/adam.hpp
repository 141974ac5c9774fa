#pragma once

#include <cstdint>
#include <vector>

#include "doanav/ad/params.hpp"

namespace doanav::train {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<ad::Tensor> m;
  std::vector<ad::Tensor> v;
  std::int64_t step = 0;

  static AdamState zeros_like(const ad::ParamStore& store);
};

/// One bias-corrected Adam step in place.
void adam_update(ad::ParamStore& params, const ad::GradBuffer& grads, AdamState& state,
                 const AdamConfig& cfg);

/// Rescales grads so their global L2 norm is at most max_norm; returns the pre-clip norm.
double clip_grad_norm(ad::GradBuffer& grads, double max_norm);

}  // namespace doanav::train
