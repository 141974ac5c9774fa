#pragma once

#include <random>

#include "doanav/ad/grad_check.hpp"
#include "doanav/ad/ops.hpp"

namespace testing_support {

using doanav::ad::Tensor;

inline Tensor random_tensor(std::size_t r, std::size_t c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Tensor t(r, c);
  for (double& v : t.values()) {
    v = n(rng);
    // Keep clear of the ReLU kink so central differences stay valid.
    if (std::abs(v) < 1e-3) v = 0.5;
  }
  return t;
}

// Reduces any tensor to a scalar with fixed random weights so every output
// coordinate carries a distinct upstream gradient.
inline doanav::ad::Var weighted_sum(doanav::ad::Var x, std::uint64_t seed = 99) {
  std::mt19937_64 rng(seed);
  Tensor w = random_tensor(x.rows(), x.cols(), rng);
  return doanav::ad::sum(doanav::ad::mul(x, x.tape->constant(w)));
}

}  // namespace testing_support
