#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "doanav/ad/params.hpp"

namespace doanav::ad {

struct GradCheckOptions {
  double eps = 1e-5;
  /// Parameters larger than this are checked on a random subsample of
  /// coordinates; 0 checks everything.
  std::size_t max_coords_per_param = 0;
  /// Denominator floor of the relative error, so gradients that are exactly
  /// zero compare on an absolute scale.
  double denom_floor = 1e-6;
  std::uint64_t seed = 7;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  std::size_t coords_checked = 0;
};

/// Builds the loss with f on a fresh tape each call. f must be deterministic
/// (no training-mode dropout unless it reseeds its own rng).
using LossFn = std::function<Var(ParamBinding&)>;

/// Central-difference check of reverse-mode gradients of f with respect to
/// every parameter in store. Relative error is |a - n| / max(|a|, |n|, floor).
GradCheckResult grad_check(const LossFn& f, ParamStore& store, const GradCheckOptions& opts = {});

}  // namespace doanav::ad
