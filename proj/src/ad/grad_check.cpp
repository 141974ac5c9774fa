#include "doanav/ad/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace doanav::ad {
namespace {

double evaluate(const LossFn& f, const ParamStore& store) {
  Tape tape;
  ParamBinding bind(tape, store);
  return f(bind).value().item();
}

}  // namespace

GradCheckResult grad_check(const LossFn& f, ParamStore& store, const GradCheckOptions& opts) {
  GradBuffer analytic = GradBuffer::zeros_like(store);
  {
    Tape tape;
    ParamBinding bind(tape, store);
    Var loss = f(bind);
    tape.backward(loss);
    bind.accumulate(analytic);
  }

  GradCheckResult result;
  std::mt19937_64 rng(opts.seed);
  for (ParamId id = 0; id < store.size(); ++id) {
    Tensor& value = store.value(id);
    std::vector<std::size_t> coords(value.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (opts.max_coords_per_param > 0 && coords.size() > opts.max_coords_per_param) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(opts.max_coords_per_param);
    }
    for (std::size_t i : coords) {
      const double orig = value[i];
      value[i] = orig + opts.eps;
      const double up = evaluate(f, store);
      value[i] = orig - opts.eps;
      const double down = evaluate(f, store);
      value[i] = orig;
      const double numeric = (up - down) / (2.0 * opts.eps);
      const double a = analytic.grads[id][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), opts.denom_floor});
      const double rel = std::abs(a - numeric) / denom;
      ++result.coords_checked;
      if (rel > result.max_relative_error || !std::isfinite(rel)) {
        result.max_relative_error = rel;
        result.worst_param = store.name(id);
        result.worst_index = i;
      }
    }
  }
  return result;
}

}  // namespace doanav::ad
