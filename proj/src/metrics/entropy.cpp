#include "doanav/metrics/entropy.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace doanav::metrics {

double knn_entropy(const ad::Tensor& input, std::size_t k) {
  const std::size_t n = input.rows(), d = input.cols();
  if (k < 1) throw std::invalid_argument("knn_entropy: k must be >= 1");
  if (n <= k) throw std::invalid_argument("knn_entropy: need more samples than k");

  ad::Tensor samples = input;
  auto row_equal = [&](std::size_t a, std::size_t b) {
    for (std::size_t j = 0; j < d; ++j)
      if (samples(a, j) != samples(b, j)) return false;
    return true;
  };
  bool all_equal = true;
  for (std::size_t i = 1; i < n && all_equal; ++i) all_equal = row_equal(0, i);
  if (all_equal) throw std::invalid_argument("knn_entropy: degenerate (constant) samples");

  // Jitter exact duplicates so every k-th distance is positive.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (std::size_t j = 0; j < d; ++j)
      if (samples(a, j) != samples(b, j)) return samples(a, j) < samples(b, j);
    return a < b;
  });
  std::size_t run = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (row_equal(order[i], order[i - 1])) {
      ++run;
      samples(order[i], 0) += 1e-12 * static_cast<double>(run);
    } else {
      run = 0;
    }
  }

  std::vector<double> dist(n);
  double log_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t m = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = samples(i, c) - samples(j, c);
        s += diff * diff;
      }
      dist[m++] = s;
    }
    std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.begin() + m);
    double r = std::sqrt(dist[k - 1]);
    if (r <= 0.0) r = 1e-12;
    log_sum += std::log(r);
  }
  const double dd = static_cast<double>(d);
  const double log_unit_ball = (dd / 2.0) * std::log(std::numbers::pi) - std::lgamma(dd / 2.0 + 1.0);
  return boost::math::digamma(static_cast<double>(n)) - boost::math::digamma(static_cast<double>(k)) +
         log_unit_ball + dd / static_cast<double>(n) * log_sum;
}

}  // namespace doanav::metrics
