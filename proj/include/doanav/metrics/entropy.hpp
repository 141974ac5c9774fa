#pragma once

#include <cstddef>
#include <vector>

#include "doanav/ad/tensor.hpp"

namespace doanav::metrics {

/// Kozachenko–Leonenko k-nearest-neighbour differential entropy (nats) of the
/// rows of samples (n x d):
///   H = psi(n) - psi(k) + log V_d + (d / n) * sum_i log r_{i,k}
/// with V_d the volume of the unit d-ball and r_{i,k} the Euclidean distance
/// from row i to its k-th nearest neighbour. Exact duplicate rows are jittered
/// by 1e-12. Throws std::invalid_argument when n <= k or every row is equal.
double knn_entropy(const ad::Tensor& samples, std::size_t k = 3);

}  // namespace doanav::metrics
