#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace doanav {

using Rng = std::mt19937_64;

/// Derives an independent seed for a named substream of a root seed, so that
/// e.g. toggling dropout never shifts world generation.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t root, std::string_view stream, std::uint64_t index = 0) {
  return Rng(derive_seed(root, stream, index));
}

}  // namespace doanav
