#pragma once

#include <cmath>
#include <cstdint>

#include "branchkit/graph.hpp"

namespace branchkit {

// Linear indexing of the N(N-1)/2 unordered pairs (i<j), lexicographic by i.
// Lets samplers skip through "all pairs" without materializing them.

inline std::uint64_t pair_count(std::uint64_t n) { return n * (n - 1) / 2; }

inline std::uint64_t pair_row_offset(std::uint64_t n, std::uint64_t i) {
  return i * (n - 1) - i * (i - 1) / 2;
}

inline Edge pair_from_index(std::uint64_t n, std::uint64_t t) {
  // Quadratic-formula guess, then fix up to guard against rounding.
  const double nn = static_cast<double>(n);
  double guess = std::floor((2.0 * nn - 1.0 -
                             std::sqrt((2.0 * nn - 1.0) * (2.0 * nn - 1.0) -
                                       8.0 * static_cast<double>(t))) /
                            2.0);
  std::uint64_t i = guess < 0 ? 0 : static_cast<std::uint64_t>(guess);
  if (i >= n - 1) i = n - 2;
  while (i > 0 && pair_row_offset(n, i) > t) --i;
  while (pair_row_offset(n, i + 1) <= t) ++i;
  const std::uint64_t j = t - pair_row_offset(n, i) + i + 1;
  return {static_cast<VertexId>(i), static_cast<VertexId>(j)};
}

inline std::uint64_t pair_to_index(std::uint64_t n, VertexId i, VertexId j) {
  return pair_row_offset(n, i) + (j - i - 1);
}

}  // namespace branchkit
