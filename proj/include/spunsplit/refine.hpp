#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "spunsplit/rational.hpp"

namespace spunsplit {

// Pair (first[i], second[j]) carrying `weight`.
struct RefinedPair {
  std::size_t first = 0;
  std::size_t second = 0;
  Rational weight;
};

// Two-pointer merge of two weight lists with equal sums. Zero entries are
// skipped. At most |a| + |b| - 1 pairs; marginals reproduce the inputs.
std::vector<RefinedPair> refine_convex(std::span<const Rational> a, std::span<const Rational> b);

// Normalizes both lists, refines, and scales the result to sum to `total`.
std::vector<RefinedPair> refine_linear(std::span<const Rational> a, std::span<const Rational> b,
                                       const Rational& total);

}  // namespace spunsplit
