#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spunsplit/instance.hpp"

namespace spunsplit {

struct AlmostUnsplittableFlow {
  Multiflow flow;
  // Per tree node: I_w, ascending.
  std::vector<std::vector<CommodityId>> fractional;
  // Per tree node: the commodity fractional in both children (P-nodes only).
  std::vector<std::optional<CommodityId>> split;
  int swap_calls = 0;
  int swap_iterations = 0;
};

// A u_w-v_w path inside G_w with positive flow of commodity i. Depth-first,
// smallest arc id first. Throws InvariantError when none exists.
std::vector<ArcId> flow_carrying_path(const Instance& inst, const Multiflow& flow, CommodityId i,
                                      int w);

// Exchanges flow of i1 (fractional in the first child of P-node w) and i2
// (fractional in the second child) until one of them leaves its child.
// Throws std::invalid_argument on violated preconditions. `iterations`, if
// given, receives the number of exchange rounds.
Multiflow swap(const Instance& inst, const Multiflow& flow, int w, CommodityId i1, CommodityId i2,
               int* iterations = nullptr);

// Swaps the lexicographically smallest shared pair until the two children of
// P-node w share at most one fractional commodity.
Multiflow reduce_shared_fractional(const Instance& inst, const Multiflow& flow, int w,
                                   int* swap_calls = nullptr, int* iterations = nullptr);

// Top-down sweep over the P-nodes.
AlmostUnsplittableFlow make_almost_unsplittable(const Instance& inst, const Multiflow& flow);

// Empty when |I_w| <= 2 everywhere and children of P-nodes share at most one
// fractional commodity; otherwise a description of the first failure.
std::string certify_almost_unsplittable(const Instance& inst, const Multiflow& flow);

}  // namespace spunsplit
