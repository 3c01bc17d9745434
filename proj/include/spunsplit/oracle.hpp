#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "spunsplit/instance.hpp"

namespace spunsplit {

struct OracleLimits {
  std::size_t max_routings = 1'000'000;
  std::size_t max_paths = 10'000;

  // Defaults, with max_routings replaced by SPUNSPLIT_ENUM_CAP when set.
  static OracleLimits from_environment();
};

using ArcPath = std::vector<ArcId>;

// All simple s-t paths, lexicographic by arc ids. `allowed`, if given,
// restricts the arcs. Throws SizeError beyond `cap` paths.
std::vector<ArcPath> enumerate_paths(const Digraph& g, NodeId s, NodeId t, std::size_t cap,
                                     const std::vector<char>* allowed = nullptr);

// Per commodity the candidate paths; a routing picks a multiset of d_i unit
// paths for every commodity.
struct RoutingEnumeration {
  std::vector<std::vector<ArcPath>> paths;
  // Number of routings in the product (saturates at SIZE_MAX).
  std::size_t product_size = 0;
};

RoutingEnumeration build_routing_enumeration(const Instance& inst, const OracleLimits& limits,
                                             const Multiflow* support = nullptr);

// Depth-first search over integer routings within capacities. Requires
// integral demands; throws SizeError when the product exceeds the cap.
std::optional<Multiflow> exhaustive_feasibility(const Instance& inst,
                                                const OracleLimits& limits = OracleLimits::from_environment());

enum class ProbeVerdict { Impossible, Inconclusive, Unsplittable };

std::string probe_verdict_name(ProbeVerdict verdict);

struct ProbeResult {
  ProbeVerdict verdict = ProbeVerdict::Inconclusive;
  // Integer multiflows with support inside supp(X) and totals within
  // floor/ceil of x; zero proves X is not a convex combination of them.
  std::size_t members_found = 0;
  std::size_t routings_examined = 0;
  // Arcs whose total x_e is a positive integer, so every member must hit it.
  std::vector<ArcId> forced_arcs;
  std::string note;
};

ProbeResult matrix_decomposability_probe(const Instance& inst, const Multiflow& flow,
                                         const OracleLimits& limits = OracleLimits::from_environment());

}  // namespace spunsplit
