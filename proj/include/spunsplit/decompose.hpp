#pragma once

#include <array>
#include <compare>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spunsplit/almost.hpp"
#include "spunsplit/coefficients.hpp"
#include "spunsplit/instance.hpp"

namespace spunsplit {

// Placeholders for missing fractional commodities. Never routed anywhere.
inline constexpr CommodityId kDummy = -1;
inline constexpr CommodityId kDummyPrime = -2;

// Bit 0 selects the first label (p), bit 1 the second (q). Values 0..3 are the
// options J1..J4.
enum class RoutingOption : unsigned { None = 0, First = 1, Second = 2, Both = 3 };

inline int option_index(RoutingOption j) { return static_cast<int>(j) + 1; }
inline RoutingOption option_from_index(int j) { return static_cast<RoutingOption>(j - 1); }

struct RoutingContext {
  int tree_node = -1;
  // Fractional commodities padded with dummies; p < q for real ids.
  CommodityId p = kDummy;
  CommodityId q = kDummyPrime;
  std::vector<CommodityId> full;
  // P-nodes: the commodity fractional in both children, if any.
  std::optional<CommodityId> split;
  MuVector mu;
};

std::vector<RoutingContext> routing_contexts(const Instance& inst, const Multiflow& almost);

// One row of a combination table: parent option <- (first child option,
// second child option), weighted.
struct CombinationRow {
  RoutingOption parent;
  RoutingOption first;
  RoutingOption second;
  Rational weight;
};

// Both children use the parent's labels.
std::vector<CombinationRow> series_rows(const MuVector& mu);
// Children labelled (p, r) and (r, q).
std::vector<CombinationRow> general_parallel_rows(const LambdaVector& lambda);
// Children labelled (p, dummy) and (p, q).
std::vector<CombinationRow> p_eq_r_parallel_rows(const LambdaVector& lambda);
// No split commodity. Child k keeps the parent's slot for each commodity it
// carries; `first_mask`/`second_mask` mark which parent slots live where.
std::vector<CombinationRow> unshared_parallel_rows(const MuVector& mu, unsigned first_mask,
                                                   unsigned second_mask);

// Term weights of a child decomposition, grouped by option, in term order.
struct GroupedWeights {
  std::array<std::vector<Rational>, 4> groups;
};

struct PlannedTerm {
  RoutingOption parent;
  RoutingOption first;
  std::size_t first_index;
  RoutingOption second;
  std::size_t second_index;
  Rational rho;
};

// Refines the designated groups row by row. Throws InvariantError when a
// child's group total differs from the sum of the row weights using it.
std::vector<PlannedTerm> plan_combination(std::span<const CombinationRow> rows,
                                          const GroupedWeights& first,
                                          const GroupedWeights& second);

// Per commodity the arcs it uses. Inside a subtree the lists are sorted by arc
// id; in final decompositions they are ordered along the path.
struct UnsplittableRouting {
  std::vector<std::vector<ArcId>> paths;

  friend auto operator<=>(const UnsplittableRouting&, const UnsplittableRouting&) = default;
};

struct DecompositionTerm {
  Rational rho;
  UnsplittableRouting routing;
};

struct ConvexDecomposition {
  int scope = 0;
  std::vector<DecompositionTerm> terms;
};

Multiflow routing_matrix(const Instance& inst, const UnsplittableRouting& routing);
std::vector<Rational> routing_totals(const Instance& inst, const UnsplittableRouting& routing);

// Demand shares of the almost-unsplittable flow at every tree node.
using ShareTable = std::vector<DemandShareVector>;

ConvexDecomposition leaf_decomposition(const Instance& inst, const ShareTable& shares, int w);
ConvexDecomposition series_combine(const Instance& inst, const ShareTable& shares, int w,
                                   const ConvexDecomposition& first,
                                   const ConvexDecomposition& second);
ConvexDecomposition parallel_combine(const Instance& inst, const ShareTable& shares, int w,
                                     const ConvexDecomposition& first,
                                     const ConvexDecomposition& second);

// Bottom-up fold. The input must be almost unsplittable. The result has
// ordered paths, merged duplicates and lexicographically sorted terms.
ConvexDecomposition decompose_recursive(const Instance& inst, const Multiflow& almost);

enum class BoundMode { DMax, TwoDMax };

std::string bound_mode_name(BoundMode mode);
BoundMode parse_bound_mode(std::string_view text);

struct BoundReport {
  BoundMode mode = BoundMode::DMax;
  Rational d_max;
  Rational bound;
  Rational max_arc_deviation;
  // Every term, every arc: |y_e - x_e| < bound.
  bool arc_bound_ok = true;
  // Every term, every tree node: |component flow - x-bar| < d_max.
  bool component_bound_ok = true;
  // Every tree node, all four options including zero-weight ones: the
  // component flow differs from x-bar by less than 2 d_max.
  bool option_bound_ok = true;
  std::size_t support_size = 0;
};

struct DecompositionResult {
  ConvexDecomposition decomposition;
  AlmostUnsplittableFlow almost;
  BoundReport report;
};

// Throws InvariantError carrying term, arc and values on a bound violation.
DecompositionResult decompose_unsplittable(const Instance& inst, const Multiflow& flow,
                                           BoundMode mode = BoundMode::DMax);

struct VerificationReport {
  std::vector<std::string> failures;
  Rational max_arc_deviation;
  std::size_t support_size = 0;

  bool ok() const { return failures.empty(); }
};

// Independent re-check of a final decomposition against the flow X.
VerificationReport verify_decomposition(const Instance& inst, const Multiflow& flow,
                                        const ConvexDecomposition& decomposition,
                                        BoundMode mode = BoundMode::DMax);

}  // namespace spunsplit
