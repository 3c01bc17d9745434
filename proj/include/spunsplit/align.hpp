#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spunsplit/instance.hpp"

namespace spunsplit {

// Node v split into v (in-copy, keeps incoming arcs and sinks) and a new
// out-copy (outgoing arcs and sources), joined by an uncapacitated link arc.
struct NodeSplit {
  NodeId in_node = -1;
  NodeId out_node = -1;
  ArcId link_arc = -1;
};

// Original node, arc and commodity ids survive alignment unchanged in role:
// original arcs keep their ids, new nodes and link arcs are appended.
struct AlignmentMap {
  int original_nodes = 0;
  int original_arcs = 0;
  // Per original commodity, its subcommodities in path order.
  std::vector<std::vector<CommodityId>> chains;
  std::vector<NodeSplit> splits;
  // Per aligned node: the original node it came from.
  std::vector<NodeId> node_origin;

  bool is_identity() const;
  // Sums subcommodity flows and drops link arcs.
  Multiflow to_original(const Instance& original, const Multiflow& aligned_flow) const;
  // Cuts each commodity's flow at its breakpoints and fills link arcs.
  Multiflow to_aligned(const Instance& original, const Instance& aligned,
                       const Multiflow& flow) const;
};

// True when some tree node has (u, v) = (s_i, t_i).
bool is_aligned(const Instance& inst, CommodityId i);

// A node other than s_i, t_i on every s_i-t_i path, found by the sp-tree walk:
// the shallowest node with u = s_i; if t_i lies outside it, its end node;
// otherwise the start node of the shallowest node ending at t_i. Falls back
// to the smallest mandatory node id if the walk lands on a non-mandatory
// node. None when i is aligned or no such node exists.
std::optional<NodeId> find_mandatory_node(const Instance& inst, CommodityId i);

// Subdivides commodities in increasing id order to a fixed point, then splits
// the smallest node that is both a source and a sink, and repeats.
std::pair<Instance, AlignmentMap> align_instance(const Instance& inst);

struct Transshipment {
  // Supply positive, demand negative.
  std::vector<Rational> b;
  // Present once solved.
  std::optional<std::vector<Rational>> flow;
};

Transshipment to_transshipment(const Instance& inst);

struct TransshipmentCut {
  // Residual-reachable side of the super source.
  std::vector<NodeId> nodes;
  std::vector<ArcId> arcs;
  Rational capacity;
  Rational supply;
};

struct TransshipmentResult {
  bool feasible = false;
  std::vector<Rational> flow;
  std::optional<TransshipmentCut> cut;
};

// Scales to a common denominator and runs integer max-flow between a super
// source and a super sink. Throws std::invalid_argument if b does not sum to 0.
TransshipmentResult solve_transshipment(const Digraph& g, const std::vector<Rational>& b);

// Peels commodities off y, deepest aligned component first (ties: smaller
// id), each by a capped max-flow inside its component.
Multiflow multiflow_from_transshipment(const Instance& aligned, const std::vector<Rational>& y);

struct IntegerFlowTerm {
  Rational rho;
  std::vector<Rational> flow;
};

// Convex combination of integral b-transshipments within floor/ceil of y.
// Each round rounds y to an integral point by pushing around fractional
// cycles, then takes the largest step that keeps the rest inside the box.
std::vector<IntegerFlowTerm> integer_decomposition(const Digraph& g, const std::vector<Rational>& b,
                                                   const std::vector<Rational>& y);

struct IntegerMultiflowTerm {
  Rational rho;
  Multiflow flow;
};

// Lifts integer_decomposition of the total flow to integer multiflows of the
// instance. Requires integral demands and a series-parallel graph.
std::vector<IntegerMultiflowTerm> integer_multiflow_decomposition(const Instance& inst,
                                                                  const Multiflow& flow);

struct MultiflowSolution {
  bool feasible = false;
  Multiflow flow;
  // Infeasible: the transshipment cut, nodes mapped back to the input graph.
  std::optional<TransshipmentCut> cut;
};

// align, transshipment, peel, map back.
MultiflowSolution solve_multiflow(const Instance& inst);
// Same with integral capacities and demands required; the flow is integral.
MultiflowSolution feasible_integer_multiflow(const Instance& inst);

}  // namespace spunsplit
