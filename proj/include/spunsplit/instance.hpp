#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spunsplit/digraph.hpp"
#include "spunsplit/rational.hpp"
#include "spunsplit/sp_tree.hpp"

namespace spunsplit {

using CommodityId = int;

struct Commodity {
  std::string name;
  NodeId source = -1;
  NodeId sink = -1;
  Rational demand;
};

// Graph, terminals and commodities. The sp-tree is present only when the graph
// is series-parallel with respect to the terminals; cut checks and the path
// oracle also accept other graphs.
class Instance {
 public:
  // Throws std::invalid_argument on s = t, d <= 0, unknown nodes, missing
  // s-t paths or an empty commodity list.
  Instance(Digraph graph, NodeId source_terminal, NodeId sink_terminal,
           std::vector<Commodity> commodities);

  const Digraph& graph() const { return graph_; }
  NodeId source_terminal() const { return source_terminal_; }
  NodeId sink_terminal() const { return sink_terminal_; }

  bool is_series_parallel() const { return tree_.has_value(); }
  // Throws std::invalid_argument when the graph is not series-parallel.
  const SpTree& sp_tree() const;
  const std::optional<NotSeriesParallel>& sp_failure() const { return failure_; }

  int num_commodities() const { return static_cast<int>(commodities_.size()); }
  const Commodity& commodity(CommodityId i) const { return commodities_.at(i); }
  const std::vector<Commodity>& commodities() const { return commodities_; }
  std::optional<CommodityId> find_commodity(std::string_view name) const;
  const Rational& d_max() const { return d_max_; }

 private:
  Digraph graph_;
  NodeId source_terminal_;
  NodeId sink_terminal_;
  std::vector<Commodity> commodities_;
  std::optional<SpTree> tree_;
  std::optional<NotSeriesParallel> failure_;
  Rational d_max_;
};

// Arc x commodity matrix, stored per commodity with nonzero entries only.
class Multiflow {
 public:
  Multiflow() = default;
  Multiflow(int num_arcs, int num_commodities);

  int num_arcs() const { return num_arcs_; }
  int num_commodities() const { return static_cast<int>(rows_.size()); }

  Rational get(ArcId e, CommodityId i) const;
  void set(ArcId e, CommodityId i, const Rational& value);
  void add(ArcId e, CommodityId i, const Rational& delta);
  const std::map<ArcId, Rational>& commodity_flow(CommodityId i) const { return rows_.at(i); }

  bool is_integral() const;

  friend bool operator==(const Multiflow& a, const Multiflow& b) {
    return a.num_arcs_ == b.num_arcs_ && a.rows_ == b.rows_;
  }

 private:
  int num_arcs_ = 0;
  std::vector<std::map<ArcId, Rational>> rows_;
};

// x_e = sum_i X_{e,i}
std::vector<Rational> total_flow(const Multiflow& flow);

struct ConservationViolation {
  NodeId node = -1;
  CommodityId commodity = -1;
  // (out - in) minus the required net outflow.
  Rational imbalance;
};

// Commodities in id order, nodes in id order; also rejects negative entries
// (reported with the arc's tail).
std::optional<ConservationViolation> check_conservation(const Instance& inst, const Multiflow& flow);

// Every commodity uses only 0 or d_i on each arc and conserves flow.
bool is_unsplittable(const Instance& inst, const Multiflow& flow);

struct DemandShareVector {
  int tree_node = -1;
  std::vector<Rational> z;

  // I: 0 < z < 1, ascending ids.
  std::vector<CommodityId> fractional() const;
  // I-bar: z = 1, ascending ids.
  std::vector<CommodityId> full() const;
  bool is_fractional(CommodityId i) const { return z[i].is_positive() && z[i] < Rational(1); }
};

// z_{w,i}: 1 if an endpoint of i is an inner node of G_w, otherwise the flow
// of i on arcs of E_w leaving u_w divided by d_i.
Rational demand_share(const Instance& inst, const Multiflow& flow, int w, CommodityId i);
DemandShareVector demand_shares(const Instance& inst, const Multiflow& flow, int w);
std::vector<DemandShareVector> all_demand_shares(const Instance& inst, const Multiflow& flow);

struct ShareViolation {
  int tree_node = -1;
  CommodityId commodity = -1;
  std::string rule;
};

std::optional<ShareViolation> check_share_recurrences(const Instance& inst,
                                                      const std::vector<DemandShareVector>& shares);
std::optional<ShareViolation> check_share_recurrences(const Instance& inst, const Multiflow& flow);

}  // namespace spunsplit
