#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "spunsplit/rational.hpp"

namespace spunsplit {

using NodeId = int;
using ArcId = int;

struct Arc {
  NodeId tail = -1;
  NodeId head = -1;
  // Absent means unbounded.
  std::optional<Rational> capacity;
};

// Directed multigraph with named nodes and arcs. Ids are dense indices in
// insertion order; "smallest id" always refers to these indices.
class Digraph {
 public:
  NodeId add_node(std::string name);
  // Throws std::invalid_argument for self-loops, unknown nodes, negative
  // capacities or duplicate names.
  ArcId add_arc(NodeId tail, NodeId head, std::optional<Rational> capacity = std::nullopt,
                std::string name = {});

  int num_nodes() const { return static_cast<int>(node_names_.size()); }
  int num_arcs() const { return static_cast<int>(arcs_.size()); }

  const Arc& arc(ArcId e) const { return arcs_.at(e); }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const std::string& node_name(NodeId v) const { return node_names_.at(v); }
  const std::string& arc_name(ArcId e) const { return arc_names_.at(e); }

  std::optional<NodeId> find_node(std::string_view name) const;
  std::optional<ArcId> find_arc(std::string_view name) const;

  const std::vector<ArcId>& out_arcs(NodeId v) const { return out_.at(v); }
  const std::vector<ArcId>& in_arcs(NodeId v) const { return in_.at(v); }

  // Nodes reachable from `from`, skipping arcs with blocked[e] set.
  std::vector<char> reachable_from(NodeId from, const std::vector<char>* blocked = nullptr) const;
  bool has_path(NodeId from, NodeId to, const std::vector<char>* blocked = nullptr) const;
  bool is_acyclic() const;

 private:
  std::vector<std::string> node_names_;
  std::vector<std::string> arc_names_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<ArcId>> out_;
  std::vector<std::vector<ArcId>> in_;
  std::unordered_map<std::string, NodeId> node_index_;
  std::unordered_map<std::string, ArcId> arc_index_;
};

}  // namespace spunsplit
