#pragma once

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "spunsplit/digraph.hpp"

namespace spunsplit {

enum class SpKind { P, S, Q };

char kind_letter(SpKind kind);

struct SpNode {
  SpKind kind = SpKind::Q;
  NodeId u = -1;
  NodeId v = -1;
  std::array<int, 2> children{-1, -1};
  ArcId arc = -1;  // Q-nodes only
  int parent = -1;
  int depth = 0;
};

// Binary decomposition tree. Node 0 is the root. Numbering: the root is 0 and
// every internal node hands consecutive ids to its two children before the
// subtrees are numbered depth first.
class SpTree {
 public:
  SpTree(const Digraph& g, std::vector<SpNode> nodes);

  int size() const { return static_cast<int>(nodes_.size()); }
  int root() const { return 0; }
  const SpNode& node(int w) const;
  const std::vector<SpNode>& nodes() const { return nodes_; }
  bool is_leaf(int w) const { return node(w).kind == SpKind::Q; }

  // E_w, ascending.
  const std::vector<ArcId>& arcs(int w) const;
  // V_w, ascending.
  const std::vector<NodeId>& graph_nodes(int w) const;
  bool contains(int w, NodeId v) const;
  // v in V_w minus {u_w, v_w}.
  bool is_inner(int w, NodeId v) const;
  // Arcs of E_w leaving u_w.
  const std::vector<ArcId>& start_arcs(int w) const;
  ArcId min_arc(int w) const { return arcs(w).front(); }
  int leaf_of(ArcId e) const { return leaf_of_arc_.at(e); }

  std::vector<int> preorder() const;
  std::vector<int> postorder() const;

 private:
  void check(int w) const;

  std::vector<SpNode> nodes_;
  std::vector<std::vector<ArcId>> arcs_;
  std::vector<std::vector<NodeId>> graph_nodes_;
  std::vector<std::vector<char>> member_;
  std::vector<std::vector<ArcId>> start_arcs_;
  std::vector<int> leaf_of_arc_;
};

// A composite edge of the irreducible kernel and the original arcs it absorbed.
struct KernelEdge {
  NodeId tail = -1;
  NodeId head = -1;
  std::vector<ArcId> arcs;
};

struct NotSeriesParallel {
  std::string reason;
  std::vector<NodeId> nodes;
  std::vector<KernelEdge> edges;
};

// Series/parallel reductions until one composite edge (u0, v0) remains.
// Parallel bundles are ordered by smallest arc id and nested to the right;
// series chains likewise.
std::variant<SpTree, NotSeriesParallel> recognize_sp(const Digraph& g, NodeId u0, NodeId v0);

// E_w. Unknown w throws std::invalid_argument.
std::vector<ArcId> sp_arcs(const SpTree& tree, int w);

// Structural check of a tree against its graph. Empty string when valid.
std::string validate_sp_tree(const Digraph& g, const SpTree& tree);

}  // namespace spunsplit
