#include "spunsplit/sp_tree.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace spunsplit {

char kind_letter(SpKind kind) {
  switch (kind) {
    case SpKind::P:
      return 'P';
    case SpKind::S:
      return 'S';
    case SpKind::Q:
      return 'Q';
  }
  return '?';
}

SpTree::SpTree(const Digraph& g, std::vector<SpNode> nodes) : nodes_(std::move(nodes)) {
  const int n = size();
  if (n == 0) throw std::invalid_argument("empty sp-tree");
  arcs_.assign(n, {});
  graph_nodes_.assign(n, {});
  member_.assign(n, std::vector<char>(g.num_nodes(), 0));
  start_arcs_.assign(n, {});
  leaf_of_arc_.assign(g.num_arcs(), -1);

  nodes_[0].parent = -1;
  nodes_[0].depth = 0;
  for (int w : preorder()) {
    for (int c : nodes_[w].children) {
      if (c < 0) continue;
      nodes_[c].parent = w;
      nodes_[c].depth = nodes_[w].depth + 1;
    }
  }
  for (int w : postorder()) {
    const SpNode& sn = nodes_[w];
    if (sn.kind == SpKind::Q) {
      arcs_[w] = {sn.arc};
      leaf_of_arc_.at(sn.arc) = w;
      member_[w][sn.u] = member_[w][sn.v] = 1;
    } else {
      for (int c : sn.children) {
        arcs_[w].insert(arcs_[w].end(), arcs_[c].begin(), arcs_[c].end());
        for (NodeId v = 0; v < g.num_nodes(); ++v) member_[w][v] |= member_[c][v];
      }
      std::sort(arcs_[w].begin(), arcs_[w].end());
    }
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      if (member_[w][v]) graph_nodes_[w].push_back(v);
    }
    for (ArcId e : arcs_[w]) {
      if (g.arc(e).tail == sn.u) start_arcs_[w].push_back(e);
    }
  }
}

void SpTree::check(int w) const {
  if (w < 0 || w >= size()) {
    throw std::invalid_argument("unknown sp-tree node " + std::to_string(w));
  }
}

const SpNode& SpTree::node(int w) const {
  check(w);
  return nodes_[w];
}

const std::vector<ArcId>& SpTree::arcs(int w) const {
  check(w);
  return arcs_[w];
}

const std::vector<NodeId>& SpTree::graph_nodes(int w) const {
  check(w);
  return graph_nodes_[w];
}

bool SpTree::contains(int w, NodeId v) const {
  check(w);
  return v >= 0 && v < static_cast<NodeId>(member_[w].size()) && member_[w][v];
}

bool SpTree::is_inner(int w, NodeId v) const {
  return contains(w, v) && v != nodes_[w].u && v != nodes_[w].v;
}

const std::vector<ArcId>& SpTree::start_arcs(int w) const {
  check(w);
  return start_arcs_[w];
}

std::vector<int> SpTree::preorder() const {
  std::vector<int> order;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const int w = stack.back();
    stack.pop_back();
    order.push_back(w);
    const auto& ch = nodes_[w].children;
    if (ch[1] >= 0) stack.push_back(ch[1]);
    if (ch[0] >= 0) stack.push_back(ch[0]);
  }
  return order;
}

std::vector<int> SpTree::postorder() const {
  std::vector<int> order;
  std::vector<std::pair<int, bool>> stack{{0, false}};
  while (!stack.empty()) {
    auto [w, expanded] = stack.back();
    stack.pop_back();
    if (expanded || nodes_[w].kind == SpKind::Q) {
      order.push_back(w);
      continue;
    }
    stack.push_back({w, true});
    stack.push_back({nodes_[w].children[1], false});
    stack.push_back({nodes_[w].children[0], false});
  }
  return order;
}

namespace {

// Flattened composite: a P-fragment never has P parts, an S-fragment never has
// S parts.
struct Fragment {
  SpKind kind;
  NodeId u;
  NodeId v;
  std::vector<int> parts;
  ArcId arc = -1;
  ArcId min_arc = -1;
};

struct LiveEdge {
  NodeId tail;
  NodeId head;
  int fragment;
  bool alive = true;
};

class Reducer {
 public:
  Reducer(const Digraph& g, NodeId u0, NodeId v0) : g_(g), u0_(u0), v0_(v0) {
    out_.resize(g.num_nodes());
    in_.resize(g.num_nodes());
    for (ArcId e = 0; e < g.num_arcs(); ++e) {
      const Arc& a = g.arc(e);
      fragments_.push_back(Fragment{SpKind::Q, a.tail, a.head, {}, e, e});
      add_edge(a.tail, a.head, e);
    }
  }

  void run() {
    while (reduce_parallel() || reduce_series()) {
    }
  }

  std::vector<int> alive_edges() const {
    std::vector<int> ids;
    for (int i = 0; i < static_cast<int>(edges_.size()); ++i) {
      if (edges_[i].alive) ids.push_back(i);
    }
    return ids;
  }

  const LiveEdge& edge(int i) const { return edges_[i]; }
  const Fragment& fragment(int f) const { return fragments_[f]; }

  void collect_arcs(int f, std::vector<ArcId>& out) const {
    const Fragment& fr = fragments_[f];
    if (fr.kind == SpKind::Q) {
      out.push_back(fr.arc);
      return;
    }
    for (int p : fr.parts) collect_arcs(p, out);
  }

 private:
  void add_edge(NodeId tail, NodeId head, int fragment) {
    const int id = static_cast<int>(edges_.size());
    edges_.push_back(LiveEdge{tail, head, fragment});
    out_[tail].insert(id);
    in_[head].insert(id);
  }

  void kill(int id) {
    edges_[id].alive = false;
    out_[edges_[id].tail].erase(id);
    in_[edges_[id].head].erase(id);
  }

  void absorb(std::vector<int>& parts, int f, SpKind flatten) const {
    if (fragments_[f].kind == flatten) {
      parts.insert(parts.end(), fragments_[f].parts.begin(), fragments_[f].parts.end());
    } else {
      parts.push_back(f);
    }
  }

  bool reduce_parallel() {
    std::map<std::pair<NodeId, NodeId>, std::vector<int>> bundles;
    for (int i = 0; i < static_cast<int>(edges_.size()); ++i) {
      if (edges_[i].alive) bundles[{edges_[i].tail, edges_[i].head}].push_back(i);
    }
    for (auto& [ends, ids] : bundles) {
      if (ids.size() < 2) continue;
      Fragment merged{SpKind::P, ends.first, ends.second, {}};
      for (int id : ids) absorb(merged.parts, edges_[id].fragment, SpKind::P);
      std::sort(merged.parts.begin(), merged.parts.end(), [&](int a, int b) {
        return fragments_[a].min_arc < fragments_[b].min_arc;
      });
      merged.min_arc = fragments_[merged.parts.front()].min_arc;
      for (int id : ids) kill(id);
      fragments_.push_back(std::move(merged));
      add_edge(ends.first, ends.second, static_cast<int>(fragments_.size()) - 1);
      return true;
    }
    return false;
  }

  bool reduce_series() {
    for (NodeId x = 0; x < g_.num_nodes(); ++x) {
      if (x == u0_ || x == v0_) continue;
      if (in_[x].size() != 1 || out_[x].size() != 1) continue;
      const int in_id = *in_[x].begin();
      const int out_id = *out_[x].begin();
      const NodeId tail = edges_[in_id].tail;
      const NodeId head = edges_[out_id].head;
      if (tail == head) continue;
      Fragment chain{SpKind::S, tail, head, {}};
      absorb(chain.parts, edges_[in_id].fragment, SpKind::S);
      absorb(chain.parts, edges_[out_id].fragment, SpKind::S);
      chain.min_arc = std::min(fragments_[edges_[in_id].fragment].min_arc,
                               fragments_[edges_[out_id].fragment].min_arc);
      kill(in_id);
      kill(out_id);
      fragments_.push_back(std::move(chain));
      add_edge(tail, head, static_cast<int>(fragments_.size()) - 1);
      return true;
    }
    return false;
  }

  const Digraph& g_;
  NodeId u0_;
  NodeId v0_;
  std::vector<Fragment> fragments_;
  std::vector<LiveEdge> edges_;
  std::vector<std::set<int>> out_;
  std::vector<std::set<int>> in_;
};

// Expands flattened fragments into binary nodes, right-nested.
class TreeBuilder {
 public:
  explicit TreeBuilder(const Reducer& reducer) : reducer_(reducer) {}

  int build(int f) {
    const Fragment& fr = reducer_.fragment(f);
    if (fr.kind == SpKind::Q) {
      SpNode leaf;
      leaf.kind = SpKind::Q;
      leaf.u = fr.u;
      leaf.v = fr.v;
      leaf.arc = fr.arc;
      return push(leaf);
    }
    std::vector<int> parts;
    for (int p : fr.parts) parts.push_back(build(p));
    int right = parts.back();
    for (int k = static_cast<int>(parts.size()) - 2; k >= 0; --k) {
      SpNode inner;
      inner.kind = fr.kind;
      inner.u = nodes_[parts[k]].u;
      inner.v = fr.v;
      inner.children = {parts[k], right};
      right = push(inner);
    }
    return right;
  }

  // Root gets 0; each internal node numbers its two children consecutively
  // before recursing into them.
  std::vector<SpNode> renumber(int root) const {
    std::vector<int> new_id(nodes_.size(), -1);
    new_id[root] = 0;
    int next = 1;
    std::vector<int> dfs{root};
    while (!dfs.empty()) {
      const int w = dfs.back();
      dfs.pop_back();
      const auto& ch = nodes_[w].children;
      if (ch[0] < 0) continue;
      new_id[ch[0]] = next++;
      new_id[ch[1]] = next++;
      dfs.push_back(ch[1]);
      dfs.push_back(ch[0]);
    }
    std::vector<SpNode> out(nodes_.size());
    for (std::size_t w = 0; w < nodes_.size(); ++w) {
      if (new_id[w] < 0) continue;
      SpNode copy = nodes_[w];
      for (int& c : copy.children) {
        if (c >= 0) c = new_id[c];
      }
      out[new_id[w]] = copy;
    }
    return out;
  }

 private:
  int push(const SpNode& node) {
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size()) - 1;
  }

  const Reducer& reducer_;
  std::vector<SpNode> nodes_;
};

NotSeriesParallel kernel_of(const Digraph& g, const Reducer& reducer, std::string reason) {
  NotSeriesParallel witness;
  witness.reason = std::move(reason);
  std::set<NodeId> nodes;
  for (int id : reducer.alive_edges()) {
    const LiveEdge& le = reducer.edge(id);
    KernelEdge ke{le.tail, le.head, {}};
    reducer.collect_arcs(le.fragment, ke.arcs);
    std::sort(ke.arcs.begin(), ke.arcs.end());
    witness.edges.push_back(std::move(ke));
    nodes.insert(le.tail);
    nodes.insert(le.head);
  }
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (g.out_arcs(v).empty() && g.in_arcs(v).empty()) nodes.insert(v);
  }
  witness.nodes.assign(nodes.begin(), nodes.end());
  return witness;
}

}  // namespace

std::variant<SpTree, NotSeriesParallel> recognize_sp(const Digraph& g, NodeId u0, NodeId v0) {
  if (u0 < 0 || u0 >= g.num_nodes() || v0 < 0 || v0 >= g.num_nodes()) {
    throw std::invalid_argument("terminal is not a node");
  }
  if (u0 == v0) throw std::invalid_argument("terminals must differ");
  Reducer reducer(g, u0, v0);
  if (g.num_arcs() == 0) return kernel_of(g, reducer, "graph has no arcs");
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (g.out_arcs(v).empty() && g.in_arcs(v).empty()) {
      return kernel_of(g, reducer, "isolated node '" + g.node_name(v) + "'");
    }
  }
  reducer.run();
  const auto alive = reducer.alive_edges();
  if (alive.size() != 1) return kernel_of(g, reducer, "irreducible kernel remains");
  const LiveEdge& last = reducer.edge(alive.front());
  if (last.tail != u0 || last.head != v0) {
    return kernel_of(g, reducer, "remaining composite does not join the terminals");
  }
  TreeBuilder builder(reducer);
  const int root = builder.build(last.fragment);
  return SpTree(g, builder.renumber(root));
}

std::vector<ArcId> sp_arcs(const SpTree& tree, int w) { return tree.arcs(w); }

std::string validate_sp_tree(const Digraph& g, const SpTree& tree) {
  std::ostringstream err;
  std::vector<int> seen(g.num_arcs(), 0);
  for (int w = 0; w < tree.size(); ++w) {
    const SpNode& sn = tree.node(w);
    if (sn.kind == SpKind::Q) {
      if (sn.arc < 0 || sn.arc >= g.num_arcs()) {
        err << "leaf " << w << " has no arc";
        return err.str();
      }
      ++seen[sn.arc];
      if (g.arc(sn.arc).tail != sn.u || g.arc(sn.arc).head != sn.v) {
        err << "leaf " << w << " label differs from its arc";
        return err.str();
      }
      continue;
    }
    const SpNode& a = tree.node(sn.children[0]);
    const SpNode& b = tree.node(sn.children[1]);
    if (sn.kind == SpKind::S) {
      if (a.u != sn.u || a.v != b.u || b.v != sn.v) {
        err << "S-node " << w << " labels do not chain";
        return err.str();
      }
      for (NodeId v : tree.graph_nodes(sn.children[0])) {
        if (v != a.v && tree.contains(sn.children[1], v)) {
          err << "S-node " << w << " children share more than the middle node";
          return err.str();
        }
      }
    } else {
      if (a.u != sn.u || b.u != sn.u || a.v != sn.v || b.v != sn.v) {
        err << "P-node " << w << " labels differ from children";
        return err.str();
      }
      for (NodeId v : tree.graph_nodes(sn.children[0])) {
        if (v != sn.u && v != sn.v && tree.contains(sn.children[1], v)) {
          err << "P-node " << w << " children share an inner node";
          return err.str();
        }
      }
      if (tree.min_arc(sn.children[0]) > tree.min_arc(sn.children[1])) {
        err << "P-node " << w << " children out of order";
        return err.str();
      }
    }
  }
  for (ArcId e = 0; e < g.num_arcs(); ++e) {
    if (seen[e] != 1) {
      err << "arc " << g.arc_name(e) << " appears " << seen[e] << " times";
      return err.str();
    }
  }
  return {};
}

}  // namespace spunsplit
