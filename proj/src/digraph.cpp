#include "spunsplit/digraph.hpp"

#include <deque>
#include <stdexcept>

namespace spunsplit {

NodeId Digraph::add_node(std::string name) {
  const NodeId id = num_nodes();
  if (name.empty()) name = "n" + std::to_string(id);
  if (!node_index_.emplace(name, id).second) {
    throw std::invalid_argument("duplicate node id '" + name + "'");
  }
  node_names_.push_back(std::move(name));
  out_.emplace_back();
  in_.emplace_back();
  return id;
}

ArcId Digraph::add_arc(NodeId tail, NodeId head, std::optional<Rational> capacity,
                       std::string name) {
  if (tail < 0 || tail >= num_nodes() || head < 0 || head >= num_nodes()) {
    throw std::invalid_argument("arc endpoint is not a node");
  }
  if (tail == head) {
    throw std::invalid_argument("self-loop at node '" + node_names_[tail] + "'");
  }
  if (capacity && capacity->is_negative()) {
    throw std::invalid_argument("negative capacity");
  }
  const ArcId id = num_arcs();
  if (name.empty()) name = "a" + std::to_string(id);
  if (!arc_index_.emplace(name, id).second) {
    throw std::invalid_argument("duplicate arc id '" + name + "'");
  }
  arc_names_.push_back(std::move(name));
  arcs_.push_back(Arc{tail, head, std::move(capacity)});
  out_[tail].push_back(id);
  in_[head].push_back(id);
  return id;
}

std::optional<NodeId> Digraph::find_node(std::string_view name) const {
  auto it = node_index_.find(std::string(name));
  if (it == node_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<ArcId> Digraph::find_arc(std::string_view name) const {
  auto it = arc_index_.find(std::string(name));
  if (it == arc_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<char> Digraph::reachable_from(NodeId from, const std::vector<char>* blocked) const {
  std::vector<char> seen(num_nodes(), 0);
  std::deque<NodeId> queue{from};
  seen[from] = 1;
  while (!queue.empty()) {
    const NodeId v = queue.front();
    queue.pop_front();
    for (ArcId e : out_[v]) {
      if (blocked && (*blocked)[e]) continue;
      const NodeId w = arcs_[e].head;
      if (!seen[w]) {
        seen[w] = 1;
        queue.push_back(w);
      }
    }
  }
  return seen;
}

bool Digraph::has_path(NodeId from, NodeId to, const std::vector<char>* blocked) const {
  return reachable_from(from, blocked)[to] != 0;
}

bool Digraph::is_acyclic() const {
  std::vector<int> indegree(num_nodes(), 0);
  for (const Arc& a : arcs_) ++indegree[a.head];
  std::vector<NodeId> stack;
  for (NodeId v = 0; v < num_nodes(); ++v) {
    if (indegree[v] == 0) stack.push_back(v);
  }
  int removed = 0;
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    ++removed;
    for (ArcId e : out_[v]) {
      if (--indegree[arcs_[e].head] == 0) stack.push_back(arcs_[e].head);
    }
  }
  return removed == num_nodes();
}

}  // namespace spunsplit
