#pragma once

#include <deque>
#include <optional>
#include <vector>

namespace spunsplit {

// Edmonds-Karp on an explicit residual network. Works for any exact ordered
// ring (mpz_class, Rational): BFS augmentation bounds the number of rounds
// independently of the capacities.
template <class Cap>
class MaxFlow {
 public:
  explicit MaxFlow(int num_nodes) : adjacent_(num_nodes) {}

  int add_node() {
    adjacent_.emplace_back();
    return static_cast<int>(adjacent_.size()) - 1;
  }

  // Returns the edge handle used by flow().
  int add_edge(int from, int to, Cap capacity) {
    const int id = static_cast<int>(edges_.size());
    edges_.push_back({to, capacity, capacity});
    edges_.push_back({from, Cap{}, Cap{}});
    adjacent_[from].push_back(id);
    adjacent_[to].push_back(id + 1);
    return id;
  }

  // Augments until no path remains or `limit` units have been sent.
  Cap run(int source, int sink, std::optional<Cap> limit = std::nullopt) {
    Cap total{};
    while (!limit || total < *limit) {
      std::vector<int> via(adjacent_.size(), -1);
      std::vector<char> seen(adjacent_.size(), 0);
      std::deque<int> queue{source};
      seen[source] = 1;
      while (!queue.empty() && !seen[sink]) {
        const int v = queue.front();
        queue.pop_front();
        for (int id : adjacent_[v]) {
          const Edge& e = edges_[id];
          if (seen[e.to] || !(e.residual > Cap{})) continue;
          seen[e.to] = 1;
          via[e.to] = id;
          queue.push_back(e.to);
        }
      }
      if (!seen[sink]) break;
      Cap delta = edges_[via[sink]].residual;
      for (int v = sink; v != source; v = edges_[via[v] ^ 1].to) {
        if (edges_[via[v]].residual < delta) delta = edges_[via[v]].residual;
      }
      if (limit && *limit - total < delta) delta = *limit - total;
      for (int v = sink; v != source; v = edges_[via[v] ^ 1].to) {
        edges_[via[v]].residual -= delta;
        edges_[via[v] ^ 1].residual += delta;
      }
      total += delta;
    }
    return total;
  }

  Cap flow(int edge) const { return edges_[edge].capacity - edges_[edge].residual; }

  // Nodes reachable from `source` in the residual network.
  std::vector<char> residual_reachable(int source) const {
    std::vector<char> seen(adjacent_.size(), 0);
    std::deque<int> queue{source};
    seen[source] = 1;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (int id : adjacent_[v]) {
        const Edge& e = edges_[id];
        if (!seen[e.to] && e.residual > Cap{}) {
          seen[e.to] = 1;
          queue.push_back(e.to);
        }
      }
    }
    return seen;
  }

 private:
  struct Edge {
    int to;
    Cap residual;
    Cap capacity;
  };
  std::vector<std::vector<int>> adjacent_;
  std::vector<Edge> edges_;
};

}  // namespace spunsplit
