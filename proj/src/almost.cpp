#include "spunsplit/almost.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "spunsplit/errors.hpp"

namespace spunsplit {
namespace {

std::vector<CommodityId> fractional_at(const Instance& inst, const Multiflow& flow, int w) {
  return demand_shares(inst, flow, w).fractional();
}

std::vector<CommodityId> intersect(const std::vector<CommodityId>& a,
                                   const std::vector<CommodityId>& b) {
  std::vector<CommodityId> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

const SpNode& require_p_node(const SpTree& tree, int w) {
  const SpNode& sn = tree.node(w);
  if (sn.kind != SpKind::P) throw std::invalid_argument("tree node " + std::to_string(w) + " is not a P-node");
  return sn;
}

}  // namespace

std::vector<ArcId> flow_carrying_path(const Instance& inst, const Multiflow& flow, CommodityId i,
                                      int w) {
  const SpTree& tree = inst.sp_tree();
  const Digraph& g = inst.graph();
  const SpNode& sn = tree.node(w);
  std::vector<char> inside(g.num_arcs(), 0);
  for (ArcId e : tree.arcs(w)) inside[e] = 1;

  std::vector<char> visited(g.num_nodes(), 0);
  std::vector<ArcId> path;
  // Per stack level: the node and the next out-arc position to try.
  std::vector<std::pair<NodeId, std::size_t>> stack{{sn.u, 0}};
  visited[sn.u] = 1;
  while (!stack.empty()) {
    auto& [v, pos] = stack.back();
    if (v == sn.v) return path;
    const auto& out = g.out_arcs(v);
    bool advanced = false;
    while (pos < out.size()) {
      const ArcId e = out[pos++];
      const NodeId head = g.arc(e).head;
      if (!inside[e] || visited[head] || !flow.get(e, i).is_positive()) continue;
      visited[head] = 1;
      path.push_back(e);
      stack.push_back({head, 0});
      advanced = true;
      break;
    }
    if (!advanced) {
      stack.pop_back();
      if (!path.empty()) path.pop_back();
    }
  }
  throw InvariantError("no flow-carrying path for commodity " + inst.commodity(i).name +
                       " in tree node " + std::to_string(w));
}

Multiflow swap(const Instance& inst, const Multiflow& flow, int w, CommodityId i1, CommodityId i2,
               int* iterations) {
  const SpTree& tree = inst.sp_tree();
  const SpNode& sn = require_p_node(tree, w);
  if (i1 == i2) throw std::invalid_argument("swap needs two distinct commodities");
  if (i1 < 0 || i1 >= inst.num_commodities() || i2 < 0 || i2 >= inst.num_commodities()) {
    throw std::invalid_argument("unknown commodity");
  }
  const int first = sn.children[0];
  const int second = sn.children[1];
  const auto fractional = [&](const Multiflow& x, int child, CommodityId i) {
    const Rational z = demand_share(inst, x, child, i);
    return z.is_positive() && z < Rational(1);
  };
  if (!fractional(flow, first, i1)) {
    throw std::invalid_argument("commodity " + inst.commodity(i1).name +
                                " is not fractional in the first child");
  }
  if (!fractional(flow, second, i2)) {
    throw std::invalid_argument("commodity " + inst.commodity(i2).name +
                                " is not fractional in the second child");
  }

  Multiflow out = flow;
  const int limit = static_cast<int>(tree.arcs(w).size());
  int rounds = 0;
  while (demand_share(inst, out, first, i1).is_positive() &&
         demand_share(inst, out, second, i2).is_positive()) {
    ensure(rounds < limit, "swap exceeded the arc-count bound");
    const auto path1 = flow_carrying_path(inst, out, i1, first);
    const auto path2 = flow_carrying_path(inst, out, i2, second);
    Rational delta = out.get(path1.front(), i1);
    for (ArcId e : path1) delta = std::min(delta, out.get(e, i1));
    for (ArcId e : path2) delta = std::min(delta, out.get(e, i2));
    for (ArcId e : path1) {
      out.add(e, i1, -delta);
      out.add(e, i2, delta);
    }
    for (ArcId e : path2) {
      out.add(e, i2, -delta);
      out.add(e, i1, delta);
    }
    ++rounds;
  }
  if (iterations) *iterations = rounds;
  return out;
}

Multiflow reduce_shared_fractional(const Instance& inst, const Multiflow& flow, int w,
                                   int* swap_calls, int* iterations) {
  const SpNode& sn = require_p_node(inst.sp_tree(), w);
  Multiflow out = flow;
  for (int guard = 0;; ++guard) {
    const auto shared = intersect(fractional_at(inst, out, sn.children[0]),
                                  fractional_at(inst, out, sn.children[1]));
    if (shared.size() <= 1) break;
    ensure(guard <= inst.num_commodities(), "shared fractional count did not decrease");
    int rounds = 0;
    out = swap(inst, out, w, shared[0], shared[1], &rounds);
    if (swap_calls) ++*swap_calls;
    if (iterations) *iterations += rounds;
  }
  return out;
}

AlmostUnsplittableFlow make_almost_unsplittable(const Instance& inst, const Multiflow& flow) {
  const SpTree& tree = inst.sp_tree();
  if (auto bad = check_conservation(inst, flow)) {
    throw std::invalid_argument("flow violates conservation at node '" +
                                inst.graph().node_name(bad->node) + "'");
  }
  AlmostUnsplittableFlow result;
  Multiflow current = flow;
  for (int w : tree.preorder()) {
    const SpNode& sn = tree.node(w);
    if (sn.kind != SpKind::P) continue;
    current = reduce_shared_fractional(inst, current, w, &result.swap_calls,
                                       &result.swap_iterations);
    const auto first = fractional_at(inst, current, sn.children[0]);
    const auto second = fractional_at(inst, current, sn.children[1]);
    const auto shared = intersect(first, second);
    if (shared.size() == 1 && (first.size() > 2 || second.size() > 2)) {
      const CommodityId split = shared.front();
      int rounds = 0;
      if (second.size() > 2) {
        const CommodityId other = second[0] == split ? second[1] : second[0];
        current = swap(inst, current, w, split, other, &rounds);
      } else {
        const CommodityId other = first[0] == split ? first[1] : first[0];
        current = swap(inst, current, w, other, split, &rounds);
      }
      ++result.swap_calls;
      result.swap_iterations += rounds;
    }
  }
  if (auto failure = certify_almost_unsplittable(inst, current); !failure.empty()) {
    throw InvariantError("almost-unsplittable sweep failed: " + failure);
  }
  const auto shares = all_demand_shares(inst, current);
  result.fractional.resize(tree.size());
  result.split.resize(tree.size());
  for (int w = 0; w < tree.size(); ++w) {
    result.fractional[w] = shares[w].fractional();
    const SpNode& sn = tree.node(w);
    if (sn.kind != SpKind::P) continue;
    const auto shared = intersect(shares[sn.children[0]].fractional(),
                                  shares[sn.children[1]].fractional());
    if (!shared.empty()) result.split[w] = shared.front();
  }
  result.flow = std::move(current);
  return result;
}

std::string certify_almost_unsplittable(const Instance& inst, const Multiflow& flow) {
  const SpTree& tree = inst.sp_tree();
  const auto shares = all_demand_shares(inst, flow);
  std::ostringstream err;
  for (int w = 0; w < tree.size(); ++w) {
    const auto frac = shares[w].fractional();
    if (frac.size() > 2) {
      err << "tree node " << w << " has " << frac.size() << " fractional commodities";
      return err.str();
    }
    const SpNode& sn = tree.node(w);
    if (sn.kind != SpKind::P) continue;
    const auto shared = intersect(shares[sn.children[0]].fractional(),
                                  shares[sn.children[1]].fractional());
    if (shared.size() > 1) {
      err << "P-node " << w << " children share " << shared.size() << " fractional commodities";
      return err.str();
    }
  }
  return {};
}

}  // namespace spunsplit
