#include "spunsplit/align.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

#include "spunsplit/errors.hpp"
#include "spunsplit/max_flow.hpp"

namespace spunsplit {
namespace {

// Shallowest tree node matching `pred`, ties by smaller id.
template <class Pred>
std::optional<int> shallowest(const SpTree& tree, Pred pred) {
  std::optional<int> best;
  for (int w = 0; w < tree.size(); ++w) {
    if (pred(tree.node(w)) && (!best || tree.node(w).depth < tree.node(*best).depth)) best = w;
  }
  return best;
}

std::optional<int> aligned_component(const SpTree& tree, NodeId s, NodeId t) {
  return shallowest(tree, [&](const SpNode& sn) { return sn.u == s && sn.v == t; });
}

bool is_mandatory(const Digraph& g, NodeId s, NodeId t, NodeId v) {
  std::vector<char> blocked(g.num_arcs(), 0);
  for (ArcId e : g.in_arcs(v)) blocked[e] = 1;
  for (ArcId e : g.out_arcs(v)) blocked[e] = 1;
  return !g.has_path(s, t, &blocked);
}

std::optional<NodeId> mandatory_node(const Digraph& g, const SpTree& tree, NodeId s, NodeId t) {
  if (aligned_component(tree, s, t)) return std::nullopt;
  std::optional<NodeId> candidate;
  if (auto from = shallowest(tree, [&](const SpNode& sn) { return sn.u == s; })) {
    if (!tree.contains(*from, t)) {
      candidate = tree.node(*from).v;
    } else if (auto to = shallowest(tree, [&](const SpNode& sn) { return sn.v == t; })) {
      candidate = tree.node(*to).u;
    }
  }
  if (candidate && *candidate != s && *candidate != t && is_mandatory(g, s, t, *candidate)) {
    return candidate;
  }
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (v != s && v != t && is_mandatory(g, s, t, v)) return v;
  }
  return std::nullopt;
}

Rational excess_sum(const std::vector<Rational>& b) {
  Rational total;
  for (const auto& v : b) total += v;
  return total;
}

void check_transshipment(const Digraph& g, const std::vector<Rational>& b,
                         const std::vector<Rational>& y) {
  if (static_cast<int>(y.size()) != g.num_arcs() || static_cast<int>(b.size()) != g.num_nodes()) {
    throw std::invalid_argument("transshipment vector has the wrong size");
  }
  std::vector<Rational> net(g.num_nodes());
  for (ArcId e = 0; e < g.num_arcs(); ++e) {
    if (y[e].is_negative()) throw std::invalid_argument("negative transshipment flow");
    net[g.arc(e).tail] += y[e];
    net[g.arc(e).head] -= y[e];
  }
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (net[v] != b[v]) {
      throw std::invalid_argument("flow excess at " + g.node_name(v) + " is " + net[v].str() +
                                  ", expected " + b[v].str());
    }
  }
}

struct UndirectedStep {
  ArcId arc;
  bool forward;
};

// Pushes around cycles of fractional arcs until y is integral. Node excesses
// and integral arcs are untouched; fractional arcs stay within floor/ceil.
std::vector<Rational> round_to_integral(const Digraph& g, std::vector<Rational> y) {
  for (;;) {
    std::vector<std::vector<ArcId>> incident(g.num_nodes());
    ArcId start = -1;
    for (ArcId e = 0; e < g.num_arcs(); ++e) {
      if (y[e].is_integer()) continue;
      if (start < 0) start = e;
      incident[g.arc(e).tail].push_back(e);
      incident[g.arc(e).head].push_back(e);
    }
    if (start < 0) return y;

    std::vector<int> position(g.num_nodes(), -1);
    std::vector<UndirectedStep> walk;
    NodeId at = g.arc(start).tail;
    ArcId came = -1;
    position[at] = 0;
    std::size_t cycle_from = 0;
    for (;;) {
      ArcId next = -1;
      for (ArcId e : incident[at]) {
        if (e != came) {
          next = e;
          break;
        }
      }
      ensure(next >= 0, "fractional arc without a fractional partner at " + g.node_name(at));
      const bool forward = g.arc(next).tail == at;
      walk.push_back({next, forward});
      at = forward ? g.arc(next).head : g.arc(next).tail;
      came = next;
      if (position[at] >= 0) {
        cycle_from = static_cast<std::size_t>(position[at]);
        break;
      }
      position[at] = static_cast<int>(walk.size());
    }

    std::optional<Rational> step;
    for (std::size_t k = cycle_from; k < walk.size(); ++k) {
      const Rational& v = y[walk[k].arc];
      const Rational room = walk[k].forward ? Rational(v.ceil()) - v : v - Rational(v.floor());
      if (!step || room < *step) step = room;
    }
    for (std::size_t k = cycle_from; k < walk.size(); ++k) {
      y[walk[k].arc] += walk[k].forward ? *step : -*step;
    }
  }
}

bool all_integral(const std::vector<Rational>& values) {
  return std::all_of(values.begin(), values.end(), [](const Rational& v) { return v.is_integer(); });
}

Instance rebuild(const Digraph& g, NodeId source, NodeId sink,
                 const std::vector<std::vector<Commodity>>& chains) {
  std::vector<Commodity> flat;
  for (const auto& chain : chains) {
    for (std::size_t k = 0; k < chain.size(); ++k) {
      Commodity c = chain[k];
      if (chain.size() > 1) c.name += "/" + std::to_string(k + 1);
      flat.push_back(std::move(c));
    }
  }
  return Instance(g, source, sink, std::move(flat));
}

}  // namespace

bool AlignmentMap::is_identity() const {
  return splits.empty() &&
         std::all_of(chains.begin(), chains.end(), [](const auto& c) { return c.size() == 1; });
}

Multiflow AlignmentMap::to_original(const Instance& original, const Multiflow& aligned_flow) const {
  Multiflow out(original_arcs, original.num_commodities());
  for (CommodityId i = 0; i < original.num_commodities(); ++i) {
    for (CommodityId sub : chains.at(i)) {
      for (const auto& [e, value] : aligned_flow.commodity_flow(sub)) {
        if (e < original_arcs) out.add(e, i, value);
      }
    }
  }
  return out;
}

Multiflow AlignmentMap::to_aligned(const Instance& original, const Instance& aligned,
                                   const Multiflow& flow) const {
  const Digraph& g = aligned.graph();
  Multiflow out(g.num_arcs(), aligned.num_commodities());
  std::map<NodeId, std::vector<char>> reach;
  auto reach_from = [&](NodeId v) -> const std::vector<char>& {
    auto it = reach.find(v);
    if (it == reach.end()) it = reach.emplace(v, g.reachable_from(v)).first;
    return it->second;
  };
  for (CommodityId i = 0; i < original.num_commodities(); ++i) {
    const auto& chain = chains.at(i);
    for (const auto& [e, value] : flow.commodity_flow(i)) {
      const NodeId tail = g.arc(e).tail;
      std::size_t segment = 0;
      for (std::size_t k = 1; k < chain.size(); ++k) {
        if (reach_from(aligned.commodity(chain[k]).source)[tail]) segment = k;
      }
      out.add(e, chain[segment], value);
    }
  }
  for (const auto& split : splits) {
    for (CommodityId c = 0; c < aligned.num_commodities(); ++c) {
      if (aligned.commodity(c).sink == split.in_node) continue;
      Rational inflow;
      for (ArcId e : g.in_arcs(split.in_node)) inflow += out.get(e, c);
      if (inflow.is_positive()) out.set(split.link_arc, c, inflow);
    }
  }
  return out;
}

bool is_aligned(const Instance& inst, CommodityId i) {
  const Commodity& c = inst.commodity(i);
  return aligned_component(inst.sp_tree(), c.source, c.sink).has_value();
}

std::optional<NodeId> find_mandatory_node(const Instance& inst, CommodityId i) {
  const Commodity& c = inst.commodity(i);
  return mandatory_node(inst.graph(), inst.sp_tree(), c.source, c.sink);
}

std::pair<Instance, AlignmentMap> align_instance(const Instance& inst) {
  AlignmentMap map;
  map.original_nodes = inst.graph().num_nodes();
  map.original_arcs = inst.graph().num_arcs();
  map.node_origin.resize(map.original_nodes);
  std::iota(map.node_origin.begin(), map.node_origin.end(), 0);

  Digraph g = inst.graph();
  NodeId source_terminal = inst.source_terminal();
  NodeId sink_terminal = inst.sink_terminal();
  std::vector<std::vector<Commodity>> chains;
  for (const auto& c : inst.commodities()) chains.push_back({c});

  for (;;) {
    Instance current = rebuild(g, source_terminal, sink_terminal, chains);
    const SpTree& tree = current.sp_tree();
    bool subdivided = false;
    for (auto& chain : chains) {
      for (std::size_t k = 0; k < chain.size();) {
        if (auto v = mandatory_node(g, tree, chain[k].source, chain[k].sink)) {
          Commodity tail_part = chain[k];
          tail_part.source = *v;
          chain[k].sink = *v;
          chain.insert(chain.begin() + static_cast<std::ptrdiff_t>(k) + 1, tail_part);
          subdivided = true;
        } else {
          ++k;
        }
      }
    }
    if (subdivided) continue;

    std::optional<NodeId> shared;
    for (NodeId v = 0; v < g.num_nodes() && !shared; ++v) {
      bool is_source = false;
      bool is_sink = false;
      for (const auto& chain : chains) {
        for (const auto& c : chain) {
          is_source = is_source || c.source == v;
          is_sink = is_sink || c.sink == v;
        }
      }
      if (is_source && is_sink) shared = v;
    }
    if (!shared) {
      CommodityId next = 0;
      for (const auto& chain : chains) {
        std::vector<CommodityId> ids;
        for (std::size_t k = 0; k < chain.size(); ++k) ids.push_back(next++);
        map.chains.push_back(std::move(ids));
      }
      return {std::move(current), std::move(map)};
    }

    const NodeId v = *shared;
    Digraph split;
    for (NodeId x = 0; x < g.num_nodes(); ++x) split.add_node(g.node_name(x));
    const NodeId out = split.add_node(g.node_name(v) + "#out");
    for (ArcId e = 0; e < g.num_arcs(); ++e) {
      const Arc& a = g.arc(e);
      split.add_arc(a.tail == v ? out : a.tail, a.head, a.capacity, g.arc_name(e));
    }
    const ArcId link = split.add_arc(v, out, std::nullopt, g.node_name(v) + "#link");
    map.splits.push_back({v, out, link});
    map.node_origin.push_back(map.node_origin[v]);
    if (sink_terminal == v) sink_terminal = out;
    for (auto& chain : chains) {
      for (auto& c : chain) {
        if (c.source == v) c.source = out;
      }
    }
    g = std::move(split);
  }
}

Transshipment to_transshipment(const Instance& inst) {
  Transshipment t;
  t.b.resize(inst.graph().num_nodes());
  for (const auto& c : inst.commodities()) {
    t.b[c.source] += c.demand;
    t.b[c.sink] -= c.demand;
  }
  return t;
}

TransshipmentResult solve_transshipment(const Digraph& g, const std::vector<Rational>& b) {
  if (static_cast<int>(b.size()) != g.num_nodes()) {
    throw std::invalid_argument("excess vector has the wrong size");
  }
  if (!excess_sum(b).is_zero()) throw std::invalid_argument("excesses do not sum to zero");

  mpz_class scale = 1;
  for (const auto& v : b) scale = lcm(scale, v.denominator());
  for (const auto& a : g.arcs()) {
    if (a.capacity) scale = lcm(scale, a.capacity->denominator());
  }
  auto scaled = [&](const Rational& r) -> mpz_class {
    return r.numerator() * (scale / r.denominator());
  };

  const int n = g.num_nodes();
  const int super_source = n;
  const int super_sink = n + 1;
  mpz_class supply = 0;
  for (const auto& v : b) {
    if (v.is_positive()) supply += scaled(v);
  }
  MaxFlow<mpz_class> mf(n + 2);
  std::vector<int> handle(g.num_arcs());
  for (ArcId e = 0; e < g.num_arcs(); ++e) {
    const Arc& a = g.arc(e);
    handle[e] = mf.add_edge(a.tail, a.head, a.capacity ? scaled(*a.capacity) : supply + 1);
  }
  for (NodeId v = 0; v < n; ++v) {
    if (b[v].is_positive()) mf.add_edge(super_source, v, scaled(b[v]));
    if (b[v].is_negative()) mf.add_edge(v, super_sink, -scaled(b[v]));
  }
  const mpz_class value = mf.run(super_source, super_sink);

  TransshipmentResult result;
  if (value == supply) {
    result.feasible = true;
    for (ArcId e = 0; e < g.num_arcs(); ++e) result.flow.push_back(Rational(mf.flow(handle[e]), scale));
    return result;
  }
  const auto side = mf.residual_reachable(super_source);
  TransshipmentCut cut;
  for (NodeId v = 0; v < n; ++v) {
    if (!side[v]) continue;
    cut.nodes.push_back(v);
    cut.supply += b[v];
  }
  for (ArcId e = 0; e < g.num_arcs(); ++e) {
    const Arc& a = g.arc(e);
    if (side[a.tail] && !side[a.head]) {
      ensure(a.capacity.has_value(), "uncapacitated arc in a violated transshipment cut");
      cut.arcs.push_back(e);
      cut.capacity += *a.capacity;
    }
  }
  ensure(cut.capacity < cut.supply, "transshipment cut does not certify infeasibility");
  result.cut = std::move(cut);
  return result;
}

Multiflow multiflow_from_transshipment(const Instance& aligned, const std::vector<Rational>& y) {
  const Digraph& g = aligned.graph();
  const SpTree& tree = aligned.sp_tree();
  check_transshipment(g, to_transshipment(aligned).b, y);
  const int k = aligned.num_commodities();
  std::vector<int> component(k);
  for (CommodityId i = 0; i < k; ++i) {
    const Commodity& c = aligned.commodity(i);
    auto w = aligned_component(tree, c.source, c.sink);
    if (!w) throw std::invalid_argument("commodity " + c.name + " is not aligned");
    component[i] = *w;
    for (const auto& other : aligned.commodities()) {
      if (other.sink == c.source) {
        throw std::invalid_argument("node " + g.node_name(c.source) + " is both a source and a sink");
      }
    }
  }
  std::vector<CommodityId> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](CommodityId a, CommodityId b) {
    return tree.node(component[a]).depth > tree.node(component[b]).depth;
  });

  std::vector<Rational> rest = y;
  Multiflow out(g.num_arcs(), k);
  for (CommodityId i : order) {
    const Commodity& c = aligned.commodity(i);
    MaxFlow<Rational> mf(g.num_nodes());
    std::vector<std::pair<ArcId, int>> handles;
    for (ArcId e : tree.arcs(component[i])) {
      if (rest[e].is_positive()) handles.push_back({e, mf.add_edge(g.arc(e).tail, g.arc(e).head, rest[e])});
    }
    const Rational sent = mf.run(c.source, c.sink, c.demand);
    ensure(sent == c.demand, "could not peel commodity " + c.name + " off the transshipment");
    for (const auto& [e, h] : handles) {
      const Rational f = mf.flow(h);
      if (f.is_zero()) continue;
      out.set(e, i, f);
      rest[e] -= f;
    }
  }
  ensure(std::all_of(rest.begin(), rest.end(), [](const Rational& r) { return r.is_zero(); }),
         "transshipment flow left over after peeling every commodity");
  return out;
}

std::vector<IntegerFlowTerm> integer_decomposition(const Digraph& g, const std::vector<Rational>& b,
                                                   const std::vector<Rational>& y) {
  if (!all_integral(b)) throw std::invalid_argument("excesses must be integral");
  check_transshipment(g, b, y);
  std::vector<IntegerFlowTerm> terms;
  std::vector<Rational> rest = y;
  Rational left = 1;
  while (!all_integral(rest)) {
    auto point = round_to_integral(g, rest);
    std::optional<Rational> theta;
    for (ArcId e = 0; e < g.num_arcs(); ++e) {
      if (rest[e].is_integer()) continue;
      const Rational frac = rest[e] - Rational(rest[e].floor());
      const Rational room = point[e] == Rational(rest[e].ceil()) ? frac : Rational(1) - frac;
      if (!theta || room < *theta) theta = room;
    }
    for (ArcId e = 0; e < g.num_arcs(); ++e) {
      rest[e] = (rest[e] - *theta * point[e]) / (Rational(1) - *theta);
    }
    terms.push_back({left * *theta, std::move(point)});
    left *= Rational(1) - *theta;
  }
  terms.push_back({left, std::move(rest)});
  return terms;
}

std::vector<IntegerMultiflowTerm> integer_multiflow_decomposition(const Instance& inst,
                                                                  const Multiflow& flow) {
  for (const auto& c : inst.commodities()) {
    if (!c.demand.is_integer()) throw std::invalid_argument("demands must be integral");
  }
  if (auto bad = check_conservation(inst, flow)) {
    throw std::invalid_argument("flow violates conservation at " + inst.graph().node_name(bad->node));
  }
  auto [aligned, map] = align_instance(inst);
  const Multiflow lifted = map.to_aligned(inst, aligned, flow);
  ensure(!check_conservation(aligned, lifted), "aligned flow violates conservation");
  const auto terms =
      integer_decomposition(aligned.graph(), to_transshipment(aligned).b, total_flow(lifted));
  std::vector<IntegerMultiflowTerm> out;
  for (const auto& term : terms) {
    out.push_back({term.rho, map.to_original(inst, multiflow_from_transshipment(aligned, term.flow))});
  }
  return out;
}

MultiflowSolution solve_multiflow(const Instance& inst) {
  auto [aligned, map] = align_instance(inst);
  const auto solved = solve_transshipment(aligned.graph(), to_transshipment(aligned).b);
  MultiflowSolution out;
  if (solved.feasible) {
    out.feasible = true;
    out.flow = map.to_original(inst, multiflow_from_transshipment(aligned, solved.flow));
    ensure(!check_conservation(inst, out.flow), "mapped multiflow violates conservation");
    return out;
  }
  TransshipmentCut cut = *solved.cut;
  std::vector<NodeId> nodes;
  for (NodeId v : cut.nodes) nodes.push_back(map.node_origin[v]);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  cut.nodes = std::move(nodes);
  std::erase_if(cut.arcs, [&](ArcId e) { return e >= map.original_arcs; });
  out.cut = std::move(cut);
  out.flow = Multiflow(inst.graph().num_arcs(), inst.num_commodities());
  return out;
}

MultiflowSolution feasible_integer_multiflow(const Instance& inst) {
  for (const auto& a : inst.graph().arcs()) {
    if (a.capacity && !a.capacity->is_integer()) throw std::invalid_argument("capacities must be integral");
  }
  for (const auto& c : inst.commodities()) {
    if (!c.demand.is_integer()) throw std::invalid_argument("demands must be integral");
  }
  auto out = solve_multiflow(inst);
  if (out.feasible) ensure(out.flow.is_integral(), "integer pipeline produced a fractional flow");
  return out;
}

}  // namespace spunsplit
