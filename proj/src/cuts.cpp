#include "spunsplit/cuts.hpp"

#include <bit>
#include <cstdint>
#include <stdexcept>

#include "spunsplit/errors.hpp"

namespace spunsplit {
namespace {

// Smaller cardinality first, then the lexicographically smaller sorted id list.
bool shortlex_less(std::uint64_t a, std::uint64_t b) {
  const int ca = std::popcount(a);
  const int cb = std::popcount(b);
  if (ca != cb) return ca < cb;
  const std::uint64_t diff = a ^ b;
  if (diff == 0) return false;
  return (a & (diff & (~diff + 1))) != 0;
}

std::vector<int> members(std::uint64_t mask) {
  std::vector<int> out;
  for (int k = 0; mask != 0; ++k, mask >>= 1) {
    if (mask & 1U) out.push_back(k);
  }
  return out;
}

Rational demand_of(const Instance& inst, const std::vector<CommodityId>& ids) {
  Rational total;
  for (CommodityId i : ids) total += inst.commodity(i).demand;
  return total;
}

std::vector<ArcId> out_cut(const Digraph& g, const std::vector<char>& in_set) {
  std::vector<ArcId> arcs;
  for (ArcId e = 0; e < g.num_arcs(); ++e) {
    if (in_set[g.arc(e).tail] && !in_set[g.arc(e).head]) arcs.push_back(e);
  }
  return arcs;
}

std::vector<CommodityId> crossing(const Instance& inst, const std::vector<char>& in_set) {
  std::vector<CommodityId> out;
  for (CommodityId i = 0; i < inst.num_commodities(); ++i) {
    const Commodity& c = inst.commodity(i);
    if (in_set[c.source] && !in_set[c.sink]) out.push_back(i);
  }
  return out;
}

// Running capacity with uncapacitated arcs counted separately.
struct RunningCapacity {
  Rational finite;
  int unbounded = 0;

  void add(const Arc& a, int sign) {
    if (a.capacity) {
      finite += sign > 0 ? *a.capacity : -*a.capacity;
    } else {
      unbounded += sign;
    }
  }
};

std::optional<CutCertificate> node_enumeration(const Instance& inst, CutMode mode) {
  const Digraph& g = inst.graph();
  const int n = g.num_nodes();
  Rational total_demand;
  for (const auto& c : inst.commodities()) total_demand += c.demand;

  std::vector<char> in_set(n, 0);
  RunningCapacity cap;
  std::optional<std::uint64_t> best;
  std::uint64_t mask = 0;
  auto is_cut = [&](ArcId e) { return in_set[g.arc(e).tail] && !in_set[g.arc(e).head]; };
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t r = 1; r < count; ++r) {
    const int v = std::countr_zero(r);
    for (ArcId e : g.out_arcs(v)) {
      if (is_cut(e)) cap.add(g.arc(e), -1);
    }
    for (ArcId e : g.in_arcs(v)) {
      if (is_cut(e)) cap.add(g.arc(e), -1);
    }
    in_set[v] ^= 1;
    mask ^= std::uint64_t{1} << v;
    for (ArcId e : g.out_arcs(v)) {
      if (is_cut(e)) cap.add(g.arc(e), 1);
    }
    for (ArcId e : g.in_arcs(v)) {
      if (is_cut(e)) cap.add(g.arc(e), 1);
    }
    if (cap.unbounded > 0 || cap.finite >= total_demand) continue;
    if (best && !shortlex_less(mask, *best)) continue;
    const auto blocked = mode == CutMode::Classical
                             ? crossing(inst, in_set)
                             : blocked_commodities(inst, out_cut(g, in_set));
    if (cap.finite < demand_of(inst, blocked)) best = mask;
  }
  if (!best) return std::nullopt;

  CutCertificate cert;
  cert.kind = mode;
  cert.nodes = members(*best);
  std::vector<char> chosen(n, 0);
  for (NodeId v : cert.nodes) chosen[v] = 1;
  cert.arcs = out_cut(g, chosen);
  for (ArcId e : cert.arcs) cert.capacity += *g.arc(e).capacity;
  cert.blocked = mode == CutMode::Classical ? crossing(inst, chosen)
                                            : blocked_commodities(inst, cert.arcs);
  cert.blocked_demand = demand_of(inst, cert.blocked);
  return cert;
}

std::optional<CutCertificate> arc_enumeration(const Instance& inst) {
  const Digraph& g = inst.graph();
  const int m = g.num_arcs();
  Rational total_demand;
  for (const auto& c : inst.commodities()) total_demand += c.demand;

  RunningCapacity cap;
  std::optional<std::uint64_t> best;
  std::uint64_t mask = 0;
  const std::uint64_t count = std::uint64_t{1} << m;
  for (std::uint64_t r = 1; r < count; ++r) {
    const int e = std::countr_zero(r);
    mask ^= std::uint64_t{1} << e;
    cap.add(g.arc(e), (mask >> e & 1U) ? 1 : -1);
    if (cap.unbounded > 0 || cap.finite >= total_demand) continue;
    if (best && !shortlex_less(mask, *best)) continue;
    if (cap.finite < demand_of(inst, blocked_commodities(inst, members(mask)))) best = mask;
  }
  if (!best) return std::nullopt;
  CutCertificate cert;
  cert.kind = CutMode::Strong;
  cert.arcs = members(*best);
  for (ArcId e : cert.arcs) cert.capacity += *g.arc(e).capacity;
  cert.blocked = blocked_commodities(inst, cert.arcs);
  cert.blocked_demand = demand_of(inst, cert.blocked);
  return cert;
}

}  // namespace

std::string cut_mode_name(CutMode mode) {
  switch (mode) {
    case CutMode::Classical:
      return "classical";
    case CutMode::Strengthened:
      return "strengthened";
    case CutMode::Strong:
      return "strong";
  }
  return "?";
}

CutMode parse_cut_mode(std::string_view text) {
  if (text == "classical") return CutMode::Classical;
  if (text == "strengthened") return CutMode::Strengthened;
  if (text == "strong") return CutMode::Strong;
  throw std::invalid_argument("cut mode must be classical, strengthened or strong");
}

std::vector<CommodityId> blocked_commodities(const Instance& inst, const std::vector<ArcId>& removed) {
  const Digraph& g = inst.graph();
  std::vector<char> blocked(g.num_arcs(), 0);
  for (ArcId e : removed) {
    if (e < 0 || e >= g.num_arcs()) throw std::invalid_argument("unknown arc id");
    blocked[e] = 1;
  }
  std::vector<CommodityId> out;
  for (CommodityId i = 0; i < inst.num_commodities(); ++i) {
    const Commodity& c = inst.commodity(i);
    if (!g.has_path(c.source, c.sink, &blocked)) out.push_back(i);
  }
  return out;
}

std::optional<CutCertificate> check_cut(const Instance& inst, CutMode mode, CutLimits limits) {
  const Digraph& g = inst.graph();
  if (mode == CutMode::Strong) {
    const int cap = std::min(limits.max_arcs, 62);
    if (g.num_arcs() > cap) {
      throw SizeError("strong cut enumeration is limited to " + std::to_string(cap) + " arcs");
    }
    return arc_enumeration(inst);
  }
  const int cap = std::min(limits.max_nodes, 62);
  if (g.num_nodes() > cap) {
    throw SizeError("cut enumeration is limited to " + std::to_string(cap) + " nodes");
  }
  return node_enumeration(inst, mode);
}

std::string recheck_certificate(const Instance& inst, const CutCertificate& cert) {
  const Digraph& g = inst.graph();
  std::vector<ArcId> arcs = cert.arcs;
  std::vector<CommodityId> blocked;
  if (cert.kind == CutMode::Strong) {
    blocked = blocked_commodities(inst, arcs);
  } else {
    std::vector<char> chosen(g.num_nodes(), 0);
    for (NodeId v : cert.nodes) {
      if (v < 0 || v >= g.num_nodes()) return "unknown node id";
      chosen[v] = 1;
    }
    arcs = out_cut(g, chosen);
    if (arcs != cert.arcs) return "arc set is not the out-cut of the node set";
    blocked = cert.kind == CutMode::Classical ? crossing(inst, chosen) : blocked_commodities(inst, arcs);
  }
  Rational capacity;
  for (ArcId e : arcs) {
    if (!g.arc(e).capacity) return "cut contains an uncapacitated arc";
    capacity += *g.arc(e).capacity;
  }
  const Rational demand = demand_of(inst, blocked);
  if (capacity != cert.capacity) return "capacity does not match";
  if (blocked != cert.blocked || demand != cert.blocked_demand) return "blocked demand does not match";
  if (!(capacity < demand)) return "certificate does not show a violation";
  return {};
}

}  // namespace spunsplit
