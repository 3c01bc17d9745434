#include "spunsplit/oracle.hpp"

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <stdexcept>

#include "spunsplit/errors.hpp"

namespace spunsplit {
namespace {

constexpr std::size_t kSaturated = std::numeric_limits<std::size_t>::max();

std::size_t saturating_mul(std::size_t a, std::size_t b) {
  if (a == 0 || b == 0) return 0;
  return a > kSaturated / b ? kSaturated : a * b;
}

// Multisets of size k drawn from n items.
std::size_t multiset_count(std::size_t n, long k) {
  if (k == 0) return 1;
  if (n == 0) return 0;
  // C(n + k - 1, k) computed incrementally; each prefix is itself a binomial.
  std::size_t result = 1;
  for (long j = 1; j <= k; ++j) {
    const std::size_t numerator = n - 1 + static_cast<std::size_t>(j);
    if (result > kSaturated / numerator) return kSaturated;
    result = result * numerator / static_cast<std::size_t>(j);
  }
  return result;
}

long integral_demand(const Commodity& c) {
  if (!c.demand.is_integer()) throw std::invalid_argument("oracle needs integral demands");
  const mpz_class d = c.demand.numerator();
  if (!d.fits_slong_p()) throw SizeError("demand of " + c.name + " is too large to enumerate");
  return d.get_si();
}

// Depth-first over multisets of unit paths, commodity by commodity. Loads
// never exceed `upper`; `leaf` decides whether to stop.
class RoutingSearch {
 public:
  RoutingSearch(const Instance& inst, const RoutingEnumeration& enumeration,
                std::vector<std::optional<Rational>> upper, std::size_t budget)
      : inst_(inst), paths_(enumeration.paths), upper_(std::move(upper)), budget_(budget),
        load_(inst.graph().num_arcs()), chosen_(inst.num_commodities()) {
    for (CommodityId i = 0; i < inst.num_commodities(); ++i) demands_.push_back(integral_demand(inst.commodity(i)));
  }

  // Returns true if `leaf` asked to stop.
  bool run(const std::function<bool(const std::vector<Rational>&, const std::vector<std::vector<std::size_t>>&)>& leaf) {
    leaf_ = leaf;
    return descend(0, 0);
  }

  std::size_t examined() const { return examined_; }
  bool exhausted_budget() const { return out_of_budget_; }

 private:
  bool descend(CommodityId i, std::size_t from) {
    if (i == inst_.num_commodities()) {
      if (++examined_ > budget_) {
        out_of_budget_ = true;
        return true;
      }
      return leaf_(load_, chosen_);
    }
    if (static_cast<long>(chosen_[i].size()) == demands_[i]) return descend(i + 1, 0);
    for (std::size_t p = from; p < paths_[i].size(); ++p) {
      bool fits = true;
      for (ArcId e : paths_[i][p]) {
        load_[e] += 1;
        if (upper_[e] && load_[e] > *upper_[e]) fits = false;
      }
      if (fits) {
        chosen_[i].push_back(p);
        if (descend(i, p)) return true;
        chosen_[i].pop_back();
      }
      for (ArcId e : paths_[i][p]) load_[e] -= 1;
    }
    return false;
  }

  const Instance& inst_;
  const std::vector<std::vector<ArcPath>>& paths_;
  std::vector<std::optional<Rational>> upper_;
  std::size_t budget_;
  std::vector<long> demands_;
  std::vector<Rational> load_;
  std::vector<std::vector<std::size_t>> chosen_;
  std::function<bool(const std::vector<Rational>&, const std::vector<std::vector<std::size_t>>&)> leaf_;
  std::size_t examined_ = 0;
  bool out_of_budget_ = false;
};

Multiflow routing_to_flow(const Instance& inst, const RoutingEnumeration& enumeration,
                          const std::vector<std::vector<std::size_t>>& chosen) {
  Multiflow flow(inst.graph().num_arcs(), inst.num_commodities());
  for (CommodityId i = 0; i < inst.num_commodities(); ++i) {
    for (std::size_t p : chosen[i]) {
      for (ArcId e : enumeration.paths[i][p]) flow.add(e, i, 1);
    }
  }
  return flow;
}

}  // namespace

OracleLimits OracleLimits::from_environment() {
  OracleLimits limits;
  if (const char* text = std::getenv("SPUNSPLIT_ENUM_CAP")) {
    char* end = nullptr;
    const unsigned long long value = std::strtoull(text, &end, 10);
    if (end != text && *end == '\0' && value > 0) limits.max_routings = static_cast<std::size_t>(value);
  }
  return limits;
}

std::vector<ArcPath> enumerate_paths(const Digraph& g, NodeId s, NodeId t, std::size_t cap,
                                     const std::vector<char>* allowed) {
  if (cap == 0) throw std::invalid_argument("path cap must be positive");
  std::vector<ArcPath> paths;
  std::vector<char> on_path(g.num_nodes(), 0);
  ArcPath current;
  std::function<void(NodeId)> visit = [&](NodeId v) {
    if (v == t) {
      if (paths.size() == cap) throw SizeError("more than " + std::to_string(cap) + " paths");
      paths.push_back(current);
      return;
    }
    on_path[v] = 1;
    for (ArcId e : g.out_arcs(v)) {
      const NodeId head = g.arc(e).head;
      if (on_path[head] || (allowed && !(*allowed)[e])) continue;
      current.push_back(e);
      visit(head);
      current.pop_back();
    }
    on_path[v] = 0;
  };
  visit(s);
  return paths;
}

RoutingEnumeration build_routing_enumeration(const Instance& inst, const OracleLimits& limits,
                                             const Multiflow* support) {
  const Digraph& g = inst.graph();
  RoutingEnumeration out;
  out.product_size = 1;
  for (CommodityId i = 0; i < inst.num_commodities(); ++i) {
    const Commodity& c = inst.commodity(i);
    std::vector<char> allowed(g.num_arcs(), 1);
    if (support) {
      for (ArcId e = 0; e < g.num_arcs(); ++e) allowed[e] = support->get(e, i).is_positive();
    }
    out.paths.push_back(enumerate_paths(g, c.source, c.sink, limits.max_paths, &allowed));
    out.product_size = saturating_mul(out.product_size,
                                      multiset_count(out.paths.back().size(), integral_demand(c)));
  }
  return out;
}

std::optional<Multiflow> exhaustive_feasibility(const Instance& inst, const OracleLimits& limits) {
  const auto enumeration = build_routing_enumeration(inst, limits);
  if (enumeration.product_size > limits.max_routings) {
    throw SizeError("routing product exceeds the cap of " + std::to_string(limits.max_routings));
  }
  std::vector<std::optional<Rational>> upper;
  for (const auto& a : inst.graph().arcs()) upper.push_back(a.capacity);
  RoutingSearch search(inst, enumeration, std::move(upper), kSaturated);
  std::optional<Multiflow> found;
  search.run([&](const std::vector<Rational>&, const std::vector<std::vector<std::size_t>>& chosen) {
    found = routing_to_flow(inst, enumeration, chosen);
    return true;
  });
  return found;
}

std::string probe_verdict_name(ProbeVerdict verdict) {
  switch (verdict) {
    case ProbeVerdict::Impossible:
      return "impossible";
    case ProbeVerdict::Inconclusive:
      return "inconclusive";
    case ProbeVerdict::Unsplittable:
      return "unsplittable";
  }
  return "?";
}

ProbeResult matrix_decomposability_probe(const Instance& inst, const Multiflow& flow,
                                         const OracleLimits& limits) {
  ProbeResult result;
  if (is_unsplittable(inst, flow)) {
    result.verdict = ProbeVerdict::Unsplittable;
    result.members_found = 1;
    result.note = "the flow is itself unsplittable";
    return result;
  }
  for (const auto& c : inst.commodities()) {
    if (!c.demand.is_integer()) {
      result.note = "demands are not integral";
      return result;
    }
  }
  const auto x = total_flow(flow);
  std::vector<std::optional<Rational>> upper;
  for (ArcId e = 0; e < inst.graph().num_arcs(); ++e) {
    upper.push_back(Rational(x[e].ceil()));
    if (x[e].is_integer() && x[e].is_positive()) result.forced_arcs.push_back(e);
  }

  RoutingEnumeration enumeration;
  try {
    enumeration = build_routing_enumeration(inst, limits, &flow);
  } catch (const SizeError& err) {
    result.note = err.what();
    return result;
  }
  if (enumeration.product_size > limits.max_routings) {
    result.note = "routing product exceeds the cap of " + std::to_string(limits.max_routings);
    return result;
  }
  RoutingSearch search(inst, enumeration, upper, limits.max_routings);
  search.run([&](const std::vector<Rational>& load, const std::vector<std::vector<std::size_t>>&) {
    for (ArcId e = 0; e < inst.graph().num_arcs(); ++e) {
      if (load[e] < Rational(x[e].floor())) return false;
    }
    ++result.members_found;
    return true;
  });
  result.routings_examined = search.examined();
  if (search.exhausted_budget()) {
    result.note = "search budget exhausted";
  } else if (result.members_found == 0) {
    result.verdict = ProbeVerdict::Impossible;
    result.note = "no integer multiflow inside the support meets the rounding bounds";
  } else {
    result.note = "found an integer multiflow inside the support meeting the rounding bounds";
  }
  return result;
}

}  // namespace spunsplit
