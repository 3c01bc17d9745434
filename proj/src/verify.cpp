#include <algorithm>
#include <sstream>

#include "spunsplit/decompose.hpp"

namespace spunsplit {
namespace {

std::string describe_path_problem(const Instance& inst, CommodityId i,
                                  const std::vector<ArcId>& path) {
  const Digraph& g = inst.graph();
  const Commodity& c = inst.commodity(i);
  if (path.empty()) return "empty path";
  std::vector<char> seen(g.num_nodes(), 0);
  NodeId at = c.source;
  seen[at] = 1;
  for (ArcId e : path) {
    if (e < 0 || e >= g.num_arcs()) return "unknown arc id " + std::to_string(e);
    if (g.arc(e).tail != at) return "arc " + g.arc_name(e) + " does not continue the path";
    at = g.arc(e).head;
    if (seen[at]) return "path revisits node " + g.node_name(at);
    seen[at] = 1;
  }
  if (at != c.sink) return "path ends at " + g.node_name(at) + " instead of the sink";
  return {};
}

Rational abs_diff(const Rational& a, const Rational& b) { return a < b ? b - a : a - b; }

}  // namespace

VerificationReport verify_decomposition(const Instance& inst, const Multiflow& flow,
                                        const ConvexDecomposition& decomposition,
                                        BoundMode mode) {
  VerificationReport report;
  const Digraph& g = inst.graph();
  const int k = inst.num_commodities();
  report.support_size = decomposition.terms.size();
  auto fail = [&](const std::string& text) { report.failures.push_back(text); };

  if (decomposition.terms.empty()) {
    fail("decomposition has no terms");
    return report;
  }
  Rational rho_sum;
  bool well_formed = true;
  for (std::size_t t = 0; t < decomposition.terms.size(); ++t) {
    const auto& term = decomposition.terms[t];
    if (!term.rho.is_positive()) fail("term " + std::to_string(t) + " has non-positive weight");
    rho_sum += term.rho;
    if (static_cast<int>(term.routing.paths.size()) != k) {
      fail("term " + std::to_string(t) + " lists the wrong number of commodities");
      well_formed = false;
      continue;
    }
    for (CommodityId i = 0; i < k; ++i) {
      auto problem = describe_path_problem(inst, i, term.routing.paths[i]);
      if (!problem.empty()) {
        fail("term " + std::to_string(t) + " commodity " + inst.commodity(i).name + ": " + problem);
        well_formed = false;
      }
    }
  }
  if (rho_sum != Rational(1)) fail("weights sum to " + rho_sum.str());
  if (!well_formed) return report;

  // The flow actually represented by the decomposition.
  Multiflow represented(g.num_arcs(), k);
  for (const auto& term : decomposition.terms) {
    for (CommodityId i = 0; i < k; ++i) {
      for (ArcId e : term.routing.paths[i]) represented.add(e, i, term.rho * inst.commodity(i).demand);
    }
  }
  const auto x = total_flow(flow);
  if (total_flow(represented) != x) fail("weighted arc totals differ from the input flow");
  if (auto bad = check_conservation(inst, represented)) {
    fail("represented flow violates conservation at " + g.node_name(bad->node));
  }

  const Rational bound = mode == BoundMode::DMax ? inst.d_max() : inst.d_max() * Rational(2);
  for (std::size_t t = 0; t < decomposition.terms.size(); ++t) {
    const auto y = routing_totals(inst, decomposition.terms[t].routing);
    for (ArcId e = 0; e < g.num_arcs(); ++e) {
      const Rational dev = abs_diff(y[e], x[e]);
      report.max_arc_deviation = std::max(report.max_arc_deviation, dev);
      if (dev >= bound) {
        std::ostringstream msg;
        msg << "term " << t << " arc " << g.arc_name(e) << ": |" << y[e] << " - " << x[e]
            << "| >= " << bound;
        fail(msg.str());
      }
    }
  }

  if (!inst.is_series_parallel()) return report;
  const SpTree& tree = inst.sp_tree();
  if (auto failure = certify_almost_unsplittable(inst, represented); !failure.empty()) {
    fail("represented flow is not almost unsplittable: " + failure);
    return report;
  }
  const auto shares = all_demand_shares(inst, represented);
  for (std::size_t t = 0; t < decomposition.terms.size(); ++t) {
    const auto& routing = decomposition.terms[t].routing;
    std::vector<std::vector<char>> uses(k, std::vector<char>(g.num_arcs(), 0));
    for (CommodityId i = 0; i < k; ++i) {
      for (ArcId e : routing.paths[i]) uses[i][e] = 1;
    }
    for (int w = 0; w < tree.size(); ++w) {
      const auto& z = shares[w].z;
      const auto frac = shares[w].fractional();
      Rational x_bar;
      Rational y_bar;
      unsigned option = 0;
      bool respects = true;
      for (CommodityId i = 0; i < k; ++i) {
        const Commodity& c = inst.commodity(i);
        bool through = tree.is_inner(w, c.source) || tree.is_inner(w, c.sink);
        for (ArcId e : tree.start_arcs(w)) through = through || uses[i][e];
        x_bar += z[i] * c.demand;
        if (through) y_bar += c.demand;
        const auto pos = std::find(frac.begin(), frac.end(), i);
        if (pos != frac.end()) {
          if (through) option |= 1U << (pos - frac.begin());
        } else if (through != (z[i] == Rational(1))) {
          respects = false;
        }
      }
      if (!respects) {
        fail("term " + std::to_string(t) + " at tree node " + std::to_string(w) +
             " routes an integral commodity the wrong way");
        continue;
      }
      const Rational zp = frac.size() > 0 ? z[frac[0]] : Rational(0);
      const Rational zq = frac.size() > 1 ? z[frac[1]] : Rational(0);
      if (!mu_coefficients(zp, zq)[static_cast<int>(option)].is_positive()) {
        fail("term " + std::to_string(t) + " at tree node " + std::to_string(w) +
             " uses routing option J" + std::to_string(option + 1) + " of zero weight");
      }
      if (abs_diff(y_bar, x_bar) >= inst.d_max()) {
        fail("term " + std::to_string(t) + " at tree node " + std::to_string(w) +
             " component flow is " + y_bar.str() + " against " + x_bar.str());
      }
    }
  }
  return report;
}

}  // namespace spunsplit
