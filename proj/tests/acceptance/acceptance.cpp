// Acceptance run: one line per criterion with its wall time and limit.
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "spunsplit/align.hpp"
#include "spunsplit/almost.hpp"
#include "spunsplit/coefficients.hpp"
#include "spunsplit/cuts.hpp"
#include "spunsplit/decompose.hpp"
#include "spunsplit/oracle.hpp"
#include "spunsplit/refine.hpp"
#include "support/fixtures.hpp"
#include "support/random_instances.hpp"
#include "support/worked_examples.hpp"

using namespace spunsplit;
using spunsplit::testing::load_fixture;

namespace {

// Collects failed expectations; keeps the first few messages.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (messages_.size() < 5) messages_.push_back(what);
  }
  bool ok() const { return failures_ == 0; }
  std::string summary() const {
    std::ostringstream out;
    out << failures_ << " failed";
    for (const auto& m : messages_) out << "; " << m;
    return out.str();
  }

 private:
  int failures_ = 0;
  std::vector<std::string> messages_;
};

Multiflow reconstruct(const Instance& inst, const ConvexDecomposition& d) {
  Multiflow out(inst.graph().num_arcs(), inst.num_commodities());
  for (const auto& term : d.terms) {
    for (CommodityId i = 0; i < inst.num_commodities(); ++i) {
      for (ArcId e : term.routing.paths[i]) out.add(e, i, term.rho * inst.commodity(i).demand);
    }
  }
  return out;
}

bool is_path(const Digraph& g, const std::vector<ArcId>& path, NodeId s, NodeId t) {
  NodeId at = s;
  std::vector<char> seen(g.num_nodes(), 0);
  seen[s] = 1;
  for (ArcId e : path) {
    if (e < 0 || e >= g.num_arcs() || g.arc(e).tail != at) return false;
    at = g.arc(e).head;
    if (seen[at]) return false;
    seen[at] = 1;
  }
  return at == t && !path.empty();
}

// Checks shared by the decomposition criteria.
void check_decomposition(Checks& c, const Instance& inst, const Multiflow& flow, const DecompositionResult& result,
                         const std::string& label) {
  const auto& terms = result.decomposition.terms;
  const Rational d_max = inst.d_max();
  const auto x = total_flow(flow);
  Rational sum;
  for (const auto& term : terms) {
    sum += term.rho;
    c.expect(term.rho.is_positive(), label + ": nonpositive weight");
    std::vector<Rational> y(inst.graph().num_arcs());
    for (CommodityId i = 0; i < inst.num_commodities(); ++i) {
      const Commodity& com = inst.commodity(i);
      c.expect(is_path(inst.graph(), term.routing.paths[i], com.source, com.sink),
               label + ": commodity " + com.name + " is not routed on one path");
      for (ArcId e : term.routing.paths[i]) y[e] += com.demand;
    }
    for (ArcId e = 0; e < inst.graph().num_arcs(); ++e) {
      c.expect(x[e] - d_max < y[e] && y[e] < x[e] + d_max,
               label + ": arc " + inst.graph().arc_name(e) + " outside the d_max band");
    }
  }
  c.expect(sum == Rational(1), label + ": weights sum to " + sum.str());
  c.expect(total_flow(reconstruct(inst, result.decomposition)) == x, label + ": arc totals differ");
  c.expect(result.report.arc_bound_ok && result.report.option_bound_ok && result.report.component_bound_ok,
           label + ": bound report flags a violation");
}

std::vector<testing::RandomCase> property_cases() {
  std::mt19937_64 rng(20261017);
  testing::RandomOptions options;
  options.max_arcs = 30;
  options.max_commodities = 8;
  std::vector<testing::RandomCase> out;
  for (int k = 0; k < 200; ++k) out.push_back(testing::random_sp_case(rng, options));
  return out;
}

std::string c1_example() {
  Checks c;
  const auto doc = load_fixture("example1.json");
  const Instance& inst = doc.instance;
  c.expect(total_flow(*doc.flow) == std::vector<Rational>{Rational(13, 2), Rational(9, 4), Rational(9, 4), 2, 2,
                                                          Rational(3, 2)},
           "total flow");
  const int bundle = 6;
  c.expect(sp_arcs(inst.sp_tree(), bundle) == std::vector<ArcId>{*inst.graph().find_arc("e3"),
                                                                  *inst.graph().find_arc("e4")},
           "tree node 6 is not the e3/e4 bundle");
  const auto shares = demand_shares(inst, *doc.flow, bundle);
  c.expect(shares.z == std::vector<Rational>{0, Rational(3, 8), 1, 1, 1, Rational(1, 4), 0, 0}, "shares at node 6");
  const auto contexts = routing_contexts(inst, *doc.flow);
  const MuVector& mu = contexts[bundle].mu;
  c.expect(mu.values == std::array<Rational, 4>{Rational(3, 8), Rational(3, 8), Rational(1, 4), 0},
           "mu at node 6");
  // Flow through the bundle under each option.
  Rational full;
  for (CommodityId i : contexts[bundle].full) full += inst.commodity(i).demand;
  const Rational dp = inst.commodity(contexts[bundle].p).demand;
  const Rational dq = inst.commodity(contexts[bundle].q).demand;
  const std::array<Rational, 4> component{full, full + dp, full + dq, full + dp + dq};
  c.expect(component == std::array<Rational, 4>{3, 5, 5, 7}, "component flows");
  Rational x_bar;
  for (CommodityId i = 0; i < inst.num_commodities(); ++i) x_bar += shares.z[i] * inst.commodity(i).demand;
  Rational mixed;
  for (int j = 0; j < 4; ++j) mixed += mu[j] * component[j];
  c.expect(x_bar == Rational(17, 4) && mixed == x_bar, "4.25 identity");
  return c.ok() ? "" : c.summary();
}

std::string c2_coefficients() {
  Checks c;
  std::mt19937_64 rng(2);
  auto marginals = [](const std::vector<CombinationRow>& rows) {
    std::array<std::array<Rational, 4>, 3> out{};
    for (const auto& row : rows) {
      out[0][static_cast<int>(row.parent)] += row.weight;
      out[1][static_cast<int>(row.first)] += row.weight;
      out[2][static_cast<int>(row.second)] += row.weight;
    }
    return out;
  };
  auto in_range = [](const std::vector<Rational>& values) {
    for (const auto& v : values) {
      if (v.is_negative() || Rational(1) < v) return false;
    }
    return true;
  };
  for (int round = 0; round < 10000; ++round) {
    const Rational z_p = testing::random_unit_rational(rng, 12);
    const Rational z_q = testing::random_unit_rational(rng, 12);
    Rational z_r = testing::random_unit_rational(rng, 12);

    const MuVector mu = mu_coefficients_unchecked(z_p, z_q);
    c.expect(mu.sum() == Rational(1) && mu[1] + mu[3] == z_p && mu[2] + mu[3] == z_q, "mu system");
    c.expect(in_range({mu.values.begin(), mu.values.end()}) && mu.nonzero_count() <= 3, "mu range");

    const LambdaVector general = lambda_coefficients(z_p, z_r, z_q);
    const auto g = marginals(general_parallel_rows(general));
    c.expect(general.sum() == Rational(1) && in_range(general.values) && general.nonzero_count() <= 4,
             "general lambda range");
    c.expect(g[0] == mu.values, "general parent marginal");
    c.expect(g[1] == mu_coefficients_unchecked(z_p, Rational(1) - z_r).values, "general first marginal");
    c.expect(g[2] == mu_coefficients_unchecked(z_r, z_q).values, "general second marginal");

    if (z_p < z_r) z_r = z_p * z_r;
    const LambdaVector same = lambda_coefficients_p_eq_r(z_p, z_r, z_q);
    const auto s = marginals(p_eq_r_parallel_rows(same));
    c.expect(same.sum() == Rational(1) && in_range(same.values), "p=r lambda range");
    c.expect(s[0] == mu.values, "p=r parent marginal");
    c.expect(s[1] == mu_coefficients_unchecked(z_p - z_r, 0).values, "p=r first marginal");
    c.expect(s[2] == mu_coefficients_unchecked(z_r, z_q).values, "p=r second marginal");
  }
  return c.ok() ? "" : c.summary();
}

std::string c3_refine() {
  Checks c;
  const std::vector<Rational> a{Rational(1, 4), Rational(1, 2), Rational(1, 4)};
  const std::vector<Rational> b{Rational(1, 6), Rational(1, 3), Rational(1, 3), Rational(1, 6)};
  const auto pairs = refine_convex(a, b);
  const std::vector<std::tuple<std::size_t, std::size_t, Rational>> expected{
      {0, 0, Rational(1, 6)}, {0, 1, Rational(1, 12)}, {1, 1, Rational(1, 4)},
      {1, 2, Rational(1, 4)}, {2, 2, Rational(1, 12)}, {2, 3, Rational(1, 6)}};
  c.expect(pairs.size() == expected.size(), "worked example size");
  for (std::size_t k = 0; k < std::min(pairs.size(), expected.size()); ++k) {
    c.expect(pairs[k].first == std::get<0>(expected[k]) && pairs[k].second == std::get<1>(expected[k]) &&
                 pairs[k].weight == std::get<2>(expected[k]),
             "worked example pair " + std::to_string(k));
  }
  std::mt19937_64 rng(3);
  for (int round = 0; round < 1000; ++round) {
    auto draw = [&](std::size_t n) {
      std::vector<Rational> out;
      Rational sum;
      for (std::size_t k = 0; k < n; ++k) {
        out.push_back(Rational(1 + static_cast<long>(rng() % 9), 1 + static_cast<long>(rng() % 9)));
        sum += out.back();
      }
      for (auto& v : out) v /= sum;
      return out;
    };
    const auto left = draw(1 + rng() % 8);
    const auto right = draw(1 + rng() % 8);
    const auto refined = refine_convex(left, right);
    std::vector<Rational> ml(left.size());
    std::vector<Rational> mr(right.size());
    for (const auto& p : refined) {
      ml[p.first] += p.weight;
      mr[p.second] += p.weight;
    }
    c.expect(ml == left && mr == right, "random marginals");
    c.expect(refined.size() + 1 <= left.size() + right.size(), "random size bound");
  }
  return c.ok() ? "" : c.summary();
}

std::string c4_worked_examples() {
  Checks c;
  auto run = [&](const testing::CombinationExample& ex, bool series, const std::string& label) {
    const auto shares = all_demand_shares(ex.instance, ex.flow);
    const auto d = series ? series_combine(ex.instance, shares, ex.node, ex.first, ex.second)
                          : parallel_combine(ex.instance, shares, ex.node, ex.first, ex.second);
    c.expect(d.terms.size() == ex.expected_weights.size(), label + ": term count");
    for (std::size_t k = 0; k < std::min(d.terms.size(), ex.expected_weights.size()); ++k) {
      c.expect(d.terms[k].rho == ex.expected_weights[k], label + ": weight " + std::to_string(k + 1));
      c.expect(ex.pairing(d.terms[k].routing) == ex.expected_pairs[k], label + ": pairing " + std::to_string(k + 1));
    }
  };
  run(testing::series_worked_example(), true, "series");
  run(testing::parallel_worked_example(), false, "parallel");
  return c.ok() ? "" : c.summary();
}

std::string c5_decomposition(const std::vector<testing::RandomCase>& cases) {
  Checks c;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const auto& rc = cases[k];
    try {
      const auto result = decompose_unsplittable(rc.instance, rc.flow, BoundMode::DMax);
      check_decomposition(c, rc.instance, rc.flow, result, "case " + std::to_string(k));
    } catch (const std::exception& err) {
      c.expect(false, "case " + std::to_string(k) + ": " + err.what());
    }
  }
  return c.ok() ? "" : c.summary();
}

std::string c6_almost(const std::vector<testing::RandomCase>& cases) {
  Checks c;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const Instance& inst = cases[k].instance;
    const auto almost = make_almost_unsplittable(inst, cases[k].flow);
    const auto shares = all_demand_shares(inst, almost.flow);
    const SpTree& tree = inst.sp_tree();
    const std::string label = "case " + std::to_string(k);
    for (int w = 0; w < tree.size(); ++w) {
      c.expect(shares[w].fractional().size() <= 2, label + ": more than two fractional commodities");
      if (tree.node(w).kind != SpKind::P) continue;
      int shared = 0;
      for (CommodityId i = 0; i < inst.num_commodities(); ++i) {
        shared += shares[tree.node(w).children[0]].is_fractional(i) && shares[tree.node(w).children[1]].is_fractional(i);
      }
      c.expect(shared <= 1, label + ": more than one shared commodity");
    }
    c.expect(total_flow(almost.flow) == total_flow(cases[k].flow), label + ": totals changed");
    c.expect(!check_conservation(inst, almost.flow), label + ": conservation");
    c.expect(make_almost_unsplittable(inst, almost.flow).flow == almost.flow, label + ": not idempotent");
  }
  return c.ok() ? "" : c.summary();
}

std::string c7_integrality() {
  Checks c;
  std::mt19937_64 rng(7);
  testing::RandomOptions options;
  options.demands = {Rational(1), Rational(2), Rational(3)};
  for (int round = 0; round < 100; ++round) {
    const auto rc = testing::random_sp_case(rng, options);
    const Digraph& g = rc.instance.graph();
    const auto x = total_flow(rc.flow);
    const auto terms = integer_decomposition(g, to_transshipment(rc.instance).b, x);
    Rational sum;
    std::vector<Rational> rebuilt(g.num_arcs());
    for (const auto& term : terms) {
      sum += term.rho;
      for (ArcId e = 0; e < g.num_arcs(); ++e) {
        c.expect(term.flow[e].is_integer(), "non-integral term");
        c.expect(Rational(x[e].floor()) <= term.flow[e] && term.flow[e] <= Rational(x[e].ceil()), "rounding band");
        rebuilt[e] += term.rho * term.flow[e];
      }
    }
    c.expect(sum == Rational(1), "weights do not sum to 1");
    c.expect(rebuilt == x, "reconstruction");
  }
  return c.ok() ? "" : c.summary();
}

std::string c8_cut_condition() {
  Checks c;
  std::mt19937_64 rng(8);
  testing::RandomOptions options;
  options.max_nodes = 6;
  options.max_arcs = 10;
  options.max_commodities = 3;
  options.demands = {Rational(1), Rational(2)};
  options.capacities = {Rational(1), Rational(2)};
  int feasible = 0;
  const int rounds = 600;
  for (int round = 0; round < rounds; ++round) {
    const Instance inst = testing::random_sp_instance(rng, options);
    const bool cut_ok = !check_cut(inst, CutMode::Strengthened).has_value();
    const bool flow_ok = solve_multiflow(inst).feasible;
    c.expect(cut_ok == flow_ok, "instance " + std::to_string(round) + ": cut and flow disagree");
    feasible += flow_ok;
  }
  c.expect(feasible > 0 && feasible < rounds, "both outcomes occur");

  const auto fig1 = load_fixture("fig1.json");
  c.expect(!check_cut(fig1.instance, CutMode::Classical), "four-node example: classical should hold");
  const auto cert = check_cut(fig1.instance, CutMode::Strengthened);
  c.expect(cert && cert->nodes == std::vector<NodeId>{*fig1.instance.graph().find_node("s2")},
           "four-node example: strengthened witness");
  const auto contrast = load_fixture("strengthened_vs_strong.json");
  c.expect(!check_cut(contrast.instance, CutMode::Strengthened), "contrast: strengthened should hold");
  c.expect(check_cut(contrast.instance, CutMode::Strong).has_value(), "contrast: strong should fail");
  return c.ok() ? "" : c.summary();
}

std::string c9_counterexample() {
  Checks c;
  const auto doc = load_fixture("counterexample.json");
  const auto result = decompose_unsplittable(doc.instance, *doc.flow, BoundMode::DMax);
  check_decomposition(c, doc.instance, *doc.flow, result, "counterexample");
  const auto probe = matrix_decomposability_probe(doc.instance, *doc.flow);
  c.expect(probe.verdict == ProbeVerdict::Impossible, "probe verdict " + probe_verdict_name(probe.verdict));
  return c.ok() ? "" : c.summary();
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit;
    std::function<std::string()> run;
  };
  std::vector<testing::RandomCase> cases;
  const std::vector<Criterion> criteria{
      {1, "six-arc example pipeline", 1, c1_example},
      {2, "coefficient formulas", 5, c2_coefficients},
      {3, "refinement", 2, c3_refine},
      {4, "worked combination examples", 1, c4_worked_examples},
      {5, "decomposition properties", 60,
       [&] {
         cases = property_cases();
         return c5_decomposition(cases);
       }},
      {6, "almost-unsplittable properties", 30, [&] { return c6_almost(cases); }},
      {7, "integral decomposition of totals", 10, c7_integrality},
      {8, "strengthened cut condition", 120, c8_cut_condition},
      {9, "counterexample contrast", 5, c9_counterexample},
  };
  int failed = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string problem;
    try {
      problem = criterion.run();
    } catch (const std::exception& err) {
      problem = std::string("exception: ") + err.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (problem.empty() && seconds >= criterion.limit) problem = "over time limit";
    const bool ok = problem.empty();
    failed += !ok;
    std::printf("criterion %d %-34s %s  %.3fs (limit %.0fs)%s%s\n", criterion.id, criterion.name,
                ok ? "PASS" : "FAIL", seconds, criterion.limit, ok ? "" : "  ", problem.c_str());
  }
  return failed == 0 ? 0 : 1;
}
