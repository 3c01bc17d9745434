#include <doctest.h>

#include <random>

#include "spunsplit/align.hpp"
#include "spunsplit/oracle.hpp"
#include "support/fixtures.hpp"
#include "support/random_instances.hpp"

using namespace spunsplit;
using spunsplit::testing::load_fixture;

namespace {

NodeId node(const Digraph& g, const char* name) { return *g.find_node(name); }

// Same instance with every capacity replaced.
Instance with_capacity(const Instance& inst, const Rational& capacity) {
  Digraph g;
  for (NodeId v = 0; v < inst.graph().num_nodes(); ++v) g.add_node(inst.graph().node_name(v));
  for (ArcId e = 0; e < inst.graph().num_arcs(); ++e) {
    const Arc& a = inst.graph().arc(e);
    g.add_arc(a.tail, a.head, capacity, inst.graph().arc_name(e));
  }
  return Instance(g, inst.source_terminal(), inst.sink_terminal(), inst.commodities());
}

void check_excesses(const Digraph& g, const std::vector<Rational>& b, const std::vector<Rational>& y,
                    bool respect_capacity = true) {
  std::vector<Rational> net(g.num_nodes());
  for (ArcId e = 0; e < g.num_arcs(); ++e) {
    CHECK_FALSE(y[e].is_negative());
    if (respect_capacity && g.arc(e).capacity) CHECK(y[e] <= *g.arc(e).capacity);
    net[g.arc(e).tail] += y[e];
    net[g.arc(e).head] -= y[e];
  }
  CHECK(net == b);
}

void check_capacities(const Instance& inst, const Multiflow& flow) {
  const auto x = total_flow(flow);
  for (ArcId e = 0; e < inst.graph().num_arcs(); ++e) {
    if (inst.graph().arc(e).capacity) CHECK(x[e] <= *inst.graph().arc(e).capacity);
  }
}

}  // namespace

TEST_CASE("find_mandatory_node") {
  const auto fig1 = load_fixture("fig1.json");
  const Instance& inst = fig1.instance;
  const auto one = find_mandatory_node(inst, *inst.find_commodity("1"));
  REQUIRE(one);
  CHECK(inst.graph().node_name(*one) == "s2");
  CHECK_FALSE(is_aligned(inst, *inst.find_commodity("1")));
  CHECK(is_aligned(inst, *inst.find_commodity("2")));
  CHECK_FALSE(find_mandatory_node(inst, *inst.find_commodity("2")));

  // Chain a -> b -> c -> d with a commodity from a to c.
  Digraph g;
  for (const char* name : {"a", "b", "c", "d"}) g.add_node(name);
  g.add_arc(0, 1);
  g.add_arc(1, 2);
  g.add_arc(2, 3);
  const Instance chain(g, 0, 3, {{"1", 0, 2, Rational(1)}});
  CHECK(find_mandatory_node(chain, 0) == std::optional<NodeId>(1));

  const auto example = load_fixture("example1.json");
  for (CommodityId i = 0; i < example.instance.num_commodities(); ++i) {
    CHECK(is_aligned(example.instance, i));
    CHECK_FALSE(find_mandatory_node(example.instance, i));
  }
}

TEST_CASE("align_instance on the four-node cut example") {
  const auto fig1 = load_fixture("fig1.json");
  const auto [aligned, map] = align_instance(fig1.instance);
  const Digraph& g = aligned.graph();
  CHECK_FALSE(map.is_identity());
  CHECK(map.chains[0].size() == 2);
  CHECK(map.chains[1].size() == 1);
  const Commodity& first = aligned.commodity(map.chains[0][0]);
  const Commodity& second = aligned.commodity(map.chains[0][1]);
  CHECK(g.node_name(first.source) == "s1");
  CHECK(map.node_origin[first.sink] == node(fig1.instance.graph(), "s2"));
  CHECK(map.node_origin[second.source] == node(fig1.instance.graph(), "s2"));
  CHECK(g.node_name(second.sink) == "t1");
  CHECK(first.demand == Rational(1));
  CHECK(second.demand == Rational(1));

  REQUIRE(map.splits.size() == 1);
  const NodeSplit& split = map.splits[0];
  CHECK(g.node_name(split.in_node) == "s2");
  CHECK(g.node_name(split.out_node) == "s2#out");
  CHECK_FALSE(g.arc(split.link_arc).capacity.has_value());
  CHECK(g.arc(split.link_arc).tail == split.in_node);
  CHECK(g.arc(split.link_arc).head == split.out_node);

  CHECK(aligned.is_series_parallel());
  for (CommodityId i = 0; i < aligned.num_commodities(); ++i) {
    CHECK(is_aligned(aligned, i));
    for (CommodityId j = 0; j < aligned.num_commodities(); ++j) {
      if (i != j) CHECK(aligned.commodity(i).source != aligned.commodity(j).sink);
    }
  }
}

TEST_CASE("align_instance is the identity on aligned instances") {
  const auto example = load_fixture("example1.json");
  const auto [aligned, map] = align_instance(example.instance);
  CHECK(map.is_identity());
  CHECK(aligned.graph().num_arcs() == example.instance.graph().num_arcs());
  CHECK(map.to_original(example.instance, map.to_aligned(example.instance, aligned, *example.flow)) ==
        *example.flow);
}

TEST_CASE("source-sink cancellation hides infeasibility until the node is split") {
  const auto doc = load_fixture("section3.json");
  const Instance& inst = doc.instance;
  const Digraph& g = inst.graph();

  const auto b = to_transshipment(inst).b;
  CHECK(b[node(g, "s1")] == Rational(1));
  CHECK(b[node(g, "t1")] == Rational(1));
  CHECK(b[node(g, "t2")] == Rational(-2));
  const auto joint = solve_transshipment(g, b);
  CHECK(joint.feasible);
  check_excesses(g, b, joint.flow);

  const auto [aligned, map] = align_instance(inst);
  REQUIRE(map.splits.size() == 1);
  CHECK(aligned.graph().node_name(map.splits[0].in_node) == "t1");
  const auto split_b = to_transshipment(aligned).b;
  const auto split = solve_transshipment(aligned.graph(), split_b);
  CHECK_FALSE(split.feasible);
  REQUIRE(split.cut);
  CHECK(split.cut->capacity < split.cut->supply);
  // The out-copy of t1 is on the source side and a3 is in the cut.
  CHECK(std::find(split.cut->nodes.begin(), split.cut->nodes.end(), map.splits[0].out_node) !=
        split.cut->nodes.end());
  CHECK(std::find(split.cut->arcs.begin(), split.cut->arcs.end(), *g.find_arc("a3")) != split.cut->arcs.end());
  // Recompute the witness.
  std::vector<char> inside(aligned.graph().num_nodes(), 0);
  Rational supply;
  for (NodeId v : split.cut->nodes) {
    inside[v] = 1;
    supply += split_b[v];
  }
  Rational capacity;
  for (ArcId e = 0; e < aligned.graph().num_arcs(); ++e) {
    const Arc& a = aligned.graph().arc(e);
    if (inside[a.tail] && !inside[a.head]) {
      REQUIRE(a.capacity);
      capacity += *a.capacity;
    }
  }
  CHECK(capacity == split.cut->capacity);
  CHECK(supply == split.cut->supply);

  const auto solution = solve_multiflow(inst);
  CHECK_FALSE(solution.feasible);
  REQUIRE(solution.cut);
  for (NodeId v : solution.cut->nodes) CHECK(v < g.num_nodes());
  for (ArcId e : solution.cut->arcs) CHECK(e < g.num_arcs());
}

TEST_CASE("to_transshipment and solve_transshipment basics") {
  Digraph g;
  const NodeId s = g.add_node("s");
  const NodeId t = g.add_node("t");
  g.add_arc(s, t, Rational(1));
  const Instance inst(g, s, t, {{"1", s, t, Rational(1)}});
  const auto b = to_transshipment(inst).b;
  CHECK(b == std::vector<Rational>{1, -1});
  const auto result = solve_transshipment(g, b);
  CHECK(result.feasible);
  CHECK(result.flow == std::vector<Rational>{1});
  CHECK_THROWS_AS(solve_transshipment(g, {1, 0}), std::invalid_argument);

  const auto fractional = solve_transshipment(g, {Rational(2, 3), Rational(-2, 3)});
  CHECK(fractional.flow == std::vector<Rational>{Rational(2, 3)});
  CHECK_FALSE(solve_transshipment(g, {Rational(3, 2), Rational(-3, 2)}).feasible);
}

TEST_CASE("multiflow_from_transshipment") {
  SUBCASE("one commodity returns y") {
    const auto doc = load_fixture("single_arc.json");
    const auto flow = multiflow_from_transshipment(doc.instance, {Rational(1)});
    CHECK(flow == *doc.flow);
  }
  SUBCASE("six-arc example totals") {
    const auto doc = load_fixture("example1.json");
    const auto y = total_flow(*doc.flow);
    const auto flow = multiflow_from_transshipment(doc.instance, y);
    CHECK(total_flow(flow) == y);
    CHECK_FALSE(check_conservation(doc.instance, flow));
  }
  SUBCASE("aligned four-node example with capacity 2") {
    const Instance inst = with_capacity(load_fixture("fig1.json").instance, 2);
    const auto [aligned, map] = align_instance(inst);
    const auto b = to_transshipment(aligned).b;
    const auto solved = solve_transshipment(aligned.graph(), b);
    REQUIRE(solved.feasible);
    const auto flow = multiflow_from_transshipment(aligned, solved.flow);
    CHECK(aligned.num_commodities() == 3);
    CHECK(total_flow(flow) == solved.flow);
    CHECK_FALSE(check_conservation(aligned, flow));
    const auto original = map.to_original(inst, flow);
    CHECK_FALSE(check_conservation(inst, original));
    check_capacities(inst, original);
  }
}

TEST_CASE("integer_decomposition") {
  SUBCASE("integral input") {
    Digraph g;
    g.add_node("s");
    g.add_node("t");
    g.add_arc(0, 1);
    const auto terms = integer_decomposition(g, {2, -2}, {2});
    REQUIRE(terms.size() == 1);
    CHECK(terms[0].rho == Rational(1));
    CHECK(terms[0].flow == std::vector<Rational>{2});
  }
  SUBCASE("two parallel arcs at one half") {
    Digraph g;
    g.add_node("s");
    g.add_node("t");
    g.add_arc(0, 1);
    g.add_arc(0, 1);
    const auto terms = integer_decomposition(g, {1, -1}, {Rational(1, 2), Rational(1, 2)});
    REQUIRE(terms.size() == 2);
    for (const auto& term : terms) CHECK(term.rho == Rational(1, 2));
    std::vector<std::vector<Rational>> flows{terms[0].flow, terms[1].flow};
    std::sort(flows.begin(), flows.end());
    CHECK(flows == std::vector<std::vector<Rational>>{{0, 1}, {1, 0}});
  }
  SUBCASE("six-arc example totals") {
    const auto doc = load_fixture("example1.json");
    const Digraph& g = doc.instance.graph();
    const auto y = total_flow(*doc.flow);
    const auto b = to_transshipment(doc.instance).b;
    const auto terms = integer_decomposition(g, b, y);
    Rational sum;
    std::vector<Rational> rebuilt(g.num_arcs());
    for (const auto& term : terms) {
      CHECK(term.rho.is_positive());
      sum += term.rho;
      // Rounding up may exceed a tight capacity.
      check_excesses(g, b, term.flow, false);
      for (ArcId e = 0; e < g.num_arcs(); ++e) {
        CHECK(term.flow[e].is_integer());
        CHECK(Rational(y[e].floor()) <= term.flow[e]);
        CHECK(term.flow[e] <= Rational(y[e].ceil()));
        rebuilt[e] += term.rho * term.flow[e];
      }
    }
    CHECK(sum == Rational(1));
    CHECK(rebuilt == y);
  }
  SUBCASE("fractional excesses are rejected") {
    Digraph g;
    g.add_node("s");
    g.add_node("t");
    g.add_arc(0, 1);
    CHECK_THROWS_AS(integer_decomposition(g, {Rational(1, 2), Rational(-1, 2)}, {Rational(1, 2)}),
                    std::invalid_argument);
  }
}

TEST_CASE("integer_multiflow_decomposition of the six-arc example") {
  const auto doc = load_fixture("example1.json");
  const Instance& inst = doc.instance;
  const auto x = total_flow(*doc.flow);
  const auto terms = integer_multiflow_decomposition(inst, *doc.flow);
  Rational sum;
  std::vector<Rational> rebuilt(inst.graph().num_arcs());
  for (const auto& term : terms) {
    sum += term.rho;
    CHECK(term.flow.is_integral());
    CHECK_FALSE(check_conservation(inst, term.flow));
    const auto y = total_flow(term.flow);
    for (ArcId e = 0; e < inst.graph().num_arcs(); ++e) {
      CHECK(Rational(x[e].floor()) <= y[e]);
      CHECK(y[e] <= Rational(x[e].ceil()));
      rebuilt[e] += term.rho * y[e];
    }
  }
  CHECK(sum == Rational(1));
  CHECK(rebuilt == x);
}

TEST_CASE("feasible_integer_multiflow") {
  const auto fig1 = load_fixture("fig1.json");
  const auto infeasible = feasible_integer_multiflow(fig1.instance);
  CHECK_FALSE(infeasible.feasible);
  REQUIRE(infeasible.cut);
  CHECK(infeasible.cut->capacity < infeasible.cut->supply);

  const auto single = load_fixture("single_arc.json");
  const auto path = feasible_integer_multiflow(single.instance);
  CHECK(path.feasible);
  CHECK(path.flow == *single.flow);

  const auto ample = load_fixture("ample.json");
  const auto solved = feasible_integer_multiflow(ample.instance);
  REQUIRE(solved.feasible);
  CHECK(solved.flow.is_integral());
  CHECK_FALSE(check_conservation(ample.instance, solved.flow));
  check_capacities(ample.instance, solved.flow);
}

TEST_CASE("random instances: integer feasibility agrees with exhaustive search") {
  std::mt19937_64 rng(808);
  testing::RandomOptions options;
  options.max_arcs = 9;
  options.max_nodes = 8;
  options.max_commodities = 3;
  options.demands = {Rational(1), Rational(2)};
  options.capacities = {Rational(1), Rational(2), Rational(3)};
  int feasible = 0;
  int infeasible = 0;
  for (int round = 0; round < 300; ++round) {
    const Instance inst = testing::random_sp_instance(rng, options);
    const auto solution = feasible_integer_multiflow(inst);
    const auto brute = exhaustive_feasibility(inst);
    CHECK(solution.feasible == brute.has_value());
    if (solution.feasible) {
      ++feasible;
      CHECK(solution.flow.is_integral());
      CHECK_FALSE(check_conservation(inst, solution.flow));
      check_capacities(inst, solution.flow);
    } else {
      ++infeasible;
      REQUIRE(solution.cut);
      CHECK(solution.cut->capacity < solution.cut->supply);
    }
  }
  CHECK(feasible > 0);
  CHECK(infeasible > 0);
}

TEST_CASE("random instances: alignment round trip and transshipment excesses") {
  std::mt19937_64 rng(77);
  testing::RandomOptions options;
  options.max_arcs = 16;
  for (int round = 0; round < 150; ++round) {
    const auto rc = testing::random_sp_case(rng, options);
    const auto [aligned, map] = align_instance(rc.instance);
    CHECK(aligned.is_series_parallel());
    for (CommodityId i = 0; i < aligned.num_commodities(); ++i) CHECK(is_aligned(aligned, i));
    for (std::size_t i = 0; i < map.chains.size(); ++i) {
      const auto& chain = map.chains[i];
      const Commodity& original = rc.instance.commodity(static_cast<CommodityId>(i));
      CHECK(map.node_origin[aligned.commodity(chain.front()).source] == original.source);
      CHECK(map.node_origin[aligned.commodity(chain.back()).sink] == original.sink);
      for (CommodityId sub : chain) CHECK(aligned.commodity(sub).demand == original.demand);
      for (std::size_t k = 1; k < chain.size(); ++k) {
        CHECK(map.node_origin[aligned.commodity(chain[k - 1]).sink] ==
              map.node_origin[aligned.commodity(chain[k]).source]);
      }
    }
    const auto lifted = map.to_aligned(rc.instance, aligned, rc.flow);
    CHECK_FALSE(check_conservation(aligned, lifted));
    CHECK(map.to_original(rc.instance, lifted) == rc.flow);

    const auto b = to_transshipment(aligned).b;
    const auto solved = solve_transshipment(aligned.graph(), b);
    if (solved.feasible) check_excesses(aligned.graph(), b, solved.flow);
    const auto solution = solve_multiflow(rc.instance);
    if (solution.feasible) {
      CHECK_FALSE(check_conservation(rc.instance, solution.flow));
      check_capacities(rc.instance, solution.flow);
    }
  }
}
