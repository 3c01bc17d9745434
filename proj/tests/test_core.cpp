#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "spunsplit/rational.hpp"
#include "spunsplit/sp_tree.hpp"
#include "support/fixtures.hpp"
#include "support/random_instances.hpp"

using namespace spunsplit;
using spunsplit::testing::load_fixture;

namespace {

const SpTree& tree_of(const std::variant<SpTree, NotSeriesParallel>& result) {
  REQUIRE(std::holds_alternative<SpTree>(result));
  return std::get<SpTree>(result);
}

std::vector<ArcId> arcs_by_name(const Digraph& g, std::initializer_list<const char*> names) {
  std::vector<ArcId> out;
  for (const char* name : names) out.push_back(*g.find_arc(name));
  std::sort(out.begin(), out.end());
  return out;
}

// Rebuilds the arc multiset bottom-up from the tree: (tail, head) per leaf,
// checking endpoints against the composition rules.
std::multiset<std::pair<NodeId, NodeId>> replay(const Digraph& g, const SpTree& tree, int w) {
  const SpNode& n = tree.node(w);
  if (n.kind == SpKind::Q) {
    CHECK(g.arc(n.arc).tail == n.u);
    CHECK(g.arc(n.arc).head == n.v);
    return {{n.u, n.v}};
  }
  const SpNode& a = tree.node(n.children[0]);
  const SpNode& b = tree.node(n.children[1]);
  if (n.kind == SpKind::S) {
    CHECK(a.u == n.u);
    CHECK(a.v == b.u);
    CHECK(b.v == n.v);
  } else {
    CHECK(a.u == n.u);
    CHECK(b.u == n.u);
    CHECK(a.v == n.v);
    CHECK(b.v == n.v);
  }
  auto left = replay(g, tree, n.children[0]);
  auto right = replay(g, tree, n.children[1]);
  left.insert(right.begin(), right.end());
  return left;
}

}  // namespace

TEST_CASE("rational arithmetic stays in lowest terms") {
  const Rational a(6, -8);
  CHECK(a.numerator() == -3);
  CHECK(a.denominator() == 4);
  CHECK(Rational::parse("10/4") == Rational(5, 2));
  CHECK(Rational::parse("-7") == Rational(-7));
  CHECK((Rational(1, 3) + Rational(1, 6)).str() == "1/2");
  CHECK(Rational(1, 3) * Rational(3) == Rational(1));
  CHECK(Rational(7, 2).floor() == 3);
  CHECK(Rational(7, 2).ceil() == 4);
  CHECK(Rational(-7, 2).floor() == -4);
  CHECK_THROWS_AS(Rational::parse("1/0"), std::invalid_argument);
  CHECK_THROWS_AS(Rational::parse("abc"), std::invalid_argument);
}

TEST_CASE("positive_part") {
  CHECK(positive_part(Rational(3, 4)) == Rational(3, 4));
  CHECK(positive_part(Rational(-1, 2)) == Rational(0));
  CHECK(positive_part(Rational(0)) == Rational(0));
}

TEST_CASE("second_max") {
  CHECK(second_max({Rational(1, 4), Rational(2, 3), Rational(2, 5)}) == Rational(2, 5));
  CHECK(second_max({Rational(1, 2), Rational(1, 2), Rational(1, 2)}) == Rational(1, 2));
  CHECK(second_max({Rational(0), Rational(0), Rational(1)}) == Rational(0));
  CHECK(second_max({Rational(1), Rational(1)}) == Rational(1));
  CHECK_THROWS_AS(second_max({Rational(1)}), std::invalid_argument);

  std::mt19937_64 rng(11);
  for (int round = 0; round < 500; ++round) {
    const Rational a = testing::random_unit_rational(rng, 9);
    const Rational b = testing::random_unit_rational(rng, 9);
    const Rational c = testing::random_unit_rational(rng, 9);
    const Rational m = second_max({a, b, c});
    CHECK((m == a || m == b || m == c));
    CHECK(min_of({a, b, c}) <= m);
    CHECK(m <= max_of({a, b, c}));
  }
}

TEST_CASE("digraph rejects self-loops and negative capacities") {
  Digraph g;
  const NodeId a = g.add_node("a");
  const NodeId b = g.add_node("b");
  CHECK_THROWS_AS(g.add_arc(a, a), std::invalid_argument);
  CHECK_THROWS_AS(g.add_arc(a, b, Rational(-1)), std::invalid_argument);
  g.add_arc(a, b, Rational(1), "x");
  g.add_arc(a, b, std::nullopt, "y");
  CHECK(g.num_arcs() == 2);
  CHECK(g.out_arcs(a).size() == 2);
  CHECK(g.in_arcs(b).size() == 2);
  CHECK_THROWS_AS(g.add_arc(a, b, std::nullopt, "x"), std::invalid_argument);
}

TEST_CASE("recognize_sp on the six-arc example graph") {
  const auto doc = load_fixture("example1.json");
  const Digraph& g = doc.instance.graph();
  const SpTree& tree = doc.instance.sp_tree();
  REQUIRE(tree.size() == 11);
  const std::vector<SpKind> kinds{SpKind::P, SpKind::S, SpKind::P, SpKind::Q, SpKind::P, SpKind::Q,
                                  SpKind::P, SpKind::Q, SpKind::Q, SpKind::Q, SpKind::Q};
  for (int w = 0; w < tree.size(); ++w) CHECK(tree.node(w).kind == kinds[w]);
  CHECK(g.arc_name(tree.node(3).arc) == "e1");
  CHECK(g.arc_name(tree.node(5).arc) == "e2");
  CHECK(g.arc_name(tree.node(7).arc) == "e3");
  CHECK(g.arc_name(tree.node(8).arc) == "e4");
  CHECK(g.arc_name(tree.node(9).arc) == "e5");
  CHECK(g.arc_name(tree.node(10).arc) == "e6");
  CHECK(validate_sp_tree(g, tree).empty());
}

TEST_CASE("sp_arcs") {
  const auto doc = load_fixture("example1.json");
  const Digraph& g = doc.instance.graph();
  const SpTree& tree = doc.instance.sp_tree();
  CHECK(sp_arcs(tree, 0) == arcs_by_name(g, {"e1", "e2", "e3", "e4", "e5", "e6"}));
  CHECK(sp_arcs(tree, 7) == arcs_by_name(g, {"e3"}));
  CHECK(sp_arcs(tree, 6) == arcs_by_name(g, {"e3", "e4"}));
  CHECK_THROWS_AS(sp_arcs(tree, 11), std::invalid_argument);
  CHECK_THROWS_AS(sp_arcs(tree, -1), std::invalid_argument);
}

TEST_CASE("recognize_sp on a single arc") {
  Digraph g;
  const NodeId u = g.add_node("u");
  const NodeId v = g.add_node("v");
  g.add_arc(u, v);
  const auto result = recognize_sp(g, u, v);
  const SpTree& tree = tree_of(result);
  CHECK(tree.size() == 1);
  CHECK(tree.node(0).kind == SpKind::Q);
  CHECK(tree.node(0).arc == 0);
}

TEST_CASE("recognize_sp on the four-node cut example") {
  const auto doc = load_fixture("fig1.json");
  const Digraph& g = doc.instance.graph();
  const auto result = recognize_sp(g, *g.find_node("s1"), *g.find_node("t2"));
  const SpTree& tree = tree_of(result);
  CHECK(tree.size() == 7);
  CHECK(tree.node(0).kind == SpKind::P);
  CHECK(validate_sp_tree(g, tree).empty());
  // The chain s1-s2-t1-t2 forms one child, arc a2 the other.
  int chain = tree.node(0).children[0];
  int single = tree.node(0).children[1];
  if (tree.node(chain).kind == SpKind::Q) std::swap(chain, single);
  CHECK(tree.node(chain).kind == SpKind::S);
  CHECK(sp_arcs(tree, chain) == arcs_by_name(g, {"a1", "a3", "a4"}));
  CHECK(g.arc_name(tree.node(single).arc) == "a2");
}

TEST_CASE("recognize_sp reports a kernel for K4") {
  const auto doc = load_fixture("k4.json");
  const Digraph& g = doc.instance.graph();
  const auto result = recognize_sp(g, doc.instance.source_terminal(), doc.instance.sink_terminal());
  REQUIRE(std::holds_alternative<NotSeriesParallel>(result));
  const auto& failure = std::get<NotSeriesParallel>(result);
  CHECK_FALSE(failure.edges.empty());
  std::size_t absorbed = 0;
  for (const auto& edge : failure.edges) absorbed += edge.arcs.size();
  CHECK(absorbed == static_cast<std::size_t>(g.num_arcs()));
}

TEST_CASE("validate_sp_tree catches a corrupted label") {
  const auto doc = load_fixture("example1.json");
  std::vector<SpNode> nodes = doc.instance.sp_tree().nodes();
  std::swap(nodes[4].u, nodes[4].v);
  bool rejected = false;
  try {
    const SpTree broken(doc.instance.graph(), nodes);
    rejected = !validate_sp_tree(doc.instance.graph(), broken).empty();
  } catch (const std::exception&) {
    rejected = true;
  }
  CHECK(rejected);
}

TEST_CASE("random sp-expressions are recognized and replayed") {
  std::mt19937_64 rng(2024);
  for (int round = 0; round < 200; ++round) {
    const int arcs = std::uniform_int_distribution<int>(1, 25)(rng);
    NodeId s = -1;
    NodeId t = -1;
    const Digraph g = testing::random_sp_digraph(rng, arcs, &s, &t);
    const auto first = recognize_sp(g, s, t);
    const SpTree& tree = tree_of(first);
    CHECK(validate_sp_tree(g, tree).empty());
    int leaves = 0;
    for (int w = 0; w < tree.size(); ++w) leaves += tree.is_leaf(w) ? 1 : 0;
    CHECK(leaves == g.num_arcs());
    std::vector<ArcId> all(static_cast<std::size_t>(g.num_arcs()));
    for (ArcId e = 0; e < g.num_arcs(); ++e) all[static_cast<std::size_t>(e)] = e;
    CHECK(sp_arcs(tree, 0) == all);

    std::multiset<std::pair<NodeId, NodeId>> expected;
    for (const Arc& a : g.arcs()) expected.insert({a.tail, a.head});
    CHECK(replay(g, tree, 0) == expected);

    // Same input, same tree.
    const auto second = recognize_sp(g, s, t);
    const SpTree& again = tree_of(second);
    REQUIRE(again.size() == tree.size());
    for (int w = 0; w < tree.size(); ++w) {
      CHECK(again.node(w).kind == tree.node(w).kind);
      CHECK(again.node(w).arc == tree.node(w).arc);
      CHECK(again.node(w).children == tree.node(w).children);
    }
  }
}
