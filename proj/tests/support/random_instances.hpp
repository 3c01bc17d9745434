#pragma once

#include <random>
#include <vector>

#include "spunsplit/instance.hpp"

namespace spunsplit::testing {

struct RandomOptions {
  int min_arcs = 1;
  int max_arcs = 30;
  int max_nodes = 1000;
  int max_commodities = 8;
  // Demands drawn from this list.
  std::vector<Rational> demands{Rational(1), Rational(2), Rational(3), Rational(1, 2), Rational(3, 2)};
  std::vector<Rational> capacities{};  // empty: capacity = total flow
  int max_paths_per_commodity = 3;
  int max_weight = 5;
};

// Random sp-expression: split the arc budget, pick series or parallel.
Digraph random_sp_digraph(std::mt19937_64& rng, int arcs, NodeId* source, NodeId* sink);

struct RandomCase {
  Instance instance;
  Multiflow flow;
};

// Commodities between random connected pairs; each commodity's flow is a
// random convex combination of up to max_paths_per_commodity paths.
RandomCase random_sp_case(std::mt19937_64& rng, const RandomOptions& options);

// Instance only; capacities drawn from options.capacities.
Instance random_sp_instance(std::mt19937_64& rng, const RandomOptions& options);

// Rational in [0, 1] with denominator at most max_den.
Rational random_unit_rational(std::mt19937_64& rng, int max_den);

}  // namespace spunsplit::testing
