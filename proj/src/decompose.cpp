#include "spunsplit/decompose.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

#include "spunsplit/errors.hpp"
#include "spunsplit/refine.hpp"

namespace spunsplit {
namespace {

using Labels = std::array<CommodityId, 2>;

unsigned bit(RoutingOption j) { return static_cast<unsigned>(j); }

RoutingOption option(unsigned mask) { return static_cast<RoutingOption>(mask & 3U); }

Rational share_of(const ShareTable& shares, int w, CommodityId i) {
  return i < 0 ? Rational(0) : shares.at(w).z.at(i);
}

Labels padded(const std::vector<CommodityId>& fractional) {
  ensure(fractional.size() <= 2, "more than two fractional commodities at a tree node");
  Labels labels{kDummy, kDummyPrime};
  for (std::size_t k = 0; k < fractional.size(); ++k) labels[k] = fractional[k];
  return labels;
}

MuVector mu_at(const ShareTable& shares, int w, const Labels& labels) {
  return mu_coefficients(share_of(shares, w, labels[0]), share_of(shares, w, labels[1]));
}

unsigned mask_of(const UnsplittableRouting& routing, const Labels& labels) {
  unsigned mask = 0;
  for (unsigned k = 0; k < 2; ++k) {
    if (labels[k] >= 0 && !routing.paths.at(labels[k]).empty()) mask |= 1U << k;
  }
  return mask;
}

bool contains(const std::vector<CommodityId>& ids, CommodityId i) {
  return std::find(ids.begin(), ids.end(), i) != ids.end();
}

std::vector<CommodityId> intersect(const std::vector<CommodityId>& a,
                                   const std::vector<CommodityId>& b) {
  std::vector<CommodityId> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

void merge_duplicates(std::vector<DecompositionTerm>& terms) {
  std::map<UnsplittableRouting, std::size_t> position;
  std::vector<DecompositionTerm> merged;
  for (auto& term : terms) {
    auto [it, fresh] = position.emplace(term.routing, merged.size());
    if (fresh) {
      merged.push_back(std::move(term));
    } else {
      merged[it->second].rho += term.rho;
    }
  }
  terms = std::move(merged);
}

// Rows whose parent option selects a dummy slot must carry no weight.
void check_dummy_rows(std::span<const CombinationRow> rows, const Labels& parent) {
  for (const auto& row : rows) {
    for (unsigned k = 0; k < 2; ++k) {
      if (parent[k] < 0 && (bit(row.parent) >> k & 1U)) {
        ensure(row.weight.is_zero(), "positive weight on a routing option with a dummy");
      }
    }
  }
}

ConvexDecomposition combine_children(int scope, std::span<const CombinationRow> rows,
                                     const Labels& first_labels, const ConvexDecomposition& first,
                                     const Labels& second_labels,
                                     const ConvexDecomposition& second) {
  GroupedWeights first_weights;
  GroupedWeights second_weights;
  std::array<std::vector<std::size_t>, 4> first_index;
  std::array<std::vector<std::size_t>, 4> second_index;
  for (std::size_t t = 0; t < first.terms.size(); ++t) {
    const unsigned m = mask_of(first.terms[t].routing, first_labels);
    first_weights.groups[m].push_back(first.terms[t].rho);
    first_index[m].push_back(t);
  }
  for (std::size_t t = 0; t < second.terms.size(); ++t) {
    const unsigned m = mask_of(second.terms[t].routing, second_labels);
    second_weights.groups[m].push_back(second.terms[t].rho);
    second_index[m].push_back(t);
  }
  ConvexDecomposition out{scope, {}};
  for (const auto& planned : plan_combination(rows, first_weights, second_weights)) {
    const auto& a = first.terms[first_index[bit(planned.first)][planned.first_index]].routing;
    const auto& b = second.terms[second_index[bit(planned.second)][planned.second_index]].routing;
    UnsplittableRouting joined;
    joined.paths.resize(a.paths.size());
    for (std::size_t i = 0; i < a.paths.size(); ++i) {
      auto& arcs = joined.paths[i];
      std::merge(a.paths[i].begin(), a.paths[i].end(), b.paths[i].begin(), b.paths[i].end(),
                 std::back_inserter(arcs));
    }
    out.terms.push_back(DecompositionTerm{planned.rho, std::move(joined)});
  }
  merge_duplicates(out.terms);
  return out;
}

// Sum of rho * Y over E_w equals the almost-unsplittable flow there.
void check_restriction(const Instance& inst, const Multiflow& almost, int w,
                       const ConvexDecomposition& d) {
  const SpTree& tree = inst.sp_tree();
  std::map<std::pair<ArcId, CommodityId>, Rational> rebuilt;
  Rational total;
  for (const auto& term : d.terms) {
    ensure(term.rho.is_positive(), "non-positive coefficient in a partial decomposition");
    total += term.rho;
    for (CommodityId i = 0; i < inst.num_commodities(); ++i) {
      for (ArcId e : term.routing.paths[i]) rebuilt[{e, i}] += term.rho * inst.commodity(i).demand;
    }
  }
  ensure(total == Rational(1), "partial decomposition at node " + std::to_string(w) +
                                   " sums to " + total.str());
  for (ArcId e : tree.arcs(w)) {
    for (CommodityId i = 0; i < inst.num_commodities(); ++i) {
      auto it = rebuilt.find({e, i});
      const Rational got = it == rebuilt.end() ? Rational(0) : it->second;
      ensure(got == almost.get(e, i), "partial decomposition at node " + std::to_string(w) +
                                          " misses flow on arc " + inst.graph().arc_name(e));
    }
  }
}

std::vector<ArcId> order_along_path(const Instance& inst, CommodityId i,
                                    const std::vector<ArcId>& arcs) {
  const Digraph& g = inst.graph();
  const Commodity& c = inst.commodity(i);
  std::vector<ArcId> path;
  std::vector<char> used(arcs.size(), 0);
  NodeId at = c.source;
  while (path.size() < arcs.size()) {
    bool found = false;
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      if (!used[k] && g.arc(arcs[k]).tail == at) {
        used[k] = 1;
        path.push_back(arcs[k]);
        at = g.arc(arcs[k]).head;
        found = true;
        break;
      }
    }
    ensure(found, "arcs of commodity " + c.name + " do not form a path");
  }
  ensure(at == c.sink, "path of commodity " + c.name + " does not end at its sink");
  return path;
}

// Component flow sum_i z_{w,i}(Y) d_i of one routing at every tree node.
std::vector<Rational> component_flows(const Instance& inst, const UnsplittableRouting& routing) {
  const SpTree& tree = inst.sp_tree();
  const Digraph& g = inst.graph();
  std::vector<std::vector<char>> uses(inst.num_commodities(), std::vector<char>(g.num_arcs(), 0));
  for (CommodityId i = 0; i < inst.num_commodities(); ++i) {
    for (ArcId e : routing.paths[i]) uses[i][e] = 1;
  }
  std::vector<Rational> flows(tree.size());
  for (int w = 0; w < tree.size(); ++w) {
    for (CommodityId i = 0; i < inst.num_commodities(); ++i) {
      const Commodity& c = inst.commodity(i);
      bool through = tree.is_inner(w, c.source) || tree.is_inner(w, c.sink);
      for (ArcId e : tree.start_arcs(w)) through = through || uses[i][e];
      if (through) flows[w] += c.demand;
    }
  }
  return flows;
}

Rational abs_diff(const Rational& a, const Rational& b) { return a < b ? b - a : a - b; }

}  // namespace

std::string bound_mode_name(BoundMode mode) { return mode == BoundMode::DMax ? "dmax" : "2dmax"; }

BoundMode parse_bound_mode(std::string_view text) {
  if (text == "dmax") return BoundMode::DMax;
  if (text == "2dmax") return BoundMode::TwoDMax;
  throw std::invalid_argument("bound mode must be dmax or 2dmax");
}

std::vector<RoutingContext> routing_contexts(const Instance& inst, const Multiflow& almost) {
  const SpTree& tree = inst.sp_tree();
  const auto shares = all_demand_shares(inst, almost);
  std::vector<RoutingContext> contexts;
  for (int w = 0; w < tree.size(); ++w) {
    const Labels labels = padded(shares[w].fractional());
    RoutingContext ctx;
    ctx.tree_node = w;
    ctx.p = labels[0];
    ctx.q = labels[1];
    ctx.full = shares[w].full();
    ctx.mu = mu_at(shares, w, labels);
    const SpNode& sn = tree.node(w);
    if (sn.kind == SpKind::P) {
      const auto shared = intersect(shares[sn.children[0]].fractional(),
                                    shares[sn.children[1]].fractional());
      if (!shared.empty()) ctx.split = shared.front();
    }
    contexts.push_back(std::move(ctx));
  }
  return contexts;
}

std::vector<CombinationRow> series_rows(const MuVector& mu) {
  std::vector<CombinationRow> rows;
  for (unsigned j = 0; j < 4; ++j) rows.push_back({option(j), option(j), option(j), mu[j]});
  return rows;
}

std::vector<CombinationRow> general_parallel_rows(const LambdaVector& lambda) {
  ensure(lambda.size() == 8, "general parallel table needs eight weights");
  using R = RoutingOption;
  // parent <- (first child labelled (p, r), second child labelled (r, q))
  static constexpr std::array<std::array<R, 3>, 8> kTable{{
      {R::None, R::Second, R::None},
      {R::None, R::None, R::First},
      {R::First, R::Both, R::None},
      {R::First, R::First, R::First},
      {R::Second, R::Second, R::Second},
      {R::Second, R::None, R::Both},
      {R::Both, R::Both, R::Second},
      {R::Both, R::First, R::Both},
  }};
  std::vector<CombinationRow> rows;
  for (std::size_t k = 0; k < kTable.size(); ++k) {
    rows.push_back({kTable[k][0], kTable[k][1], kTable[k][2], lambda[static_cast<int>(k)]});
  }
  return rows;
}

std::vector<CombinationRow> p_eq_r_parallel_rows(const LambdaVector& lambda) {
  ensure(lambda.size() == 6, "parallel table with p = r needs six weights");
  using R = RoutingOption;
  // parent <- (first child labelled (p, dummy), second child labelled (p, q))
  static constexpr std::array<std::array<R, 3>, 6> kTable{{
      {R::None, R::None, R::None},
      {R::First, R::First, R::None},
      {R::First, R::None, R::First},
      {R::Second, R::None, R::Second},
      {R::Both, R::First, R::Second},
      {R::Both, R::None, R::Both},
  }};
  std::vector<CombinationRow> rows;
  for (std::size_t k = 0; k < kTable.size(); ++k) {
    rows.push_back({kTable[k][0], kTable[k][1], kTable[k][2], lambda[static_cast<int>(k)]});
  }
  return rows;
}

std::vector<CombinationRow> unshared_parallel_rows(const MuVector& mu, unsigned first_mask,
                                                   unsigned second_mask) {
  std::vector<CombinationRow> rows;
  for (unsigned j = 0; j < 4; ++j) {
    rows.push_back({option(j), option(j & first_mask), option(j & second_mask), mu[j]});
  }
  return rows;
}

std::vector<PlannedTerm> plan_combination(std::span<const CombinationRow> rows,
                                          const GroupedWeights& first,
                                          const GroupedWeights& second) {
  for (int side = 0; side < 2; ++side) {
    const GroupedWeights& child = side == 0 ? first : second;
    std::array<Rational, 4> from_rows;
    for (const auto& row : rows) {
      if (row.weight.is_negative()) throw InvariantError("negative row weight");
      from_rows[bit(side == 0 ? row.first : row.second)] += row.weight;
    }
    for (unsigned j = 0; j < 4; ++j) {
      const Rational group_total = sum_of(child.groups[j]);
      if (group_total != from_rows[j]) {
        std::ostringstream msg;
        msg << (side == 0 ? "first" : "second") << " child group J" << j + 1 << " weighs "
            << group_total << " but the table assigns " << from_rows[j];
        throw InvariantError(msg.str());
      }
    }
  }
  std::vector<PlannedTerm> planned;
  for (const auto& row : rows) {
    if (row.weight.is_zero()) continue;
    const auto pairs = refine_linear(first.groups[bit(row.first)], second.groups[bit(row.second)],
                                     row.weight);
    for (const auto& pair : pairs) {
      planned.push_back(PlannedTerm{row.parent, row.first, pair.first, row.second, pair.second,
                                    pair.weight});
    }
  }
  return planned;
}

Multiflow routing_matrix(const Instance& inst, const UnsplittableRouting& routing) {
  Multiflow y(inst.graph().num_arcs(), inst.num_commodities());
  for (CommodityId i = 0; i < inst.num_commodities(); ++i) {
    for (ArcId e : routing.paths.at(i)) y.add(e, i, inst.commodity(i).demand);
  }
  return y;
}

std::vector<Rational> routing_totals(const Instance& inst, const UnsplittableRouting& routing) {
  std::vector<Rational> y(inst.graph().num_arcs());
  for (CommodityId i = 0; i < inst.num_commodities(); ++i) {
    for (ArcId e : routing.paths.at(i)) y.at(e) += inst.commodity(i).demand;
  }
  return y;
}

ConvexDecomposition leaf_decomposition(const Instance& inst, const ShareTable& shares, int w) {
  const SpNode& sn = inst.sp_tree().node(w);
  if (sn.kind != SpKind::Q) throw std::invalid_argument("leaf_decomposition needs a Q-node");
  const Labels labels = padded(shares.at(w).fractional());
  const MuVector mu = mu_at(shares, w, labels);
  const auto full = shares.at(w).full();
  ConvexDecomposition out{w, {}};
  for (unsigned j = 0; j < 4; ++j) {
    if (mu[j].is_zero()) continue;
    UnsplittableRouting routing;
    routing.paths.resize(inst.num_commodities());
    for (CommodityId i : full) routing.paths[i] = {sn.arc};
    for (unsigned k = 0; k < 2; ++k) {
      if (j >> k & 1U) {
        ensure(labels[k] >= 0, "positive weight on a routing option with a dummy");
        routing.paths[labels[k]] = {sn.arc};
      }
    }
    out.terms.push_back(DecompositionTerm{mu[j], std::move(routing)});
  }
  return out;
}

ConvexDecomposition series_combine(const Instance& inst, const ShareTable& shares, int w,
                                   const ConvexDecomposition& first,
                                   const ConvexDecomposition& second) {
  const SpNode& sn = inst.sp_tree().node(w);
  if (sn.kind != SpKind::S) throw std::invalid_argument("series_combine needs an S-node");
  const auto fractional = shares.at(w).fractional();
  ensure(fractional == shares.at(sn.children[0]).fractional() &&
             fractional == shares.at(sn.children[1]).fractional(),
         "S-node children disagree on fractional commodities");
  const Labels labels = padded(fractional);
  const auto rows = series_rows(mu_at(shares, w, labels));
  check_dummy_rows(rows, labels);
  return combine_children(w, rows, labels, first, labels, second);
}

ConvexDecomposition parallel_combine(const Instance& inst, const ShareTable& shares, int w,
                                     const ConvexDecomposition& first,
                                     const ConvexDecomposition& second) {
  const SpNode& sn = inst.sp_tree().node(w);
  if (sn.kind != SpKind::P) throw std::invalid_argument("parallel_combine needs a P-node");
  const int c1 = sn.children[0];
  const int c2 = sn.children[1];
  const auto parent = shares.at(w).fractional();
  const auto in_first = shares.at(c1).fractional();
  const auto in_second = shares.at(c2).fractional();
  const auto shared = intersect(in_first, in_second);
  ensure(parent.size() <= 2 && shared.size() <= 1, "input is not almost unsplittable");

  if (shared.empty()) {
    const Labels labels = padded(parent);
    unsigned first_mask = 0;
    unsigned second_mask = 0;
    Labels first_labels{kDummy, kDummyPrime};
    Labels second_labels{kDummy, kDummyPrime};
    for (unsigned k = 0; k < 2; ++k) {
      if (labels[k] < 0) continue;
      const bool a = contains(in_first, labels[k]);
      const bool b = contains(in_second, labels[k]);
      ensure(a != b, "fractional commodity must live in exactly one child");
      if (a) {
        first_mask |= 1U << k;
        first_labels[k] = labels[k];
      } else {
        second_mask |= 1U << k;
        second_labels[k] = labels[k];
      }
    }
    const auto rows = unshared_parallel_rows(mu_at(shares, w, labels), first_mask, second_mask);
    check_dummy_rows(rows, labels);
    return combine_children(w, rows, first_labels, first, second_labels, second);
  }

  const CommodityId r = shared.front();
  if (!contains(parent, r)) {
    // r is fully routed through the parent; p lives in the first child and q
    // in the second.
    Labels labels{kDummy, kDummyPrime};
    for (CommodityId i : parent) {
      const bool a = contains(in_first, i);
      ensure(a != contains(in_second, i), "fractional commodity must live in exactly one child");
      CommodityId& slot = a ? labels[0] : labels[1];
      ensure(slot < 0, "two fractional commodities in one child next to the split commodity");
      slot = i;
    }
    const auto lambda = lambda_coefficients(share_of(shares, w, labels[0]), share_of(shares, c2, r),
                                            share_of(shares, w, labels[1]));
    const auto rows = general_parallel_rows(lambda);
    check_dummy_rows(rows, labels);
    return combine_children(w, rows, Labels{labels[0], r}, first, Labels{r, labels[1]}, second);
  }

  // r is one of the parent's fractional commodities: call it p. The child
  // carrying the other one (q) takes the second role.
  CommodityId q = kDummyPrime;
  for (CommodityId i : parent) {
    if (i != r) q = i;
  }
  const bool swapped = q >= 0 && contains(in_first, q);
  const int trail = swapped ? c1 : c2;
  const auto lambda = lambda_coefficients_p_eq_r(share_of(shares, w, r), share_of(shares, trail, r),
                                                 share_of(shares, w, q));
  const auto rows = p_eq_r_parallel_rows(lambda);
  check_dummy_rows(rows, Labels{r, q});
  const ConvexDecomposition& lead_d = swapped ? second : first;
  const ConvexDecomposition& trail_d = swapped ? first : second;
  return combine_children(w, rows, Labels{r, kDummyPrime}, lead_d, Labels{r, q}, trail_d);
}

ConvexDecomposition decompose_recursive(const Instance& inst, const Multiflow& almost) {
  const SpTree& tree = inst.sp_tree();
  if (auto failure = certify_almost_unsplittable(inst, almost); !failure.empty()) {
    throw std::invalid_argument("flow is not almost unsplittable: " + failure);
  }
  const ShareTable shares = all_demand_shares(inst, almost);
  std::vector<std::optional<ConvexDecomposition>> partial(tree.size());
  for (int w : tree.postorder()) {
    const SpNode& sn = tree.node(w);
    if (sn.kind == SpKind::Q) {
      partial[w] = leaf_decomposition(inst, shares, w);
    } else {
      auto& a = partial[sn.children[0]];
      auto& b = partial[sn.children[1]];
      partial[w] = sn.kind == SpKind::S ? series_combine(inst, shares, w, *a, *b)
                                        : parallel_combine(inst, shares, w, *a, *b);
      a.reset();
      b.reset();
    }
    check_restriction(inst, almost, w, *partial[w]);
  }
  ConvexDecomposition result = std::move(*partial[tree.root()]);
  for (auto& term : result.terms) {
    for (CommodityId i = 0; i < inst.num_commodities(); ++i) {
      term.routing.paths[i] = order_along_path(inst, i, term.routing.paths[i]);
    }
  }
  merge_duplicates(result.terms);
  std::sort(result.terms.begin(), result.terms.end(),
            [](const DecompositionTerm& a, const DecompositionTerm& b) {
              return a.routing < b.routing;
            });
  return result;
}

DecompositionResult decompose_unsplittable(const Instance& inst, const Multiflow& flow,
                                           BoundMode mode) {
  DecompositionResult result;
  result.almost = make_almost_unsplittable(inst, flow);
  result.decomposition = decompose_recursive(inst, result.almost.flow);

  BoundReport& report = result.report;
  report.mode = mode;
  report.d_max = inst.d_max();
  report.bound = mode == BoundMode::DMax ? inst.d_max() : inst.d_max() * Rational(2);
  report.support_size = result.decomposition.terms.size();

  const SpTree& tree = inst.sp_tree();
  const auto x = total_flow(flow);
  const ShareTable shares = all_demand_shares(inst, result.almost.flow);
  std::vector<Rational> x_bar(tree.size());
  for (int w = 0; w < tree.size(); ++w) {
    for (CommodityId i = 0; i < inst.num_commodities(); ++i) {
      x_bar[w] += shares[w].z[i] * inst.commodity(i).demand;
    }
  }

  for (std::size_t t = 0; t < result.decomposition.terms.size(); ++t) {
    const auto& routing = result.decomposition.terms[t].routing;
    const auto y = routing_totals(inst, routing);
    for (ArcId e = 0; e < inst.graph().num_arcs(); ++e) {
      const Rational dev = abs_diff(y[e], x[e]);
      report.max_arc_deviation = std::max(report.max_arc_deviation, dev);
      if (dev >= report.bound) {
        report.arc_bound_ok = false;
        std::ostringstream msg;
        msg << "term " << t << " arc " << inst.graph().arc_name(e) << ": y = " << y[e]
            << ", x = " << x[e] << ", bound " << report.bound;
        throw InvariantError(msg.str());
      }
    }
    const auto y_bar = component_flows(inst, routing);
    for (int w = 0; w < tree.size(); ++w) {
      if (abs_diff(y_bar[w], x_bar[w]) >= report.d_max) report.component_bound_ok = false;
    }
  }

  for (int w = 0; w < tree.size(); ++w) {
    const Labels labels = padded(shares[w].fractional());
    Rational fixed;
    for (CommodityId i : shares[w].full()) fixed += inst.commodity(i).demand;
    for (unsigned j = 0; j < 4; ++j) {
      Rational y_bar = fixed;
      for (unsigned k = 0; k < 2; ++k) {
        if ((j >> k & 1U) && labels[k] >= 0) y_bar += inst.commodity(labels[k]).demand;
      }
      if (abs_diff(y_bar, x_bar[w]) >= report.d_max * Rational(2)) report.option_bound_ok = false;
    }
  }
  return result;
}

}  // namespace spunsplit
