#include "spunsplit/instance.hpp"

#include <algorithm>
#include <stdexcept>

namespace spunsplit {

Instance::Instance(Digraph graph, NodeId source_terminal, NodeId sink_terminal,
                   std::vector<Commodity> commodities)
    : graph_(std::move(graph)),
      source_terminal_(source_terminal),
      sink_terminal_(sink_terminal),
      commodities_(std::move(commodities)) {
  const auto valid = [&](NodeId v) { return v >= 0 && v < graph_.num_nodes(); };
  if (!valid(source_terminal_) || !valid(sink_terminal_)) {
    throw std::invalid_argument("terminal is not a node");
  }
  if (commodities_.empty()) throw std::invalid_argument("instance has no commodities");
  for (std::size_t i = 0; i < commodities_.size(); ++i) {
    Commodity& c = commodities_[i];
    if (c.name.empty()) c.name = std::to_string(i + 1);
    if (!valid(c.source) || !valid(c.sink)) {
      throw std::invalid_argument("commodity " + c.name + ": endpoint is not a node");
    }
    if (c.source == c.sink) throw std::invalid_argument("commodity " + c.name + ": source = sink");
    if (!c.demand.is_positive()) {
      throw std::invalid_argument("commodity " + c.name + ": demand must be positive");
    }
    if (!graph_.has_path(c.source, c.sink)) {
      throw std::invalid_argument("commodity " + c.name + ": sink unreachable from source");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (commodities_[j].name == c.name) {
        throw std::invalid_argument("duplicate commodity id '" + c.name + "'");
      }
    }
    if (c.demand > d_max_) d_max_ = c.demand;
  }
  if (source_terminal_ == sink_terminal_) {
    failure_ = NotSeriesParallel{"terminals coincide", {}, {}};
    return;
  }
  auto result = recognize_sp(graph_, source_terminal_, sink_terminal_);
  if (auto* tree = std::get_if<SpTree>(&result)) {
    tree_ = std::move(*tree);
  } else {
    failure_ = std::get<NotSeriesParallel>(std::move(result));
  }
}

const SpTree& Instance::sp_tree() const {
  if (!tree_) throw std::invalid_argument("instance graph is not series-parallel");
  return *tree_;
}

std::optional<CommodityId> Instance::find_commodity(std::string_view name) const {
  for (CommodityId i = 0; i < num_commodities(); ++i) {
    if (commodities_[i].name == name) return i;
  }
  return std::nullopt;
}

Multiflow::Multiflow(int num_arcs, int num_commodities)
    : num_arcs_(num_arcs), rows_(num_commodities) {}

Rational Multiflow::get(ArcId e, CommodityId i) const {
  const auto& row = rows_.at(i);
  auto it = row.find(e);
  return it == row.end() ? Rational(0) : it->second;
}

void Multiflow::set(ArcId e, CommodityId i, const Rational& value) {
  if (e < 0 || e >= num_arcs_) throw std::out_of_range("arc index out of range");
  auto& row = rows_.at(i);
  if (value.is_zero()) {
    row.erase(e);
  } else {
    row[e] = value;
  }
}

void Multiflow::add(ArcId e, CommodityId i, const Rational& delta) {
  if (delta.is_zero()) return;
  set(e, i, get(e, i) + delta);
}

bool Multiflow::is_integral() const {
  for (const auto& row : rows_) {
    for (const auto& [e, value] : row) {
      if (!value.is_integer()) return false;
    }
  }
  return true;
}

std::vector<Rational> total_flow(const Multiflow& flow) {
  std::vector<Rational> x(flow.num_arcs());
  for (CommodityId i = 0; i < flow.num_commodities(); ++i) {
    for (const auto& [e, value] : flow.commodity_flow(i)) x[e] += value;
  }
  return x;
}

std::optional<ConservationViolation> check_conservation(const Instance& inst,
                                                        const Multiflow& flow) {
  const Digraph& g = inst.graph();
  if (flow.num_arcs() != g.num_arcs() || flow.num_commodities() != inst.num_commodities()) {
    throw std::invalid_argument("flow matrix does not match the instance");
  }
  for (CommodityId i = 0; i < inst.num_commodities(); ++i) {
    const Commodity& c = inst.commodity(i);
    std::vector<Rational> net(g.num_nodes());
    for (const auto& [e, value] : flow.commodity_flow(i)) {
      if (value.is_negative()) return ConservationViolation{g.arc(e).tail, i, value};
      net[g.arc(e).tail] += value;
      net[g.arc(e).head] -= value;
    }
    net[c.source] -= c.demand;
    net[c.sink] += c.demand;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      if (!net[v].is_zero()) return ConservationViolation{v, i, net[v]};
    }
  }
  return std::nullopt;
}

bool is_unsplittable(const Instance& inst, const Multiflow& flow) {
  if (check_conservation(inst, flow)) return false;
  for (CommodityId i = 0; i < inst.num_commodities(); ++i) {
    for (const auto& [e, value] : flow.commodity_flow(i)) {
      if (value != inst.commodity(i).demand) return false;
    }
  }
  return true;
}

std::vector<CommodityId> DemandShareVector::fractional() const {
  std::vector<CommodityId> ids;
  for (CommodityId i = 0; i < static_cast<CommodityId>(z.size()); ++i) {
    if (is_fractional(i)) ids.push_back(i);
  }
  return ids;
}

std::vector<CommodityId> DemandShareVector::full() const {
  std::vector<CommodityId> ids;
  for (CommodityId i = 0; i < static_cast<CommodityId>(z.size()); ++i) {
    if (z[i] == Rational(1)) ids.push_back(i);
  }
  return ids;
}

Rational demand_share(const Instance& inst, const Multiflow& flow, int w, CommodityId i) {
  const SpTree& tree = inst.sp_tree();
  const Commodity& c = inst.commodity(i);
  if (tree.is_inner(w, c.source) || tree.is_inner(w, c.sink)) return Rational(1);
  Rational routed;
  for (ArcId e : tree.start_arcs(w)) routed += flow.get(e, i);
  return routed / c.demand;
}

DemandShareVector demand_shares(const Instance& inst, const Multiflow& flow, int w) {
  DemandShareVector shares{w, {}};
  shares.z.reserve(inst.num_commodities());
  for (CommodityId i = 0; i < inst.num_commodities(); ++i) {
    shares.z.push_back(demand_share(inst, flow, w, i));
  }
  return shares;
}

std::vector<DemandShareVector> all_demand_shares(const Instance& inst, const Multiflow& flow) {
  std::vector<DemandShareVector> all;
  for (int w = 0; w < inst.sp_tree().size(); ++w) all.push_back(demand_shares(inst, flow, w));
  return all;
}

std::optional<ShareViolation> check_share_recurrences(const Instance& inst,
                                                      const std::vector<DemandShareVector>& shares) {
  const SpTree& tree = inst.sp_tree();
  const Rational one(1);
  for (int w : tree.preorder()) {
    const SpNode& sn = tree.node(w);
    for (CommodityId i = 0; i < inst.num_commodities(); ++i) {
      const Rational& z = shares.at(w).z.at(i);
      if (z.is_negative() || z > one) return ShareViolation{w, i, "share outside [0,1]"};
    }
    if (sn.kind == SpKind::Q) continue;
    const auto& z = shares.at(w).z;
    const auto& z1 = shares.at(sn.children[0]).z;
    const auto& z2 = shares.at(sn.children[1]).z;
    for (CommodityId i = 0; i < inst.num_commodities(); ++i) {
      const Commodity& c = inst.commodity(i);
      if (sn.kind == SpKind::P) {
        if (z[i] != z1[i] + z2[i]) return ShareViolation{w, i, "parallel: z != z1 + z2"};
      } else if (tree.is_inner(w, c.source) || tree.is_inner(w, c.sink)) {
        const auto binary = [&](const Rational& v) { return v.is_zero() || v == one; };
        if (z[i] != one || !binary(z1[i]) || !binary(z2[i])) {
          return ShareViolation{w, i, "series with inner endpoint: shares not integral"};
        }
      } else if (z[i] != z1[i] || z[i] != z2[i]) {
        return ShareViolation{w, i, "series: z, z1, z2 differ"};
      }
    }
  }
  return std::nullopt;
}

std::optional<ShareViolation> check_share_recurrences(const Instance& inst, const Multiflow& flow) {
  return check_share_recurrences(inst, all_demand_shares(inst, flow));
}

}  // namespace spunsplit
