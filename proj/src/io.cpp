#include "spunsplit/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace spunsplit {
namespace {

void only_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw InputError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || key == k;
    if (!known) throw InputError("unknown field '" + key + "' in " + where);
  }
}

const Json& required(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw InputError("missing field '" + std::string(key) + "' in " + where);
  return *it;
}

std::string string_field(const Json& obj, const char* key, const std::string& where) {
  const Json& v = required(obj, key, where);
  if (!v.is_string()) throw InputError("field '" + std::string(key) + "' in " + where + " must be a string");
  return v.get<std::string>();
}

Rational parse_rational(const Json& v, const std::string& where) {
  if (!v.is_string()) throw InputError(where + " must be a rational string");
  try {
    return Rational::parse(v.get<std::string>());
  } catch (const std::exception& err) {
    throw InputError(where + ": " + err.what());
  }
}

NodeId node_ref(const Digraph& g, const std::string& name, const std::string& where) {
  auto v = g.find_node(name);
  if (!v) throw InputError("unknown node '" + name + "' in " + where);
  return *v;
}

Json id_list(const std::vector<int>& ids, const std::function<std::string(int)>& name) {
  Json out = Json::array();
  for (int id : ids) out.push_back(name(id));
  return out;
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& err) {
    throw InputError(path.string() + ": " + err.what());
  }
}

InstanceDocument parse_instance(const Json& doc) {
  only_keys(doc, {"nodes", "terminals", "arcs", "commodities", "flow", "description"}, "instance");
  Digraph g;
  const Json& nodes = required(doc, "nodes", "instance");
  if (!nodes.is_array()) throw InputError("nodes must be a list");
  try {
    for (const auto& n : nodes) {
      if (!n.is_string()) throw InputError("node ids must be strings");
      if (g.find_node(n.get<std::string>())) throw InputError("duplicate node '" + n.get<std::string>() + "'");
      g.add_node(n.get<std::string>());
    }
    const Json& arcs = required(doc, "arcs", "instance");
    if (!arcs.is_array()) throw InputError("arcs must be a list");
    for (const auto& a : arcs) {
      only_keys(a, {"id", "tail", "head", "capacity"}, "arc");
      const std::string id = string_field(a, "id", "arc");
      const std::string where = "arc '" + id + "'";
      if (g.find_arc(id)) throw InputError("duplicate arc '" + id + "'");
      const Json& cap = required(a, "capacity", where);
      std::optional<Rational> capacity;
      if (!cap.is_null()) capacity = parse_rational(cap, where + " capacity");
      g.add_arc(node_ref(g, string_field(a, "tail", where), where),
                node_ref(g, string_field(a, "head", where), where), capacity, id);
    }
    const Json& terminals = required(doc, "terminals", "instance");
    only_keys(terminals, {"source", "sink"}, "terminals");
    const NodeId source = node_ref(g, string_field(terminals, "source", "terminals"), "terminals");
    const NodeId sink = node_ref(g, string_field(terminals, "sink", "terminals"), "terminals");

    std::vector<Commodity> commodities;
    std::set<std::string> names;
    const Json& list = required(doc, "commodities", "instance");
    if (!list.is_array()) throw InputError("commodities must be a list");
    for (const auto& c : list) {
      only_keys(c, {"id", "source", "sink", "demand"}, "commodity");
      Commodity com;
      com.name = string_field(c, "id", "commodity");
      const std::string where = "commodity '" + com.name + "'";
      if (!names.insert(com.name).second) throw InputError("duplicate " + where);
      com.source = node_ref(g, string_field(c, "source", where), where);
      com.sink = node_ref(g, string_field(c, "sink", where), where);
      com.demand = parse_rational(required(c, "demand", where), where + " demand");
      commodities.push_back(std::move(com));
    }
    Instance inst(std::move(g), source, sink, std::move(commodities));
    std::optional<Multiflow> flow;
    if (auto it = doc.find("flow"); it != doc.end()) flow = flow_from_json(inst, *it);
    return InstanceDocument{std::move(inst), std::move(flow)};
  } catch (const std::invalid_argument& err) {
    throw InputError(err.what());
  }
}

InstanceDocument read_instance_file(const std::filesystem::path& path) {
  const Json doc = read_json_file(path);
  try {
    return parse_instance(doc);
  } catch (const InputError& err) {
    throw InputError(path.string() + ": " + err.what());
  }
}

Json instance_to_json(const Instance& inst, const Multiflow* flow) {
  const Digraph& g = inst.graph();
  Json doc;
  doc["nodes"] = Json::array();
  for (NodeId v = 0; v < g.num_nodes(); ++v) doc["nodes"].push_back(g.node_name(v));
  doc["terminals"] = {{"source", g.node_name(inst.source_terminal())},
                      {"sink", g.node_name(inst.sink_terminal())}};
  doc["arcs"] = Json::array();
  for (ArcId e = 0; e < g.num_arcs(); ++e) {
    const Arc& a = g.arc(e);
    doc["arcs"].push_back({{"id", g.arc_name(e)},
                           {"tail", g.node_name(a.tail)},
                           {"head", g.node_name(a.head)},
                           {"capacity", a.capacity ? Json(a.capacity->str()) : Json(nullptr)}});
  }
  doc["commodities"] = Json::array();
  for (const auto& c : inst.commodities()) {
    doc["commodities"].push_back({{"id", c.name},
                                  {"source", g.node_name(c.source)},
                                  {"sink", g.node_name(c.sink)},
                                  {"demand", c.demand.str()}});
  }
  if (flow) doc["flow"] = flow_to_json(inst, *flow);
  return doc;
}

Json flow_to_json(const Instance& inst, const Multiflow& flow) {
  Json doc = Json::object();
  for (CommodityId i = 0; i < inst.num_commodities(); ++i) {
    for (const auto& [e, value] : flow.commodity_flow(i)) {
      doc[inst.graph().arc_name(e)][inst.commodity(i).name] = value.str();
    }
  }
  return doc;
}

Multiflow flow_from_json(const Instance& inst, const Json& doc) {
  if (!doc.is_object()) throw InputError("flow must be an object");
  Multiflow flow(inst.graph().num_arcs(), inst.num_commodities());
  for (const auto& [arc, row] : doc.items()) {
    auto e = inst.graph().find_arc(arc);
    if (!e) throw InputError("flow refers to unknown arc '" + arc + "'");
    if (!row.is_object()) throw InputError("flow row of arc '" + arc + "' must be an object");
    for (const auto& [name, value] : row.items()) {
      auto i = inst.find_commodity(name);
      if (!i) throw InputError("flow refers to unknown commodity '" + name + "'");
      const Rational r = parse_rational(value, "flow of '" + name + "' on '" + arc + "'");
      if (r.is_negative()) throw InputError("negative flow of '" + name + "' on '" + arc + "'");
      flow.set(*e, *i, r);
    }
  }
  return flow;
}

std::string reconstruction_hash(const Instance& inst, const ConvexDecomposition& decomposition) {
  std::vector<Rational> totals(inst.graph().num_arcs());
  for (const auto& term : decomposition.terms) {
    const auto y = routing_totals(inst, term.routing);
    for (std::size_t e = 0; e < y.size(); ++e) totals[e] += term.rho * y[e];
  }
  std::string text;
  for (ArcId e = 0; e < inst.graph().num_arcs(); ++e) {
    text += inst.graph().arc_name(e) + "=" + totals[e].str() + ";";
  }
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, hash);
  return buf;
}

Json decomposition_to_json(const Instance& inst, const ConvexDecomposition& decomposition,
                           BoundMode mode) {
  Json doc;
  doc["terms"] = Json::array();
  for (const auto& term : decomposition.terms) {
    Json paths = Json::object();
    for (CommodityId i = 0; i < inst.num_commodities(); ++i) {
      paths[inst.commodity(i).name] =
          id_list(term.routing.paths[i], [&](int e) { return inst.graph().arc_name(e); });
    }
    doc["terms"].push_back({{"rho", term.rho.str()}, {"paths", paths}});
  }
  doc["metadata"] = {{"d_max", inst.d_max().str()},
                     {"bound_mode", bound_mode_name(mode)},
                     {"support_size", decomposition.terms.size()},
                     {"reconstruction_hash", reconstruction_hash(inst, decomposition)}};
  return doc;
}

ConvexDecomposition decomposition_from_json(const Instance& inst, const Json& doc,
                                            std::string* stored_hash,
                                            std::optional<BoundMode>* stored_mode) {
  only_keys(doc, {"terms", "metadata"}, "decomposition");
  ConvexDecomposition out;
  const Json& terms = required(doc, "terms", "decomposition");
  if (!terms.is_array()) throw InputError("terms must be a list");
  for (const auto& t : terms) {
    only_keys(t, {"rho", "paths"}, "term");
    DecompositionTerm term;
    term.rho = parse_rational(required(t, "rho", "term"), "term weight");
    term.routing.paths.resize(inst.num_commodities());
    std::vector<char> seen(inst.num_commodities(), 0);
    const Json& paths = required(t, "paths", "term");
    if (!paths.is_object()) throw InputError("term paths must be an object");
    for (const auto& [name, arcs] : paths.items()) {
      auto i = inst.find_commodity(name);
      if (!i) throw InputError("term refers to unknown commodity '" + name + "'");
      if (!arcs.is_array()) throw InputError("path of '" + name + "' must be a list");
      seen[*i] = 1;
      for (const auto& a : arcs) {
        if (!a.is_string()) throw InputError("arc ids must be strings");
        auto e = inst.graph().find_arc(a.get<std::string>());
        if (!e) throw InputError("path refers to unknown arc '" + a.get<std::string>() + "'");
        term.routing.paths[*i].push_back(*e);
      }
    }
    for (CommodityId i = 0; i < inst.num_commodities(); ++i) {
      if (!seen[i]) throw InputError("term lacks a path for '" + inst.commodity(i).name + "'");
    }
    out.terms.push_back(std::move(term));
  }
  if (auto it = doc.find("metadata"); it != doc.end()) {
    only_keys(*it, {"d_max", "bound_mode", "support_size", "reconstruction_hash"}, "metadata");
    if (stored_hash && it->contains("reconstruction_hash")) {
      *stored_hash = string_field(*it, "reconstruction_hash", "metadata");
    }
    if (stored_mode && it->contains("bound_mode")) {
      try {
        *stored_mode = parse_bound_mode(string_field(*it, "bound_mode", "metadata"));
      } catch (const std::invalid_argument& err) {
        throw InputError(err.what());
      }
    }
  }
  return out;
}

Json sp_tree_to_json(const Instance& inst) {
  const SpTree& tree = inst.sp_tree();
  const Digraph& g = inst.graph();
  Json nodes = Json::array();
  for (int w = 0; w < tree.size(); ++w) {
    const SpNode& sn = tree.node(w);
    Json node = {{"id", w},
                 {"kind", std::string(1, kind_letter(sn.kind))},
                 {"u", g.node_name(sn.u)},
                 {"v", g.node_name(sn.v)},
                 {"depth", sn.depth}};
    if (sn.kind == SpKind::Q) {
      node["arc"] = g.arc_name(sn.arc);
    } else {
      node["children"] = {sn.children[0], sn.children[1]};
    }
    nodes.push_back(std::move(node));
  }
  return {{"series_parallel", true}, {"root", tree.root()}, {"tree", nodes}};
}

Json witness_to_json(const Digraph& g, const NotSeriesParallel& failure) {
  Json edges = Json::array();
  for (const auto& edge : failure.edges) {
    edges.push_back({{"tail", g.node_name(edge.tail)},
                     {"head", g.node_name(edge.head)},
                     {"arcs", id_list(edge.arcs, [&](int e) { return g.arc_name(e); })}});
  }
  return {{"series_parallel", false},
          {"reason", failure.reason},
          {"kernel_nodes", id_list(failure.nodes, [&](int v) { return g.node_name(v); })},
          {"kernel_edges", edges}};
}

Json certificate_to_json(const Instance& inst, const CutCertificate& cert) {
  const Digraph& g = inst.graph();
  Json doc = {{"kind", cut_mode_name(cert.kind)},
              {"arcs", id_list(cert.arcs, [&](int e) { return g.arc_name(e); })},
              {"capacity", cert.capacity.str()},
              {"blocked_demand", cert.blocked_demand.str()},
              {"blocked", id_list(cert.blocked, [&](int i) { return inst.commodity(i).name; })}};
  if (cert.kind != CutMode::Strong) {
    doc["nodes"] = id_list(cert.nodes, [&](int v) { return g.node_name(v); });
  }
  return doc;
}

Json transshipment_cut_to_json(const Instance& inst, const TransshipmentCut& cut) {
  const Digraph& g = inst.graph();
  return {{"nodes", id_list(cut.nodes, [&](int v) { return g.node_name(v); })},
          {"arcs", id_list(cut.arcs, [&](int e) { return g.arc_name(e); })},
          {"capacity", cut.capacity.str()},
          {"supply", cut.supply.str()}};
}

Json bound_report_to_json(const BoundReport& report) {
  return {{"bound_mode", bound_mode_name(report.mode)},
          {"d_max", report.d_max.str()},
          {"bound", report.bound.str()},
          {"max_arc_deviation", report.max_arc_deviation.str()},
          {"arc_bound", report.arc_bound_ok},
          {"component_bound", report.component_bound_ok},
          {"option_bound", report.option_bound_ok},
          {"support_size", report.support_size}};
}

Json verification_to_json(const VerificationReport& report) {
  return {{"ok", report.ok()},
          {"failures", report.failures},
          {"max_arc_deviation", report.max_arc_deviation.str()},
          {"support_size", report.support_size}};
}

Json probe_to_json(const Instance& inst, const ProbeResult& probe) {
  return {{"verdict", probe_verdict_name(probe.verdict)},
          {"members_found", probe.members_found},
          {"routings_examined", probe.routings_examined},
          {"forced_arcs", id_list(probe.forced_arcs, [&](int e) { return inst.graph().arc_name(e); })},
          {"note", probe.note}};
}

Json almost_to_json(const Instance& inst, const AlmostUnsplittableFlow& almost) {
  Json fractional = Json::array();
  for (std::size_t w = 0; w < almost.fractional.size(); ++w) {
    Json entry = {{"tree_node", w},
                  {"fractional", id_list(almost.fractional[w], [&](int i) { return inst.commodity(i).name; })}};
    if (almost.split[w]) entry["split"] = inst.commodity(*almost.split[w]).name;
    fractional.push_back(std::move(entry));
  }
  return {{"flow", flow_to_json(inst, almost.flow)},
          {"nodes", fractional},
          {"swap_calls", almost.swap_calls},
          {"swap_iterations", almost.swap_iterations}};
}

std::string dump_json(const Json& doc) { return doc.dump(2) + "\n"; }

}  // namespace spunsplit
