#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "spunsplit/align.hpp"
#include "spunsplit/almost.hpp"
#include "spunsplit/cuts.hpp"
#include "spunsplit/decompose.hpp"
#include "spunsplit/instance.hpp"
#include "spunsplit/oracle.hpp"

namespace spunsplit {

using Json = nlohmann::json;

// Malformed or inconsistent input files.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InstanceDocument {
  Instance instance;
  std::optional<Multiflow> flow;
};

// {nodes, terminals, arcs, commodities, flow?}; rationals are strings.
// Unknown keys are rejected. Throws InputError.
InstanceDocument parse_instance(const Json& doc);
InstanceDocument read_instance_file(const std::filesystem::path& path);
Json read_json_file(const std::filesystem::path& path);

Json instance_to_json(const Instance& inst, const Multiflow* flow = nullptr);
// {arc id: {commodity id: value}}, zero entries omitted.
Json flow_to_json(const Instance& inst, const Multiflow& flow);
Multiflow flow_from_json(const Instance& inst, const Json& doc);

// FNV-1a (64 bit) of "arc=total;" over arcs in id order, where total is the
// weighted arc total of the decomposition.
std::string reconstruction_hash(const Instance& inst, const ConvexDecomposition& decomposition);

Json decomposition_to_json(const Instance& inst, const ConvexDecomposition& decomposition,
                           BoundMode mode);
// Checks the shape; the metadata hash is returned for comparison.
ConvexDecomposition decomposition_from_json(const Instance& inst, const Json& doc,
                                            std::string* stored_hash = nullptr,
                                            std::optional<BoundMode>* stored_mode = nullptr);

Json sp_tree_to_json(const Instance& inst);
Json witness_to_json(const Digraph& g, const NotSeriesParallel& failure);
Json certificate_to_json(const Instance& inst, const CutCertificate& cert);
Json transshipment_cut_to_json(const Instance& inst, const TransshipmentCut& cut);
Json bound_report_to_json(const BoundReport& report);
Json verification_to_json(const VerificationReport& report);
Json probe_to_json(const Instance& inst, const ProbeResult& probe);
Json almost_to_json(const Instance& inst, const AlmostUnsplittableFlow& almost);

// Canonical text: sorted keys, two-space indent, trailing newline.
std::string dump_json(const Json& doc);

}  // namespace spunsplit
