#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spunsplit/instance.hpp"

namespace spunsplit {

enum class CutMode { Classical, Strengthened, Strong };

std::string cut_mode_name(CutMode mode);
CutMode parse_cut_mode(std::string_view text);

struct CutCertificate {
  CutMode kind = CutMode::Classical;
  // Node set X (classical, strengthened); empty for strong mode.
  std::vector<NodeId> nodes;
  // delta+(X), or F for strong mode.
  std::vector<ArcId> arcs;
  Rational capacity;
  Rational blocked_demand;
  std::vector<CommodityId> blocked;
};

struct CutLimits {
  int max_nodes = 22;
  int max_arcs = 20;
};

// Commodities without an s_i-t_i path once the arcs in `removed` are deleted.
std::vector<CommodityId> blocked_commodities(const Instance& inst, const std::vector<ArcId>& removed);

// Enumerates node sets (or arc sets in strong mode) in Gray-code order and
// returns the violation that is smallest by size, then by sorted ids.
// Throws SizeError when the instance exceeds the limits.
std::optional<CutCertificate> check_cut(const Instance& inst, CutMode mode, CutLimits limits = {});

// Recomputes capacity and blocked demand from the witness alone; empty when
// the certificate is consistent and shows a violation.
std::string recheck_certificate(const Instance& inst, const CutCertificate& cert);

}  // namespace spunsplit
