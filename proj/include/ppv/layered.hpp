#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ppv/protocol.hpp"
#include "ppv/smt.hpp"
#include "ppv/structural.hpp"

namespace ppv {

/// Ordered partition (T_1, ..., T_n) of Protocol::transitions().
struct OrderedPartition {
  std::vector<TransitionSet> layers;
  friend bool operator==(const OrderedPartition&, const OrderedPartition&) = default;
};

/// Throws std::invalid_argument unless the layers are nonempty, disjoint and
/// cover every transition of p. An empty single layer is accepted for a
/// protocol without transitions.
void validate_partition(const Protocol& p, const OrderedPartition& op);

struct LayeredOptions {
  smt::SolverOptions solver;
  /// Largest number of layers tried; defaults to the non-silent count.
  std::optional<std::size_t> k_max;
};

struct LayeredResult {
  enum class Kind { Found, None, Unknown };
  Kind kind = Kind::Unknown;
  OrderedPartition partition;
  /// ranking[i][q]: weight of state q for layer i.
  std::vector<std::vector<std::uint64_t>> ranking;
  /// Largest k for which a system was solved.
  std::size_t k_tried = 0;
  smt::Stats stats;
  std::string reason;
};

const char* to_string(LayeredResult::Kind k);

/// U'(t, u): non-silent u' with pre(u') <= pre(t) + (pre(u) - post(t)).
TransitionSet reenablers(const Protocol& p, TransitionId t, TransitionId u);

/// The layer-assignment system for k layers, with y_i and b variables.
smt::Problem layered_system(const Protocol& p, std::size_t k);

LayeredResult find_layered_termination(const Protocol& p, const LayeredOptions& opts);

/// True iff every non-silent layer-i transition strictly decreases y_i.
bool check_ranking(const Protocol& p, const OrderedPartition& op, const std::vector<std::vector<std::uint64_t>>& ranking);

struct PartitionCheck {
  /// 1-based failing layer, 0 when ok.
  std::size_t layer = 0;
  /// 'a' (silent-free cycle inside the layer) or 'b' (re-enabling).
  char condition = 0;
  std::vector<smt::Rational> cycle;  // over the layer's non-silent transitions
  std::optional<DeadnessViolation> dead;
  bool ok() const { return layer == 0; }
};

PartitionCheck verify_partition(const Protocol& p, const OrderedPartition& op, const smt::SolverOptions& opts);

}  // namespace ppv
