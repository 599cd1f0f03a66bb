#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ppv/protocol.hpp"

namespace ppv {

inline constexpr std::size_t kDefaultCap = 200000;

class CapExceeded : public std::runtime_error {
 public:
  explicit CapExceeded(std::size_t cap)
      : std::runtime_error("reachability graph exceeds " + std::to_string(cap) + " configurations"), cap_(cap) {}
  std::size_t cap() const { return cap_; }

 private:
  std::size_t cap_;
};

/// Configurations reachable from a root by non-silent steps. Node 0 is the
/// root; nodes are numbered in BFS order.
struct ReachGraph {
  std::vector<Configuration> nodes;
  std::vector<std::vector<std::uint32_t>> succ;
  /// Bottom strongly connected components, each sorted.
  std::vector<std::vector<std::uint32_t>> bottom;
};

/// Bottom SCCs of an arbitrary graph given by successor lists.
std::vector<std::vector<std::uint32_t>> bottom_sccs(const std::vector<std::vector<std::uint32_t>>& succ);

ReachGraph explore(const Protocol& p, const Configuration& c0, std::size_t cap = kDefaultCap);

struct InputClassification {
  enum class Kind { Stabilizes, NonConsensus, Split };
  Kind kind = Kind::Stabilizes;
  /// Stabilized value; meaningful for Stabilizes only.
  bool value = false;
  /// Every bottom SCC is a single terminal configuration.
  bool silent = false;
  std::size_t nodes = 0;
};

const char* to_string(InputClassification::Kind k);

InputClassification classify_graph(const Protocol& p, const ReachGraph& g);
InputClassification classify_input(const Protocol& p, const InputAssignment& x, std::size_t cap = kDefaultCap);

/// Every input with 2..max_agents agents, by size then lexicographically.
std::vector<InputAssignment> all_inputs(std::size_t num_symbols, std::size_t max_agents);

struct OracleEntry {
  InputAssignment input;
  InputClassification cls;
};

struct OracleReport {
  std::vector<OracleEntry> table;
  /// First input (in table order) that does not stabilize.
  std::optional<InputAssignment> broken;
  bool ok() const { return !broken; }
  /// All inputs classified silent.
  bool silent() const;
};

/// Classifies every input up to max_agents, using up to `jobs` threads.
OracleReport oracle_well_specified(const Protocol& p, std::size_t max_agents, std::size_t cap = kDefaultCap,
                                   std::size_t jobs = 1);

}  // namespace ppv
