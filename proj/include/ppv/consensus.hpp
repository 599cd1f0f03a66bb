#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ppv/protocol.hpp"
#include "ppv/smt.hpp"
#include "ppv/structural.hpp"

namespace ppv {

struct ConsensusOptions {
  smt::SolverOptions solver;
  /// Stop with an unknown verdict after this many refinement rounds.
  std::optional<std::size_t> max_refinements;
};

/// Side conditions and reachability checks of a counterexample, each
/// recomputed from scratch.
struct CounterexampleAudit {
  bool initial = false;
  bool terminal1 = false;
  bool terminal2 = false;
  bool true1 = false;
  bool false2 = false;
  ReachabilityCheck reach1;
  ReachabilityCheck reach2;
  bool ok() const { return initial && terminal1 && terminal2 && true1 && false2 && reach1.ok() && reach2.ok(); }
};

struct ConsensusVerdict {
  enum class Kind { Holds, Fails, Unknown };
  Kind kind = Kind::Unknown;
  // Counterexample on Fails: C0 reaches the 1-output C1 and the 0-output C2.
  Configuration c0, c1, c2;
  FlowAssignment x1, x2;
  CounterexampleAudit audit;
  // Refinement sets accumulated so far.
  std::vector<StateSet> traps;
  std::vector<StateSet> siphons;
  /// Number of solver calls.
  std::size_t iterations = 0;
  smt::Stats stats;
  std::string reason;
};

const char* to_string(ConsensusVerdict::Kind k);

/// c is a valid initial configuration: at least two agents, all in I(Sigma).
bool is_initial(const Protocol& p, const Configuration& c);

ConsensusVerdict check_strong_consensus(const Protocol& p, const ConsensusOptions& opts);

CounterexampleAudit audit(const Protocol& p, const Configuration& c0, const Configuration& c1, const Configuration& c2,
                          const FlowAssignment& x1, const FlowAssignment& x2);
/// True iff v is a Fails verdict whose certificate passes every check.
bool audit_counterexample(const Protocol& p, const ConsensusVerdict& v);

namespace detail {

/// Variables for one configuration and one flow vector.
struct ConfigVars {
  std::vector<smt::Var> c;  // per state
};
struct FlowVars {
  std::vector<std::optional<smt::Var>> x;  // per transition; none for silent ones
};

ConfigVars declare_config(smt::Session& s, const Protocol& p, const std::string& prefix);
FlowVars declare_flow(smt::Session& s, const Protocol& p, const std::string& prefix);

smt::LinTerm count(const ConfigVars& c, const StateSet& P);
smt::LinTerm flow_sum(const FlowVars& x, const TransitionSet& ts);

smt::Formula initial(const Protocol& p, const ConfigVars& c);
smt::Formula terminal(const Protocol& p, const ConfigVars& c);
/// Some state with output b is populated.
smt::Formula populated(const Protocol& p, const ConfigVars& c, bool b);
smt::Formula flow_equation(const Protocol& p, const ConfigVars& from, const ConfigVars& to, const FlowVars& x);
smt::Formula u_trap(const Protocol& p, const StateSet& R, const ConfigVars& to, const FlowVars& x);
smt::Formula u_siphon(const Protocol& p, const StateSet& S, const ConfigVars& from, const FlowVars& x);

Configuration read_config(const Protocol& p, const smt::Model& m, const ConfigVars& c);
FlowAssignment read_flow(const Protocol& p, const smt::Model& m, const FlowVars& x);

/// Refinement step shared by the consensus and correctness loops: the
/// violated maximal trap in zero(c) and siphon in zero(c0), if any, each
/// followed by a minimal violated set inside it when that one is smaller.
struct Violations {
  std::vector<StateSet> traps;
  std::vector<StateSet> siphons;
  bool empty() const { return traps.empty() && siphons.empty(); }
};
Violations find_violations(const Protocol& p, const Configuration& c0, const Configuration& c, const FlowAssignment& x);

}  // namespace detail

}  // namespace ppv
