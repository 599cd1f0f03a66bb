#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ppv/protocol.hpp"
#include "ppv/smt.hpp"

namespace ppv {

/// Sorted, duplicate-free subsets.
using StateSet = std::vector<State>;
using TransitionSet = std::vector<TransitionId>;

/// Occurrence count per transition, dense over Protocol::transitions().
struct FlowAssignment {
  std::vector<std::uint64_t> x;

  FlowAssignment() = default;
  explicit FlowAssignment(std::size_t n) : x(n, 0) {}
  std::uint64_t operator[](TransitionId t) const { return x[idx(t)]; }
  std::uint64_t& operator[](TransitionId t) { return x[idx(t)]; }
  TransitionSet support() const;
  friend bool operator==(const FlowAssignment&, const FlowAssignment&) = default;
};

/// States q with C(q) = 0.
StateSet zero_set(const Protocol& p, const Configuration& c);
/// Transitions producing into P (post(t) meets P).
TransitionSet producers(const Protocol& p, const StateSet& P);
/// Transitions consuming from P (pre(t) meets P).
TransitionSet consumers(const Protocol& p, const StateSet& P);
TransitionSet all_transitions(const Protocol& p);

bool check_flow(const Protocol& p, const Configuration& c, const Configuration& c2, const FlowAssignment& x);

bool is_trap(const Protocol& p, const StateSet& P, const TransitionSet& U);
bool is_siphon(const Protocol& p, const StateSet& P, const TransitionSet& U);

/// Largest U-trap inside Z. Transitions are scanned in the order given.
StateSet maximal_trap_in_zero(const Protocol& p, const TransitionSet& U, const StateSet& Z);
StateSet maximal_siphon_in_zero(const Protocol& p, const TransitionSet& U, const StateSet& Z);

/// Some t in U produces into the trap P, resp. consumes from the siphon P.
bool trap_violated(const Protocol& p, const StateSet& P, const TransitionSet& U);
bool siphon_violated(const Protocol& p, const StateSet& P, const TransitionSet& U);

/// Shrinks a violated U-trap (U-siphon) P to an inclusion-minimal violated
/// U-trap (U-siphon) inside it.
StateSet minimal_violated_trap(const Protocol& p, const TransitionSet& U, StateSet P);
StateSet minimal_violated_siphon(const Protocol& p, const TransitionSet& U, StateSet P);

struct ReachabilityCheck {
  /// 0 when potentially reachable, else 'a', 'b' or 'c'.
  char failed = 0;
  /// The offending trap (b) or siphon (c).
  StateSet witness;
  bool ok() const { return failed == 0; }
};

/// Is c2 potentially reachable from c through x?
ReachabilityCheck check_potential_reachability(const Protocol& p, const Configuration& c, const Configuration& c2,
                                               const FlowAssignment& x);

/// Nonzero x >= 0 over U with zero net effect, normalized to sum(x) >= 1.
/// U must contain only non-silent transitions.
std::optional<std::vector<smt::Rational>> has_nonsilent_invariant_cycle(const Protocol& p, const TransitionSet& U,
                                                                         const smt::SolverOptions& opts);

/// A pair (s, u) showing that firing s can enable the non-silent u from a
/// configuration where no non-silent transition of U is enabled.
struct DeadnessViolation {
  TransitionId s{};
  TransitionId u{};
  friend bool operator==(const DeadnessViolation&, const DeadnessViolation&) = default;
};

std::optional<DeadnessViolation> u_dead_violation(const Protocol& p, const TransitionSet& S, const TransitionSet& U);
bool is_U_dead(const Protocol& p, const TransitionSet& S, const TransitionSet& U);

}  // namespace ppv
