#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ppv/consensus.hpp"
#include "ppv/predicate.hpp"
#include "ppv/protocol.hpp"
#include "ppv/smt.hpp"

namespace ppv {

/// phi over per-symbol input counts. Remainder atoms declare an integer
/// quotient and a bounded residue each; `side` collects their defining
/// equalities, which must be asserted alongside `phi`.
struct PredicateEncoding {
  smt::Formula phi;
  smt::Formula side;
};

/// x[s] is the count variable of alphabet symbol s. Symbols missing from the
/// alphabet contribute zero.
PredicateEncoding encode_predicate(smt::Session& s, const Protocol& p, const Predicate& pd,
                                   const std::vector<smt::Var>& x);

struct CorrectnessResult {
  enum class Kind { Holds, Fails, Unknown };
  Kind kind = Kind::Unknown;
  // Counterexample on Fails: input X, initial I(X), terminal c reached
  // through x, and the predicate value the protocol should have produced.
  InputAssignment input;
  Configuration c0, c;
  FlowAssignment x;
  bool expected = false;
  std::vector<StateSet> traps;
  std::vector<StateSet> siphons;
  std::size_t iterations = 0;
  smt::Stats stats;
  std::string reason;
};

const char* to_string(CorrectnessResult::Kind k);

CorrectnessResult check_correctness(const Protocol& p, const Predicate& pd, const ConsensusOptions& opts);

/// The counterexample is well formed: c0 = I(X), c terminal and potentially
/// reachable through x, and c populates a state whose output differs from
/// phi(X).
bool audit_correctness(const Protocol& p, const Predicate& pd, const CorrectnessResult& r);

}  // namespace ppv
