#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ppv/consensus.hpp"
#include "ppv/correctness.hpp"
#include "ppv/layered.hpp"
#include "ppv/predicate.hpp"
#include "ppv/protocol.hpp"

namespace ppv {

/// Outcome of one CLI verification run together with its certificates.
struct Verdict {
  enum class Kind { Holds, Fails, Unknown };
  Kind kind = Kind::Unknown;
  std::string command;
  /// "LayeredTermination", "StrongConsensus" or "Correctness" when failing.
  std::vector<std::string> failing;
  std::optional<LayeredResult> layered;
  std::optional<ConsensusVerdict> consensus;
  std::optional<CorrectnessResult> correctness;
  std::optional<Predicate> predicate;
  double elapsed_seconds = 0;
};

const char* to_string(Verdict::Kind k);

/// Exit status of the command line tool for a verdict kind.
int exit_code(Verdict::Kind k);

/// Combines sub-results: any failure fails, otherwise any unknown is unknown.
Verdict::Kind combine(const Verdict& v);

std::string serialize_verdict(const Protocol& p, const Verdict& v);
/// Throws ParseError on malformed documents or references to transitions
/// and states that p does not have.
Verdict parse_verdict(const Protocol& p, std::string_view text);

struct ReplayReport {
  bool ok = true;
  std::vector<std::string> lines;
};

/// Re-checks every certificate of v against p with the independent checkers.
ReplayReport replay_verdict(const Protocol& p, const Verdict& v, const smt::SolverOptions& opts);

}  // namespace ppv
