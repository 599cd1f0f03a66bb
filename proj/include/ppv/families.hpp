#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppv/predicate.hpp"
#include "ppv/protocol.hpp"

namespace ppv {

/// Threshold predicate sum(a_i x_i) < c.
struct ThresholdSpec {
  std::vector<std::int64_t> coeffs;
  std::int64_t c = 1;
  /// One input symbol per value in [-v_max, v_max] instead of one per coefficient.
  bool benchmark_mode = false;

  std::int64_t vmax() const;
  /// Benchmark instance with the given v_max (must exceed |c|).
  static ThresholdSpec benchmark(std::int64_t vmax, std::int64_t c = 1);
};

/// Remainder predicate sum(a_i x_i) = c (mod m).
struct RemainderSpec {
  std::vector<std::int64_t> coeffs;
  std::int64_t c = 1;
  std::int64_t m = 2;
  /// One input symbol per residue in [0, m).
  bool benchmark_mode = false;

  static RemainderSpec benchmark(std::int64_t m, std::int64_t c = 1);
};

class AlphabetMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Protocol gen_threshold(const ThresholdSpec& spec);
Protocol gen_remainder(const RemainderSpec& spec);
Protocol gen_majority();
Protocol gen_broadcast();
Protocol gen_flock_cms(std::int64_t c);
Protocol gen_flock_guidelines(std::int64_t c);

/// Flips the output of every state.
Protocol negate(const Protocol& p);
/// Asynchronous product computing the conjunction. Both protocols must share
/// their input alphabet.
Protocol conjoin(const Protocol& p1, const Protocol& p2);

/// Input symbol names used by the generators.
std::vector<std::string> threshold_symbols(const ThresholdSpec& spec);
std::vector<std::string> remainder_symbols(const RemainderSpec& spec);

Predicate threshold_predicate(const ThresholdSpec& spec);
Predicate remainder_predicate(const RemainderSpec& spec);
Predicate majority_predicate();
Predicate broadcast_predicate();
/// x >= c over the single input symbol x.
Predicate flock_predicate(std::int64_t c);

struct FamilyInstance {
  std::string label;
  Protocol protocol;
  Predicate predicate;
};

/// Names accepted by make_family.
const std::vector<std::string>& family_names();

/// Builds a named family instance. `param` is v_max for threshold, m for
/// remainder and c for both flock variants; ignored for majority and
/// broadcast. `c` is the secondary threshold/remainder constant.
FamilyInstance make_family(const std::string& name, std::int64_t param = 0, std::int64_t c = 1);

}  // namespace ppv
