#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ppv/protocol.hpp"

namespace ppv {

/// Boolean combination of threshold and remainder atoms over input symbols.
///   threshold:  sum(coeffs[s] * X(s)) < c
///   remainder:  sum(coeffs[s] * X(s)) = c (mod m)
struct Predicate {
  enum class Kind { Threshold, Remainder, Not, And, Or };

  Kind kind = Kind::Threshold;
  std::map<std::string, std::int64_t> coeffs;
  std::int64_t c = 0;
  std::int64_t m = 0;
  std::vector<Predicate> operands;

  static Predicate threshold(std::map<std::string, std::int64_t> coeffs, std::int64_t c);
  static Predicate remainder(std::map<std::string, std::int64_t> coeffs, std::int64_t c,
                             std::int64_t m);
  static Predicate negation(Predicate p);
  static Predicate conjunction(Predicate a, Predicate b);
  static Predicate disjunction(Predicate a, Predicate b);

  friend bool operator==(const Predicate&, const Predicate&) = default;
};

/// Mathematical remainder in [0, m).
std::int64_t floor_mod(std::int64_t a, std::int64_t m);

/// Direct arithmetic evaluation on a concrete input. Symbols absent from the
/// protocol alphabet count as zero.
bool eval_predicate(const Predicate& pd, const Protocol& p, const InputAssignment& x);

/// Symbols mentioned in coefficients anywhere in the tree.
std::vector<std::string> predicate_symbols(const Predicate& pd);

std::string to_string(const Predicate& pd);

}  // namespace ppv
