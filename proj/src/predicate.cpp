#include "ppv/predicate.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace ppv {

Predicate Predicate::threshold(std::map<std::string, std::int64_t> coeffs, std::int64_t c) {
  Predicate p;
  p.kind = Kind::Threshold;
  p.coeffs = std::move(coeffs);
  p.c = c;
  return p;
}

Predicate Predicate::remainder(std::map<std::string, std::int64_t> coeffs, std::int64_t c,
                               std::int64_t m) {
  if (m < 2) throw std::invalid_argument("remainder modulus must be at least 2");
  Predicate p;
  p.kind = Kind::Remainder;
  p.coeffs = std::move(coeffs);
  p.c = c;
  p.m = m;
  return p;
}

Predicate Predicate::negation(Predicate a) {
  Predicate p;
  p.kind = Kind::Not;
  p.operands.push_back(std::move(a));
  return p;
}

Predicate Predicate::conjunction(Predicate a, Predicate b) {
  Predicate p;
  p.kind = Kind::And;
  p.operands.push_back(std::move(a));
  p.operands.push_back(std::move(b));
  return p;
}

Predicate Predicate::disjunction(Predicate a, Predicate b) {
  Predicate p = conjunction(std::move(a), std::move(b));
  p.kind = Kind::Or;
  return p;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

namespace {

__int128 weighted_sum(const Predicate& pd, const Protocol& p, const InputAssignment& x) {
  __int128 sum = 0;
  for (const auto& [sym, a] : pd.coeffs)
    if (auto s = p.find_symbol(sym)) sum += static_cast<__int128>(a) * x.counts.at(idx(*s));
  return sum;
}

void collect(const Predicate& pd, std::set<std::string>& out) {
  for (const auto& [s, a] : pd.coeffs) out.insert(s);
  for (const auto& o : pd.operands) collect(o, out);
}

std::string coeff_text(const Predicate& pd) {
  std::string s;
  bool first = true;
  for (const auto& [sym, a] : pd.coeffs) {
    if (!first) s += a < 0 ? " - " : " + ";
    else if (a < 0) s += "-";
    std::int64_t mag = a < 0 ? -a : a;
    s += (mag == 1 ? "" : std::to_string(mag) + "*") + sym;
    first = false;
  }
  return first ? "0" : s;
}

}  // namespace

bool eval_predicate(const Predicate& pd, const Protocol& p, const InputAssignment& x) {
  switch (pd.kind) {
    case Predicate::Kind::Threshold:
      return weighted_sum(pd, p, x) < pd.c;
    case Predicate::Kind::Remainder: {
      __int128 r = weighted_sum(pd, p, x) % pd.m;
      if (r < 0) r += pd.m;
      return r == floor_mod(pd.c, pd.m);
    }
    case Predicate::Kind::Not:
      return !eval_predicate(pd.operands.at(0), p, x);
    case Predicate::Kind::And:
      return eval_predicate(pd.operands.at(0), p, x) && eval_predicate(pd.operands.at(1), p, x);
    case Predicate::Kind::Or:
      return eval_predicate(pd.operands.at(0), p, x) || eval_predicate(pd.operands.at(1), p, x);
  }
  return false;
}

std::vector<std::string> predicate_symbols(const Predicate& pd) {
  std::set<std::string> s;
  collect(pd, s);
  return {s.begin(), s.end()};
}

std::string to_string(const Predicate& pd) {
  switch (pd.kind) {
    case Predicate::Kind::Threshold:
      return coeff_text(pd) + " < " + std::to_string(pd.c);
    case Predicate::Kind::Remainder:
      return coeff_text(pd) + " = " + std::to_string(pd.c) + " (mod " + std::to_string(pd.m) + ")";
    case Predicate::Kind::Not:
      return "not (" + to_string(pd.operands.at(0)) + ")";
    case Predicate::Kind::And:
      return "(" + to_string(pd.operands.at(0)) + ") and (" + to_string(pd.operands.at(1)) + ")";
    case Predicate::Kind::Or:
      return "(" + to_string(pd.operands.at(0)) + ") or (" + to_string(pd.operands.at(1)) + ")";
  }
  return {};
}

}  // namespace ppv
