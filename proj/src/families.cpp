#include "ppv/families.hpp"

#include <algorithm>
#include <set>

namespace ppv {

namespace {

using Raw = ProtocolSpec::RawTransition;

void add_transition(ProtocolSpec& spec, std::set<std::pair<std::multiset<std::string>, std::multiset<std::string>>>& seen,
                    std::string a, std::string b, std::string a2, std::string b2,
                    std::optional<std::string> name = std::nullopt) {
  std::multiset<std::string> pre{a, b}, post{a2, b2};
  if (pre == post) return;  // silent instances stay implicit
  if (!seen.insert({pre, post}).second) return;
  spec.transitions.push_back(Raw{std::move(name), {std::move(a), std::move(b)}, {std::move(a2), std::move(b2)}});
}

std::string threshold_state(int leader, std::int64_t value, int opinion) {
  return "(" + std::to_string(leader) + "," + std::to_string(value) + "," + std::to_string(opinion) + ")";
}

std::string value_symbol(std::int64_t v) { return "x[" + std::to_string(v) + "]"; }

}  // namespace

std::int64_t ThresholdSpec::vmax() const {
  std::int64_t v = (c < 0 ? -c : c) + 1;
  for (auto a : coeffs) v = std::max(v, a < 0 ? -a : a);
  return v;
}

ThresholdSpec ThresholdSpec::benchmark(std::int64_t vmax, std::int64_t c) {
  if (vmax <= (c < 0 ? -c : c)) throw std::invalid_argument("v_max must exceed |c|");
  return ThresholdSpec{{vmax}, c, true};
}

RemainderSpec RemainderSpec::benchmark(std::int64_t m, std::int64_t c) {
  RemainderSpec s;
  s.m = m;
  s.c = c;
  s.benchmark_mode = true;
  return s;
}

std::vector<std::string> threshold_symbols(const ThresholdSpec& spec) {
  std::vector<std::string> out;
  if (spec.benchmark_mode) {
    const auto v = spec.vmax();
    for (std::int64_t a = -v; a <= v; ++a) out.push_back(value_symbol(a));
  } else {
    for (std::size_t i = 0; i < spec.coeffs.size(); ++i) out.push_back("x" + std::to_string(i + 1));
  }
  return out;
}

Predicate threshold_predicate(const ThresholdSpec& spec) {
  std::map<std::string, std::int64_t> coeffs;
  auto syms = threshold_symbols(spec);
  const auto v = spec.vmax();
  for (std::size_t i = 0; i < syms.size(); ++i)
    coeffs[syms[i]] = spec.benchmark_mode ? -v + std::int64_t(i) : spec.coeffs[i];
  return Predicate::threshold(std::move(coeffs), spec.c);
}

Protocol gen_threshold(const ThresholdSpec& spec) {
  if (!spec.benchmark_mode && spec.coeffs.empty())
    throw std::invalid_argument("threshold protocol needs at least one coefficient");
  const std::int64_t v = spec.vmax();
  const std::int64_t c = spec.c;
  auto f = [v](std::int64_t m, std::int64_t n) { return std::max(-v, std::min(v, m + n)); };

  ProtocolSpec ps;
  for (int l = 0; l <= 1; ++l)
    for (std::int64_t n = -v; n <= v; ++n)
      for (int o = 0; o <= 1; ++o) {
        ps.states.push_back(threshold_state(l, n, o));
        ps.output[ps.states.back()] = o;
      }

  std::set<std::pair<std::multiset<std::string>, std::multiset<std::string>>> seen;
  for (std::int64_t n = -v; n <= v; ++n)
    for (int o = 0; o <= 1; ++o)
      for (int l = 0; l <= 1; ++l)
        for (std::int64_t n2 = -v; n2 <= v; ++n2)
          for (int o2 = 0; o2 <= 1; ++o2) {
            const auto fv = f(n, n2);
            const auto gv = (n + n2) - fv;
            const int bv = fv < c ? 1 : 0;
            add_transition(ps, seen, threshold_state(1, n, o), threshold_state(l, n2, o2),
                           threshold_state(1, fv, bv), threshold_state(0, gv, bv));
          }

  auto pred = threshold_predicate(spec);
  for (const auto& [sym, a] : pred.coeffs) {
    ps.alphabet.push_back(sym);
    ps.input[sym] = threshold_state(1, a, a < c ? 1 : 0);
  }
  return normalize(ps);
}

std::vector<std::string> remainder_symbols(const RemainderSpec& spec) {
  std::vector<std::string> out;
  if (spec.benchmark_mode) {
    for (std::int64_t r = 0; r < spec.m; ++r) out.push_back("x[" + std::to_string(r) + "]");
  } else {
    for (std::size_t i = 0; i < spec.coeffs.size(); ++i) out.push_back("x" + std::to_string(i + 1));
  }
  return out;
}

Predicate remainder_predicate(const RemainderSpec& spec) {
  std::map<std::string, std::int64_t> coeffs;
  auto syms = remainder_symbols(spec);
  for (std::size_t i = 0; i < syms.size(); ++i)
    coeffs[syms[i]] = spec.benchmark_mode ? std::int64_t(i) : spec.coeffs[i];
  return Predicate::remainder(std::move(coeffs), spec.c, spec.m);
}

Protocol gen_remainder(const RemainderSpec& spec) {
  if (spec.m < 2) throw std::invalid_argument("remainder modulus must be at least 2");
  if (!spec.benchmark_mode && spec.coeffs.empty())
    throw std::invalid_argument("remainder protocol needs at least one coefficient");
  const std::int64_t m = spec.m;
  const std::int64_t c = floor_mod(spec.c, m);
  auto num = [](std::int64_t n) { return std::to_string(n); };
  auto boolean = [](bool b) { return std::string(b ? "true" : "false"); };

  ProtocolSpec ps;
  for (std::int64_t n = 0; n < m; ++n) {
    ps.states.push_back(num(n));
    ps.output[num(n)] = n == c ? 1 : 0;
  }
  ps.states.push_back("true");
  ps.states.push_back("false");
  ps.output["true"] = 1;
  ps.output["false"] = 0;

  std::set<std::pair<std::multiset<std::string>, std::multiset<std::string>>> seen;
  for (std::int64_t n = 0; n < m; ++n)
    for (std::int64_t n2 = 0; n2 < m; ++n2) {
      const auto s = (n + n2) % m;
      add_transition(ps, seen, num(n), num(n2), num(s), boolean(s == c));
    }
  for (std::int64_t n = 0; n < m; ++n)
    for (bool b : {false, true}) add_transition(ps, seen, num(n), boolean(b), num(n), boolean(n == c));

  auto pred = remainder_predicate(spec);
  for (const auto& [sym, a] : pred.coeffs) {
    ps.alphabet.push_back(sym);
    ps.input[sym] = num(floor_mod(a, m));
  }
  return normalize(ps);
}

Protocol gen_majority() {
  ProtocolSpec ps;
  ps.states = {"A", "B", "a", "b"};
  ps.transitions = {
      Raw{"t_AB", {"A", "B"}, {"a", "b"}},
      Raw{"t_Ab", {"A", "b"}, {"A", "a"}},
      Raw{"t_Ba", {"B", "a"}, {"B", "b"}},
      Raw{"t_ba", {"b", "a"}, {"b", "b"}},
  };
  ps.alphabet = {"A", "B"};
  ps.input = {{"A", "A"}, {"B", "B"}};
  ps.output = {{"A", 0}, {"B", 1}, {"a", 0}, {"b", 1}};
  return normalize(ps);
}

Predicate majority_predicate() {
  // B >= A, written as not(B - A < 0)
  return Predicate::negation(Predicate::threshold({{"A", -1}, {"B", 1}}, 0));
}

Protocol gen_broadcast() {
  ProtocolSpec ps;
  ps.states = {"top", "bot"};
  ps.transitions = {Raw{"t_spread", {"top", "bot"}, {"top", "top"}}};
  ps.alphabet = {"top", "bot"};
  ps.input = {{"top", "top"}, {"bot", "bot"}};
  ps.output = {{"top", 1}, {"bot", 0}};
  return normalize(ps);
}

Predicate broadcast_predicate() { return Predicate::threshold({{"top", -1}}, 0); }

Protocol gen_flock_cms(std::int64_t c) {
  if (c < 1) throw std::invalid_argument("flock-of-birds threshold must be at least 1");
  ProtocolSpec ps;
  for (std::int64_t i = 0; i <= c; ++i) {
    ps.states.push_back(std::to_string(i));
    ps.output[std::to_string(i)] = i == c ? 1 : 0;
  }
  auto s = [](std::int64_t i) { return std::to_string(i); };
  std::set<std::pair<std::multiset<std::string>, std::multiset<std::string>>> seen;
  for (std::int64_t i = 1; i <= c; ++i)
    for (std::int64_t j = i; j <= c; ++j) {
      if (i + j < c)
        add_transition(ps, seen, s(i), s(j), s(i + j), s(0));
      else if (!(i == c && j == c))
        add_transition(ps, seen, s(i), s(j), s(c), s(c));
    }
  add_transition(ps, seen, s(0), s(c), s(c), s(c));
  ps.alphabet = {"x"};
  ps.input = {{"x", "1"}};
  return normalize(ps);
}

Protocol gen_flock_guidelines(std::int64_t c) {
  if (c < 1) throw std::invalid_argument("flock-of-birds threshold must be at least 1");
  ProtocolSpec ps;
  for (std::int64_t i = 0; i <= c; ++i) {
    ps.states.push_back(std::to_string(i));
    ps.output[std::to_string(i)] = i == c ? 1 : 0;
  }
  auto s = [](std::int64_t i) { return std::to_string(i); };
  std::set<std::pair<std::multiset<std::string>, std::multiset<std::string>>> seen;
  for (std::int64_t i = 1; i < c; ++i) add_transition(ps, seen, s(i), s(i), s(i + 1), s(i));
  for (std::int64_t j = 0; j < c; ++j) add_transition(ps, seen, s(c), s(j), s(c), s(c));
  ps.alphabet = {"x"};
  ps.input = {{"x", "1"}};
  return normalize(ps);
}

Predicate flock_predicate(std::int64_t c) { return Predicate::negation(Predicate::threshold({{"x", 1}}, c)); }

Protocol negate(const Protocol& p) {
  auto spec = p.to_spec();
  for (auto& [q, o] : spec.output) o = 1 - o;
  return normalize(spec);
}

Protocol conjoin(const Protocol& p1, const Protocol& p2) {
  if (p1.alphabet() != p2.alphabet())
    throw AlphabetMismatch("conjunction requires identical input alphabets");
  auto pair_name = [&](std::size_t a, std::size_t b) {
    return "(" + p1.state_names()[a] + "|" + p2.state_names()[b] + ")";
  };
  ProtocolSpec ps;
  for (std::size_t a = 0; a < p1.num_states(); ++a)
    for (std::size_t b = 0; b < p2.num_states(); ++b) {
      ps.states.push_back(pair_name(a, b));
      ps.output[ps.states.back()] = p1.output(State(a)) && p2.output(State(b)) ? 1 : 0;
    }
  std::set<std::pair<std::multiset<std::string>, std::multiset<std::string>>> seen;
  // t lifted by (r, r') on the second component
  for (const auto& t : p1.transitions()) {
    if (t.silent()) continue;
    for (std::size_t r = 0; r < p2.num_states(); ++r)
      for (std::size_t r2 = 0; r2 < p2.num_states(); ++r2)
        add_transition(ps, seen, pair_name(idx(t.p), r), pair_name(idx(t.q), r2), pair_name(idx(t.p2), r),
                       pair_name(idx(t.q2), r2));
  }
  // (r, r') lifted by t on the first component
  for (const auto& t : p2.transitions()) {
    if (t.silent()) continue;
    for (std::size_t r = 0; r < p1.num_states(); ++r)
      for (std::size_t r2 = 0; r2 < p1.num_states(); ++r2)
        add_transition(ps, seen, pair_name(r, idx(t.p)), pair_name(r2, idx(t.q)), pair_name(r, idx(t.p2)),
                       pair_name(r2, idx(t.q2)));
  }
  ps.alphabet = p1.alphabet();
  for (std::size_t s = 0; s < p1.num_symbols(); ++s)
    ps.input[p1.alphabet()[s]] = pair_name(idx(p1.input(Symbol(s))), idx(p2.input(Symbol(s))));
  return normalize(ps);
}

const std::vector<std::string>& family_names() {
  static const std::vector<std::string> names = {"majority", "broadcast", "threshold", "remainder", "flock-cms",
                                                 "flock-guidelines"};
  return names;
}

FamilyInstance make_family(const std::string& name, std::int64_t param, std::int64_t c) {
  if (name == "majority") return {"majority", gen_majority(), majority_predicate()};
  if (name == "broadcast") return {"broadcast", gen_broadcast(), broadcast_predicate()};
  if (name == "threshold") {
    auto spec = ThresholdSpec::benchmark(param, c);
    return {"threshold(vmax=" + std::to_string(param) + ",c=" + std::to_string(c) + ")", gen_threshold(spec),
            threshold_predicate(spec)};
  }
  if (name == "remainder") {
    auto spec = RemainderSpec::benchmark(param, c);
    return {"remainder(m=" + std::to_string(param) + ",c=" + std::to_string(c) + ")", gen_remainder(spec),
            remainder_predicate(spec)};
  }
  if (name == "flock-cms")
    return {"flock-cms(c=" + std::to_string(param) + ")", gen_flock_cms(param), flock_predicate(param)};
  if (name == "flock-guidelines")
    return {"flock-guidelines(c=" + std::to_string(param) + ")", gen_flock_guidelines(param),
            flock_predicate(param)};
  throw std::invalid_argument("unknown protocol family '" + name + "'");
}

}  // namespace ppv
