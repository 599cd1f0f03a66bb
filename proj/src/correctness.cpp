#include "ppv/correctness.hpp"

#include <algorithm>
#include <stdexcept>

namespace ppv {

namespace {

struct Encoder {
  smt::Session& s;
  const Protocol& p;
  const std::vector<smt::Var>& x;
  std::vector<smt::Formula> side;
  std::size_t aux = 0;

  smt::LinTerm weighted(const std::map<std::string, std::int64_t>& coeffs) const {
    smt::LinTerm t;
    for (const auto& [name, a] : coeffs)
      if (auto sym = p.find_symbol(name)) t.add(x[idx(*sym)], a);
    return t;
  }

  smt::Formula encode(const Predicate& pd) {
    switch (pd.kind) {
      case Predicate::Kind::Threshold:
        return smt::lt(weighted(pd.coeffs), pd.c);
      case Predicate::Kind::Remainder: {
        auto n = std::to_string(aux++);
        smt::Var k = s.declare("k_a" + n, smt::Sort::Int);
        smt::Var r = s.declare("r_a" + n, smt::Sort::Nat);
        side.push_back(smt::eq(weighted(pd.coeffs), pd.m * smt::LinTerm(k) + smt::LinTerm(r)));
        side.push_back(smt::lt(r, pd.m));
        return smt::eq(r, floor_mod(pd.c, pd.m));
      }
      case Predicate::Kind::Not:
        return smt::Formula::negation(encode(pd.operands.at(0)));
      case Predicate::Kind::And:
      case Predicate::Kind::Or: {
        std::vector<smt::Formula> fs;
        for (const auto& o : pd.operands) fs.push_back(encode(o));
        return pd.kind == Predicate::Kind::And ? smt::Formula::conj(std::move(fs)) : smt::Formula::disj(std::move(fs));
      }
    }
    throw std::logic_error("unknown predicate kind");
  }
};

}  // namespace

PredicateEncoding encode_predicate(smt::Session& s, const Protocol& p, const Predicate& pd,
                                   const std::vector<smt::Var>& x) {
  Encoder e{s, p, x, {}, 0};
  PredicateEncoding out;
  out.phi = e.encode(pd);
  out.side = smt::Formula::conj(std::move(e.side));
  return out;
}

const char* to_string(CorrectnessResult::Kind k) {
  switch (k) {
    case CorrectnessResult::Kind::Holds: return "holds";
    case CorrectnessResult::Kind::Fails: return "fails";
    case CorrectnessResult::Kind::Unknown: return "unknown";
  }
  return "?";
}

CorrectnessResult check_correctness(const Protocol& p, const Predicate& pd, const ConsensusOptions& opts) {
  using namespace detail;
  CorrectnessResult res;
  smt::SolverOptions so = opts.solver;
  so.dump_tag = "correctness";
  smt::Session s(so, smt::Logic::QF_LIA);

  std::vector<smt::Var> X;
  for (std::size_t i = 0; i < p.num_symbols(); ++i) X.push_back(s.declare("X_s" + std::to_string(i), smt::Sort::Nat));
  ConfigVars c0 = declare_config(s, p, "c0"), c = declare_config(s, p, "c");
  FlowVars x = declare_flow(s, p, "x");

  smt::LinTerm total;
  for (auto v : X) total += v;
  s.add(smt::ge(total, 2));
  for (std::size_t q = 0; q < p.num_states(); ++q) {
    smt::LinTerm in;
    for (std::size_t i = 0; i < p.num_symbols(); ++i)
      if (p.input(Symbol(i)) == State(q)) in += X[i];
    s.add(smt::eq(c0.c[q], in));
  }
  s.add(terminal(p, c));
  s.add(flow_equation(p, c0, c, x));
  auto enc = encode_predicate(s, p, pd, X);
  s.add(enc.side);
  s.add((enc.phi && populated(p, c, false)) || (!enc.phi && populated(p, c, true)));

  std::size_t rounds = 0;
  for (;;) {
    auto r = s.check();
    ++res.iterations;
    res.stats = s.stats();
    if (r.status == smt::Status::Unknown) {
      res.kind = CorrectnessResult::Kind::Unknown;
      res.reason = r.reason;
      return res;
    }
    if (r.status == smt::Status::Unsat) {
      res.kind = CorrectnessResult::Kind::Holds;
      return res;
    }
    const smt::Model& m = *r.model;
    Configuration k0 = read_config(p, m, c0), k = read_config(p, m, c);
    FlowAssignment f = read_flow(p, m, x);
    auto viol = find_violations(p, k0, k, f);
    if (viol.empty()) {
      res.kind = CorrectnessResult::Kind::Fails;
      for (auto v : X) res.input.counts.push_back(m.natural(v));
      res.c0 = k0;
      res.c = k;
      res.x = f;
      res.expected = eval_predicate(pd, p, res.input);
      if (!audit_correctness(p, pd, res)) throw std::logic_error("correctness counterexample fails its own audit");
      return res;
    }
    if (opts.max_refinements && rounds >= *opts.max_refinements) {
      res.kind = CorrectnessResult::Kind::Unknown;
      res.reason = "refinement limit reached";
      return res;
    }
    ++rounds;
    auto fresh = [](const std::vector<StateSet>& acc, const StateSet& P) {
      if (std::find(acc.begin(), acc.end(), P) != acc.end())
        throw std::logic_error("refinement rediscovered a set it already excluded");
    };
    for (const auto& P : viol.traps) {
      fresh(res.traps, P);
      s.add(u_trap(p, P, c, x));
      res.traps.push_back(P);
    }
    for (const auto& S : viol.siphons) {
      fresh(res.siphons, S);
      s.add(u_siphon(p, S, c0, x));
      res.siphons.push_back(S);
    }
    if (smt::satisfies(s.problem(), m)) throw std::logic_error("refinement did not exclude the current model");
  }
}

bool audit_correctness(const Protocol& p, const Predicate& pd, const CorrectnessResult& r) {
  if (r.kind != CorrectnessResult::Kind::Fails) return false;
  if (r.input.counts.size() != p.num_symbols() || r.input.size() < 2) return false;
  if (initialize(p, r.input) != r.c0) return false;
  if (!is_terminal(p, r.c)) return false;
  if (!check_potential_reachability(p, r.c0, r.c, r.x).ok()) return false;
  bool phi = eval_predicate(pd, p, r.input);
  if (phi != r.expected) return false;
  return std::any_of(r.c.entries().begin(), r.c.entries().end(), [&](const auto& e) { return p.output(e.first) != phi; });
}

}  // namespace ppv
