#include "ppv/consensus.hpp"

#include <algorithm>
#include <stdexcept>

namespace ppv {

namespace detail {

ConfigVars declare_config(smt::Session& s, const Protocol& p, const std::string& prefix) {
  ConfigVars v;
  for (std::size_t q = 0; q < p.num_states(); ++q)
    v.c.push_back(s.declare(prefix + "_q" + std::to_string(q), smt::Sort::Nat));
  return v;
}

FlowVars declare_flow(smt::Session& s, const Protocol& p, const std::string& prefix) {
  FlowVars v;
  v.x.resize(p.num_transitions());
  for (TransitionId t : p.nonsilent())
    v.x[idx(t)] = s.declare(prefix + "_t" + std::to_string(idx(t)), smt::Sort::Nat);
  return v;
}

smt::LinTerm count(const ConfigVars& c, const StateSet& P) {
  smt::LinTerm sum;
  for (State q : P) sum += c.c[idx(q)];
  return sum;
}

smt::LinTerm flow_sum(const FlowVars& x, const TransitionSet& ts) {
  smt::LinTerm sum;
  for (TransitionId t : ts)
    if (x.x[idx(t)]) sum += *x.x[idx(t)];
  return sum;
}

smt::Formula initial(const Protocol& p, const ConfigVars& c) {
  auto init = p.initial_states();
  std::vector<smt::Formula> fs{smt::ge(count(c, init), 2)};
  for (std::size_t q = 0; q < p.num_states(); ++q)
    if (!std::binary_search(init.begin(), init.end(), State(q))) fs.push_back(smt::eq(c.c[q], 0));
  return smt::Formula::conj(std::move(fs));
}

smt::Formula terminal(const Protocol& p, const ConfigVars& c) {
  std::vector<smt::Formula> fs;
  for (TransitionId t : p.nonsilent()) {
    Pair pre = p.transition(t).pre();
    if (pre.lo == pre.hi)
      fs.push_back(smt::lt(c.c[idx(pre.lo)], 2));
    else
      fs.push_back(smt::lt(c.c[idx(pre.lo)], 1) || smt::lt(c.c[idx(pre.hi)], 1));
  }
  return smt::Formula::conj(std::move(fs));
}

smt::Formula populated(const Protocol& p, const ConfigVars& c, bool b) {
  StateSet P;
  for (std::size_t q = 0; q < p.num_states(); ++q)
    if (p.output(State(q)) == b) P.push_back(State(q));
  return smt::gt(count(c, P), 0);
}

smt::Formula flow_equation(const Protocol& p, const ConfigVars& from, const ConfigVars& to, const FlowVars& x) {
  std::vector<smt::Formula> fs;
  for (std::size_t q = 0; q < p.num_states(); ++q) {
    smt::LinTerm rhs = from.c[q];
    for (TransitionId t : p.nonsilent())
      if (int e = p.transition(t).effect(State(q))) rhs.add(*x.x[idx(t)], e);
    fs.push_back(smt::eq(to.c[q], rhs));
  }
  return smt::Formula::conj(std::move(fs));
}

namespace {

TransitionSet minus(const TransitionSet& a, const TransitionSet& b) {
  TransitionSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Over naturals, sum(x) > 0 and sum(x) = 0 split into per-transition atoms,
// which the solver shares across all refinement constraints.
smt::Formula some_used(const FlowVars& x, const TransitionSet& ts) {
  std::vector<smt::Formula> fs;
  for (TransitionId t : ts)
    if (x.x[idx(t)]) fs.push_back(smt::ge(*x.x[idx(t)], 1));
  return smt::Formula::disj(std::move(fs));
}

smt::Formula none_used(const FlowVars& x, const TransitionSet& ts) {
  std::vector<smt::Formula> fs;
  for (TransitionId t : ts)
    if (x.x[idx(t)]) fs.push_back(smt::eq(*x.x[idx(t)], 0));
  return smt::Formula::conj(std::move(fs));
}

}  // namespace

smt::Formula u_trap(const Protocol& p, const StateSet& R, const ConfigVars& to, const FlowVars& x) {
  TransitionSet in = producers(p, R), out = consumers(p, R);
  return smt::Formula::implies(some_used(x, in) && none_used(x, minus(out, in)), smt::gt(count(to, R), 0));
}

smt::Formula u_siphon(const Protocol& p, const StateSet& S, const ConfigVars& from, const FlowVars& x) {
  TransitionSet in = producers(p, S), out = consumers(p, S);
  return smt::Formula::implies(some_used(x, out) && none_used(x, minus(in, out)), smt::gt(count(from, S), 0));
}

Configuration read_config(const Protocol& p, const smt::Model& m, const ConfigVars& c) {
  Configuration out;
  for (std::size_t q = 0; q < p.num_states(); ++q)
    if (auto n = m.natural(c.c[q])) out.add(State(q), n);
  return out;
}

FlowAssignment read_flow(const Protocol& p, const smt::Model& m, const FlowVars& x) {
  FlowAssignment out(p.num_transitions());
  for (std::size_t t = 0; t < p.num_transitions(); ++t)
    if (x.x[t]) out.x[t] = m.natural(*x.x[t]);
  return out;
}

Violations find_violations(const Protocol& p, const Configuration& c0, const Configuration& c, const FlowAssignment& x) {
  Violations v;
  TransitionSet U = x.support();
  StateSet trap = maximal_trap_in_zero(p, U, zero_set(p, c));
  if (trap_violated(p, trap, U)) {
    StateSet small = minimal_violated_trap(p, U, trap);
    v.traps.push_back(std::move(trap));
    if (small != v.traps.front()) v.traps.push_back(std::move(small));
  }
  StateSet siphon = maximal_siphon_in_zero(p, U, zero_set(p, c0));
  if (siphon_violated(p, siphon, U)) {
    StateSet small = minimal_violated_siphon(p, U, siphon);
    v.siphons.push_back(std::move(siphon));
    if (small != v.siphons.front()) v.siphons.push_back(std::move(small));
  }
  return v;
}

}  // namespace detail

const char* to_string(ConsensusVerdict::Kind k) {
  switch (k) {
    case ConsensusVerdict::Kind::Holds: return "holds";
    case ConsensusVerdict::Kind::Fails: return "fails";
    case ConsensusVerdict::Kind::Unknown: return "unknown";
  }
  return "?";
}

bool is_initial(const Protocol& p, const Configuration& c) {
  auto init = p.initial_states();
  if (c.size() < 2) return false;
  for (const auto& [q, n] : c.entries())
    if (!std::binary_search(init.begin(), init.end(), q)) return false;
  return true;
}

namespace {

bool some_output(const Protocol& p, const Configuration& c, bool b) {
  return std::any_of(c.entries().begin(), c.entries().end(), [&](const auto& e) { return p.output(e.first) == b; });
}

}  // namespace

CounterexampleAudit audit(const Protocol& p, const Configuration& c0, const Configuration& c1, const Configuration& c2,
                          const FlowAssignment& x1, const FlowAssignment& x2) {
  CounterexampleAudit a;
  a.initial = is_initial(p, c0);
  a.terminal1 = is_terminal(p, c1);
  a.terminal2 = is_terminal(p, c2);
  a.true1 = some_output(p, c1, true);
  a.false2 = some_output(p, c2, false);
  a.reach1 = check_potential_reachability(p, c0, c1, x1);
  a.reach2 = check_potential_reachability(p, c0, c2, x2);
  return a;
}

bool audit_counterexample(const Protocol& p, const ConsensusVerdict& v) {
  return v.kind == ConsensusVerdict::Kind::Fails && audit(p, v.c0, v.c1, v.c2, v.x1, v.x2).ok();
}

ConsensusVerdict check_strong_consensus(const Protocol& p, const ConsensusOptions& opts) {
  using namespace detail;
  ConsensusVerdict v;
  smt::SolverOptions so = opts.solver;
  so.dump_tag = "consensus";
  smt::Session s(so, smt::Logic::QF_LIA);
  ConfigVars c0 = declare_config(s, p, "c0"), c1 = declare_config(s, p, "c1"), c2 = declare_config(s, p, "c2");
  FlowVars x1 = declare_flow(s, p, "x1"), x2 = declare_flow(s, p, "x2");
  s.add(initial(p, c0));
  s.add(terminal(p, c1));
  s.add(terminal(p, c2));
  s.add(populated(p, c1, true));
  s.add(populated(p, c2, false));
  s.add(flow_equation(p, c0, c1, x1));
  s.add(flow_equation(p, c0, c2, x2));

  std::size_t rounds = 0;
  for (;;) {
    auto r = s.check();
    ++v.iterations;
    v.stats = s.stats();
    if (r.status == smt::Status::Unknown) {
      v.kind = ConsensusVerdict::Kind::Unknown;
      v.reason = r.reason;
      return v;
    }
    if (r.status == smt::Status::Unsat) {
      v.kind = ConsensusVerdict::Kind::Holds;
      return v;
    }
    const smt::Model& m = *r.model;
    Configuration k0 = read_config(p, m, c0), k1 = read_config(p, m, c1), k2 = read_config(p, m, c2);
    FlowAssignment f1 = read_flow(p, m, x1), f2 = read_flow(p, m, x2);

    std::vector<StateSet> new_traps, new_siphons;
    auto note = [](std::vector<StateSet>& acc, std::vector<StateSet>& fresh, const StateSet& P) {
      if (std::find(acc.begin(), acc.end(), P) != acc.end())
        throw std::logic_error("refinement rediscovered a set it already excluded");
      if (std::find(fresh.begin(), fresh.end(), P) == fresh.end()) fresh.push_back(P);
    };
    for (const auto* pair : {&k1, &k2}) {
      const FlowAssignment& f = pair == &k1 ? f1 : f2;
      auto viol = find_violations(p, k0, *pair, f);
      for (const auto& P : viol.traps) note(v.traps, new_traps, P);
      for (const auto& S : viol.siphons) note(v.siphons, new_siphons, S);
    }
    if (new_traps.empty() && new_siphons.empty()) {
      v.kind = ConsensusVerdict::Kind::Fails;
      v.c0 = k0;
      v.c1 = k1;
      v.c2 = k2;
      v.x1 = f1;
      v.x2 = f2;
      v.audit = audit(p, k0, k1, k2, f1, f2);
      if (!v.audit.ok()) throw std::logic_error("consensus counterexample fails its own audit");
      return v;
    }
    if (opts.max_refinements && rounds >= *opts.max_refinements) {
      v.kind = ConsensusVerdict::Kind::Unknown;
      v.reason = "refinement limit reached";
      return v;
    }
    ++rounds;
    for (const auto& P : new_traps) {
      for (const auto& [c, x] : {std::pair{&c1, &x1}, std::pair{&c2, &x2}}) s.add(u_trap(p, P, *c, *x));
      v.traps.push_back(P);
    }
    for (const auto& S : new_siphons) {
      for (const auto& x : {&x1, &x2}) s.add(u_siphon(p, S, c0, *x));
      v.siphons.push_back(S);
    }
    if (smt::satisfies(s.problem(), m))
      throw std::logic_error("refinement did not exclude the current model");
  }
}

}  // namespace ppv
