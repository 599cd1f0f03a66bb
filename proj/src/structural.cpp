#include "ppv/structural.hpp"

#include <algorithm>

namespace ppv {

namespace {

bool member(const StateSet& P, State q) { return std::binary_search(P.begin(), P.end(), q); }

bool meets(const StateSet& P, Pair m) { return member(P, m.lo) || member(P, m.hi); }

void erase(StateSet& P, State q) {
  auto it = std::lower_bound(P.begin(), P.end(), q);
  if (it != P.end() && *it == q) P.erase(it);
}

// Small multisets of states as sorted vectors with repetition.
using Bag = std::vector<State>;

Bag bag(Pair m) { return {m.lo, m.hi}; }

Bag bag_minus(Bag a, const Bag& b) {
  for (State q : b) {
    auto it = std::find(a.begin(), a.end(), q);
    if (it != a.end()) a.erase(it);
  }
  return a;
}

Bag bag_plus(Bag a, const Bag& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  return a;
}

bool bag_le(const Bag& a, const Bag& b) {
  for (State q : a)
    if (std::count(a.begin(), a.end(), q) > std::count(b.begin(), b.end(), q)) return false;
  return true;
}

}  // namespace

TransitionSet FlowAssignment::support() const {
  TransitionSet s;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0) s.push_back(TransitionId(i));
  return s;
}

StateSet zero_set(const Protocol& p, const Configuration& c) {
  StateSet z;
  for (std::size_t i = 0; i < p.num_states(); ++i)
    if (c.count(State(i)) == 0) z.push_back(State(i));
  return z;
}

TransitionSet producers(const Protocol& p, const StateSet& P) {
  TransitionSet out;
  for (std::size_t i = 0; i < p.num_transitions(); ++i)
    if (meets(P, p.transitions()[i].post())) out.push_back(TransitionId(i));
  return out;
}

TransitionSet consumers(const Protocol& p, const StateSet& P) {
  TransitionSet out;
  for (std::size_t i = 0; i < p.num_transitions(); ++i)
    if (meets(P, p.transitions()[i].pre())) out.push_back(TransitionId(i));
  return out;
}

TransitionSet all_transitions(const Protocol& p) {
  TransitionSet out(p.num_transitions());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = TransitionId(i);
  return out;
}

bool check_flow(const Protocol& p, const Configuration& c, const Configuration& c2, const FlowAssignment& x) {
  if (x.x.size() != p.num_transitions()) return false;
  for (std::size_t i = 0; i < p.num_states(); ++i) {
    auto q = State(i);
    __int128 v = c.count(q);
    for (std::size_t t = 0; t < x.x.size(); ++t)
      if (x.x[t]) v += __int128(x.x[t]) * p.transitions()[t].effect(q);
    if (v != __int128(c2.count(q))) return false;
  }
  return true;
}

bool is_trap(const Protocol& p, const StateSet& P, const TransitionSet& U) {
  return std::all_of(U.begin(), U.end(), [&](TransitionId t) {
    const auto& tr = p.transition(t);
    return !meets(P, tr.pre()) || meets(P, tr.post());
  });
}

bool is_siphon(const Protocol& p, const StateSet& P, const TransitionSet& U) {
  return std::all_of(U.begin(), U.end(), [&](TransitionId t) {
    const auto& tr = p.transition(t);
    return !meets(P, tr.post()) || meets(P, tr.pre());
  });
}

StateSet maximal_trap_in_zero(const Protocol& p, const TransitionSet& U, const StateSet& Z) {
  StateSet P = Z;
  for (bool changed = true; changed;) {
    changed = false;
    for (TransitionId t : U) {
      const auto& tr = p.transition(t);
      if (meets(P, tr.pre()) && !meets(P, tr.post())) {
        erase(P, tr.p);
        erase(P, tr.q);
        changed = true;
      }
    }
  }
  return P;
}

StateSet maximal_siphon_in_zero(const Protocol& p, const TransitionSet& U, const StateSet& Z) {
  StateSet P = Z;
  for (bool changed = true; changed;) {
    changed = false;
    for (TransitionId t : U) {
      const auto& tr = p.transition(t);
      if (meets(P, tr.post()) && !meets(P, tr.pre())) {
        erase(P, tr.p2);
        erase(P, tr.q2);
        changed = true;
      }
    }
  }
  return P;
}

bool trap_violated(const Protocol& p, const StateSet& P, const TransitionSet& U) {
  return std::any_of(U.begin(), U.end(), [&](TransitionId t) { return meets(P, p.transition(t).post()); });
}

bool siphon_violated(const Protocol& p, const StateSet& P, const TransitionSet& U) {
  return std::any_of(U.begin(), U.end(), [&](TransitionId t) { return meets(P, p.transition(t).pre()); });
}

namespace {

template <class Largest, class Violated>
StateSet shrink(StateSet P, Largest largest, Violated violated) {
  // Removal only ever shrinks later candidates, so one pass reaches a minimum.
  for (std::size_t i = 0; i < P.size();) {
    StateSet rest = P;
    rest.erase(rest.begin() + std::ptrdiff_t(i));
    StateSet sub = largest(rest);
    if (violated(sub)) {
      auto keep = std::lower_bound(sub.begin(), sub.end(), P[i]) - sub.begin();
      P = std::move(sub);
      i = std::size_t(keep);
    } else {
      ++i;
    }
  }
  return P;
}

}  // namespace

StateSet minimal_violated_trap(const Protocol& p, const TransitionSet& U, StateSet P) {
  return shrink(
      std::move(P), [&](const StateSet& Z) { return maximal_trap_in_zero(p, U, Z); },
      [&](const StateSet& R) { return trap_violated(p, R, U); });
}

StateSet minimal_violated_siphon(const Protocol& p, const TransitionSet& U, StateSet P) {
  return shrink(
      std::move(P), [&](const StateSet& Z) { return maximal_siphon_in_zero(p, U, Z); },
      [&](const StateSet& R) { return siphon_violated(p, R, U); });
}

ReachabilityCheck check_potential_reachability(const Protocol& p, const Configuration& c, const Configuration& c2,
                                               const FlowAssignment& x) {
  if (!check_flow(p, c, c2, x)) return {'a', {}};
  TransitionSet U = x.support();
  StateSet trap = maximal_trap_in_zero(p, U, zero_set(p, c2));
  if (trap_violated(p, trap, U)) return {'b', trap};
  StateSet siphon = maximal_siphon_in_zero(p, U, zero_set(p, c));
  if (siphon_violated(p, siphon, U)) return {'c', siphon};
  return {};
}

std::optional<std::vector<smt::Rational>> has_nonsilent_invariant_cycle(const Protocol& p, const TransitionSet& U,
                                                                         const smt::SolverOptions& opts) {
  if (U.empty()) return std::nullopt;
  for (TransitionId t : U)
    if (p.transition(t).silent()) throw std::invalid_argument("invariant cycle query over a silent transition");
  smt::Session s(opts, smt::Logic::QF_LRA);
  std::vector<smt::Var> x;
  for (TransitionId t : U) x.push_back(s.declare("x_t" + std::to_string(idx(t)), smt::Sort::NonNegReal));
  smt::LinTerm total;
  for (auto v : x) total += v;
  s.add(smt::ge(total, 1));
  for (std::size_t q = 0; q < p.num_states(); ++q) {
    smt::LinTerm net;
    for (std::size_t i = 0; i < U.size(); ++i) net.add(x[i], p.transition(U[i]).effect(State(q)));
    if (!net.is_constant()) s.add(smt::eq(net, 0));
  }
  auto r = s.check();
  if (r.status == smt::Status::Unknown)
    throw smt::SolverError(smt::SolverError::Kind::Protocol, "solver returned unknown on a linear program: " + r.reason);
  if (r.status == smt::Status::Unsat) return std::nullopt;
  std::vector<smt::Rational> out;
  for (auto v : x) out.push_back(r.model->value(v));
  return out;
}

std::optional<DeadnessViolation> u_dead_violation(const Protocol& p, const TransitionSet& S, const TransitionSet& U) {
  TransitionSet live;
  for (TransitionId u : U)
    if (!p.transition(u).silent()) live.push_back(u);
  for (TransitionId s : S) {
    const auto& ts = p.transition(s);
    for (TransitionId u : live) {
      Bag reach = bag_plus(bag(ts.pre()), bag_minus(bag(p.transition(u).pre()), bag(ts.post())));
      bool some_enabled = std::any_of(live.begin(), live.end(),
                                      [&](TransitionId u2) { return bag_le(bag(p.transition(u2).pre()), reach); });
      if (!some_enabled) return DeadnessViolation{s, u};
    }
  }
  return std::nullopt;
}

bool is_U_dead(const Protocol& p, const TransitionSet& S, const TransitionSet& U) {
  return !u_dead_violation(p, S, U).has_value();
}

}  // namespace ppv
