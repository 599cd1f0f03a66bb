#include "ppv/layered.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

namespace ppv {

namespace {

bool pair_le(Pair need, const std::vector<State>& have) {
  auto n = [&](State q) { return std::count(have.begin(), have.end(), q); };
  if (need.lo == need.hi) return n(need.lo) >= 2;
  return n(need.lo) >= 1 && n(need.hi) >= 1;
}

// pre(t) + (pre(u) - post(t))
std::vector<State> after_firing(const Transition& t, const Transition& u) {
  std::vector<State> rest{u.pre().lo, u.pre().hi};
  for (State q : {t.post().lo, t.post().hi}) {
    auto it = std::find(rest.begin(), rest.end(), q);
    if (it != rest.end()) rest.erase(it);
  }
  rest.push_back(t.pre().lo);
  rest.push_back(t.pre().hi);
  return rest;
}

std::string y_name(std::size_t i, State q) { return "y" + std::to_string(i) + "_q" + std::to_string(idx(q)); }
std::string b_name(TransitionId t) { return "b_t" + std::to_string(idx(t)); }

// Constraint (iii) skeleton, independent of k: (t, u, U'(t,u)) for every
// pair whose disjunction is not trivially satisfied by u' = u.
struct Reenabling {
  TransitionId t, u;
  TransitionSet alternatives;
};

std::vector<Reenabling> reenabling_table(const Protocol& p) {
  // Group non-silent transitions by their pre pair to test pre(u') <= M once per pair.
  std::map<Pair, TransitionSet> by_pre;
  for (TransitionId u : p.nonsilent()) by_pre[p.transition(u).pre()].push_back(u);
  std::vector<Reenabling> out;
  for (TransitionId t : p.nonsilent()) {
    const auto& tt = p.transition(t);
    for (TransitionId u : p.nonsilent()) {
      if (t == u) continue;
      const auto& tu = p.transition(u);
      auto m = after_firing(tt, tu);
      if (pair_le(tu.pre(), m)) continue;
      Reenabling r{t, u, {}};
      for (const auto& [pre, ts] : by_pre)
        if (pair_le(pre, m)) r.alternatives.insert(r.alternatives.end(), ts.begin(), ts.end());
      std::sort(r.alternatives.begin(), r.alternatives.end());
      out.push_back(std::move(r));
    }
  }
  return out;
}

// y only occurs in homogeneous strict inequalities, so clearing denominators
// keeps a rational solution valid.
std::vector<std::uint64_t> scale_to_naturals(const std::vector<smt::Rational>& y) {
  smt::Integer l = 1;
  for (const auto& r : y) l = boost::multiprecision::lcm(l, smt::Integer(denominator(r)));
  std::vector<std::uint64_t> out;
  for (const auto& r : y) {
    smt::Integer n = numerator(r) * (l / denominator(r));
    if (n < 0 || n > std::numeric_limits<std::uint64_t>::max())
      throw std::overflow_error("scaled ranking does not fit 64 bits");
    out.push_back(n.convert_to<std::uint64_t>());
  }
  return out;
}

struct SystemVars {
  std::vector<std::vector<smt::Var>> y;  // [layer][state]
  std::map<TransitionId, smt::Var> b;
};

template <class Sink>
SystemVars build_system(Sink& sink, const Protocol& p, std::size_t k, const std::vector<Reenabling>& table) {
  SystemVars v;
  // Declaration order: y by layer then state, then b by transition.
  v.y.resize(k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t q = 0; q < p.num_states(); ++q) v.y[i].push_back(sink.declare(y_name(i + 1, State(q)), smt::Sort::NonNegReal));
  for (TransitionId t : p.nonsilent()) v.b[t] = sink.declare(b_name(t), smt::Sort::Nat);

  const auto K = static_cast<std::int64_t>(k);
  for (TransitionId t : p.nonsilent()) {
    smt::Var bt = v.b.at(t);
    sink.add(smt::ge(bt, 1) && smt::le(bt, K));
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (TransitionId t : p.nonsilent()) {
      const auto& tr = p.transition(t);
      smt::LinTerm delta;
      for (std::size_t q = 0; q < p.num_states(); ++q)
        if (int e = tr.effect(State(q))) delta.add(v.y[i][q], e);
      sink.add(smt::Formula::implies(smt::eq(v.b.at(t), std::int64_t(i + 1)), smt::lt(delta, 0)));
    }
  }
  for (const auto& r : table) {
    smt::Var bu = v.b.at(r.u), bt = v.b.at(r.t);
    if (r.alternatives.empty()) {
      sink.add(smt::ge(bu, bt));
      continue;
    }
    std::vector<smt::Formula> same;
    for (TransitionId u2 : r.alternatives) same.push_back(smt::eq(bu, v.b.at(u2)));
    sink.add(smt::Formula::implies(smt::lt(bu, bt), smt::Formula::disj(std::move(same))));
  }
  return v;
}

}  // namespace

const char* to_string(LayeredResult::Kind k) {
  switch (k) {
    case LayeredResult::Kind::Found: return "found";
    case LayeredResult::Kind::None: return "none";
    case LayeredResult::Kind::Unknown: return "unknown";
  }
  return "?";
}

void validate_partition(const Protocol& p, const OrderedPartition& op) {
  if (op.layers.empty()) throw std::invalid_argument("partition has no layers");
  std::vector<int> seen(p.num_transitions(), 0);
  for (std::size_t i = 0; i < op.layers.size(); ++i) {
    if (op.layers[i].empty() && !(op.layers.size() == 1 && p.num_transitions() == 0))
      throw std::invalid_argument("layer " + std::to_string(i + 1) + " is empty");
    for (TransitionId t : op.layers[i]) {
      if (idx(t) >= seen.size()) throw std::invalid_argument("partition names an unknown transition");
      if (seen[idx(t)]++) throw std::invalid_argument("transition " + to_string(p, p.transition(t)) + " appears twice");
    }
  }
  for (std::size_t t = 0; t < seen.size(); ++t)
    if (!seen[t])
      throw std::invalid_argument("transition " + to_string(p, p.transitions()[t]) + " is not covered");
}

TransitionSet reenablers(const Protocol& p, TransitionId t, TransitionId u) {
  auto m = after_firing(p.transition(t), p.transition(u));
  TransitionSet out;
  for (TransitionId u2 : p.nonsilent())
    if (pair_le(p.transition(u2).pre(), m)) out.push_back(u2);
  return out;
}

smt::Problem layered_system(const Protocol& p, std::size_t k) {
  smt::Problem prob(smt::Logic::QF_LIRA);
  build_system(prob, p, k, reenabling_table(p));
  return prob;
}

bool check_ranking(const Protocol& p, const OrderedPartition& op, const std::vector<std::vector<std::uint64_t>>& ranking) {
  if (ranking.size() != op.layers.size()) return false;
  for (std::size_t i = 0; i < op.layers.size(); ++i) {
    if (ranking[i].size() != p.num_states()) return false;
    for (TransitionId t : op.layers[i]) {
      const auto& tr = p.transition(t);
      if (tr.silent()) continue;
      __int128 d = 0;
      for (std::size_t q = 0; q < p.num_states(); ++q) d += __int128(ranking[i][q]) * tr.effect(State(q));
      if (d >= 0) return false;
    }
  }
  return true;
}

LayeredResult find_layered_termination(const Protocol& p, const LayeredOptions& opts) {
  LayeredResult res;
  TransitionSet silent;
  for (std::size_t i = 0; i < p.num_transitions(); ++i)
    if (p.transitions()[i].silent()) silent.push_back(TransitionId(i));

  if (p.nonsilent().empty()) {
    res.kind = LayeredResult::Kind::Found;
    res.partition.layers = {silent};
    res.ranking = {std::vector<std::uint64_t>(p.num_states(), 0)};
    return res;
  }

  const std::size_t k_max = std::min(opts.k_max.value_or(p.nonsilent_count()), p.nonsilent_count());
  const auto table = reenabling_table(p);
  for (std::size_t k = 1; k <= k_max; ++k) {
    smt::SolverOptions so = opts.solver;
    so.dump_tag = "layered-k" + std::to_string(k);
    smt::Session session(so, smt::Logic::QF_LIRA);
    SystemVars v = build_system(session, p, k, table);
    auto r = session.check();
    res.k_tried = k;
    res.stats.checks += session.stats().checks;
    res.stats.solver_seconds += session.stats().solver_seconds;
    res.stats.script_bytes += session.stats().script_bytes;
    if (r.status == smt::Status::Unknown) {
      res.kind = LayeredResult::Kind::Unknown;
      res.reason = r.reason;
      return res;
    }
    if (r.status == smt::Status::Unsat) continue;

    // Compact the used layer indices.
    std::map<std::uint64_t, TransitionSet> by_layer;
    for (TransitionId t : p.nonsilent()) by_layer[r.model->natural(v.b.at(t))].push_back(t);
    bool first = true;
    for (auto& [layer, ts] : by_layer) {
      if (first) ts.insert(ts.end(), silent.begin(), silent.end());
      std::sort(ts.begin(), ts.end());
      res.partition.layers.push_back(ts);
      std::vector<smt::Rational> y;
      for (std::size_t q = 0; q < p.num_states(); ++q) y.push_back(r.model->value(v.y[layer - 1][q]));
      res.ranking.push_back(scale_to_naturals(y));
      first = false;
    }
    res.kind = LayeredResult::Kind::Found;
    if (!check_ranking(p, res.partition, res.ranking))
      throw std::logic_error("layer assignment carries an invalid ranking certificate");
    if (auto chk = verify_partition(p, res.partition, opts.solver); !chk.ok())
      throw std::logic_error("layer assignment fails partition check at layer " + std::to_string(chk.layer));
    return res;
  }
  res.kind = LayeredResult::Kind::None;
  return res;
}

PartitionCheck verify_partition(const Protocol& p, const OrderedPartition& op, const smt::SolverOptions& opts) {
  validate_partition(p, op);
  PartitionCheck out;
  TransitionSet below;
  for (std::size_t i = 0; i < op.layers.size(); ++i) {
    TransitionSet live;
    for (TransitionId t : op.layers[i])
      if (!p.transition(t).silent()) live.push_back(t);
    std::sort(live.begin(), live.end());
    if (auto cyc = has_nonsilent_invariant_cycle(p, live, opts)) {
      out.layer = i + 1;
      out.condition = 'a';
      out.cycle = std::move(*cyc);
      return out;
    }
    if (auto dead = u_dead_violation(p, op.layers[i], below)) {
      out.layer = i + 1;
      out.condition = 'b';
      out.dead = dead;
      return out;
    }
    below.insert(below.end(), op.layers[i].begin(), op.layers[i].end());
    std::sort(below.begin(), below.end());
  }
  return out;
}

}  // namespace ppv
