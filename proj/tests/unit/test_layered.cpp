#include <doctest.h>

#include <map>
#include <random>

#include "ppv/families.hpp"
#include "ppv/layered.hpp"
#include "ppv/oracle.hpp"
#include "support.hpp"

using namespace ppv;
using namespace ppv::test;

namespace {

// All ordered partitions of the non-silent transitions; silent ones join
// the first layer.
std::vector<OrderedPartition> ordered_partitions(const Protocol& p) {
  const auto& ns = p.nonsilent();
  TransitionSet silent;
  for (std::size_t i = 0; i < p.num_transitions(); ++i)
    if (p.transitions()[i].silent()) silent.push_back(TransitionId(i));
  std::vector<OrderedPartition> out;
  std::vector<std::size_t> label(ns.size(), 0);
  std::size_t n = ns.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= n;
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code, k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      label[i] = c % n;
      c /= n;
      k = std::max(k, label[i] + 1);
    }
    OrderedPartition op;
    op.layers.resize(k);
    for (std::size_t i = 0; i < n; ++i) op.layers[label[i]].push_back(ns[i]);
    if (std::any_of(op.layers.begin(), op.layers.end(), [](const auto& l) { return l.empty(); })) continue;
    op.layers[0].insert(op.layers[0].end(), silent.begin(), silent.end());
    for (auto& l : op.layers) std::sort(l.begin(), l.end());
    out.push_back(op);
  }
  return out;
}

bool some_partition_verifies(const Protocol& p) {
  for (const auto& op : ordered_partitions(p))
    if (verify_partition(p, op, solver()).ok()) return true;
  return false;
}

// From every reachable configuration of every small input a terminal one is
// reachable: every bottom SCC is a single terminal configuration.
bool terminates_on_small_inputs(const Protocol& p, std::size_t max_agents) {
  for (const auto& x : all_inputs(p.num_symbols(), max_agents)) {
    ReachGraph g = explore(p, initialize(p, x));
    for (const auto& scc : g.bottom)
      if (scc.size() != 1 || !is_terminal(p, g.nodes[scc[0]])) return false;
  }
  return true;
}

std::size_t layer_of(const OrderedPartition& op, TransitionId t) {
  for (std::size_t i = 0; i < op.layers.size(); ++i)
    if (std::binary_search(op.layers[i].begin(), op.layers[i].end(), t)) return i;
  return op.layers.size();
}

__int128 weigh(const std::vector<std::uint64_t>& y, const Configuration& c) {
  __int128 s = 0;
  for (auto [q, k] : c.entries()) s += __int128(y[idx(q)]) * k;
  return s;
}

// pre(s) + (pre(u) - post(s)) is dead for U, and firing s enables u.
bool witness_replays(const Protocol& p, const DeadnessViolation& w, const TransitionSet& U) {
  const auto& s = p.transition(w.s);
  const auto& u = p.transition(w.u);
  Configuration c;
  c.add(s.p);
  c.add(s.q);
  for (State q : {u.p, u.q}) {
    if (q == u.q && u.p == u.q) break;
    int extra = u.pre().count(q) - s.post().count(q);
    if (extra > 0) c.add(q, std::uint64_t(extra));
  }
  for (TransitionId v : U)
    if (!p.transition(v).silent() && c.covers(p.transition(v).pre())) return false;
  return step(c, s).covers(u.pre());
}

}  // namespace

TEST_SUITE("layered") {
  TEST_CASE("majority has a two-layer certificate") {
    Protocol p = gen_majority();
    auto r = find_layered_termination(p, layered_options());
    REQUIRE(r.kind == LayeredResult::Kind::Found);
    CHECK(r.partition.layers.size() == 2);
    CHECK(verify_partition(p, r.partition, solver()).ok());
    CHECK(check_ranking(p, r.partition, r.ranking));
    CHECK(r.k_tried == 2);
  }

  TEST_CASE("the two-layer majority partition verifies and its variants do not") {
    Protocol p = gen_majority();
    TransitionSet t2 = tset(p, {"t_Ba", "t_ba"}), t1;
    for (TransitionId t : all_transitions(p))
      if (!std::binary_search(t2.begin(), t2.end(), t)) t1.push_back(t);
    CHECK(verify_partition(p, OrderedPartition{{t1, t2}}, solver()).ok());

    // Swapped: firing t_Ab in layer 2 creates the a that t_Ba needs.
    auto swapped = verify_partition(p, OrderedPartition{{t2, t1}}, solver());
    CHECK(swapped.layer == 2);
    CHECK(swapped.condition == 'b');
    REQUIRE(swapped.dead.has_value());
    CHECK(std::binary_search(t1.begin(), t1.end(), swapped.dead->s));
    CHECK(std::binary_search(t2.begin(), t2.end(), swapped.dead->u));
    CHECK(witness_replays(p, *swapped.dead, t2));

    TransitionSet all = all_transitions(p);
    auto single = verify_partition(p, OrderedPartition{{all}}, solver());
    CHECK(single.layer == 1);
    CHECK(single.condition == 'a');
    REQUIRE(single.cycle.size() == 4);
    // Nonnegative, normalized, zero net effect on every state.
    const auto& ns = p.nonsilent();
    smt::Rational total = 0;
    for (const auto& w : single.cycle) {
      CHECK(w >= 0);
      total += w;
    }
    CHECK(total >= 1);
    for (std::size_t q = 0; q < p.num_states(); ++q) {
      smt::Rational net = 0;
      for (std::size_t i = 0; i < ns.size(); ++i) net += single.cycle[i] * p.transition(ns[i]).effect(State(q));
      CHECK(net == 0);
    }
  }

  TEST_CASE("partition validation") {
    Protocol p = gen_majority();
    TransitionSet all = all_transitions(p);
    CHECK_NOTHROW(validate_partition(p, OrderedPartition{{all}}));
    CHECK_THROWS_AS(validate_partition(p, OrderedPartition{}), std::invalid_argument);
    CHECK_THROWS_AS(validate_partition(p, OrderedPartition{{all, {}}}), std::invalid_argument);
    TransitionSet missing(all.begin() + 1, all.end());
    CHECK_THROWS_AS(validate_partition(p, OrderedPartition{{missing}}), std::invalid_argument);
    CHECK_THROWS_AS(validate_partition(p, OrderedPartition{{all, {all[0]}}}), std::invalid_argument);
  }

  TEST_CASE("reenablers") {
    Protocol p = gen_majority();
    CHECK(reenablers(p, tid(p, "t_Ab"), tid(p, "t_Ba")) == tset(p, {"t_AB", "t_Ab"}));
    CHECK(reenablers(p, tid(p, "t_Ba"), tid(p, "t_ba")) == tset(p, {"t_Ba"}));
  }

  TEST_CASE("protocol without transitions gets one empty layer") {
    Protocol p = two_state();
    auto r = find_layered_termination(p, layered_options());
    REQUIRE(r.kind == LayeredResult::Kind::Found);
    CHECK(r.partition.layers.size() == 1);
    CHECK(verify_partition(p, r.partition, solver()).ok());
  }

  TEST_CASE("silent declared transitions only") {
    ProtocolSpec s = two_state().to_spec();
    s.transitions.push_back(Raw{"idle", {"p", "q"}, {"q", "p"}});
    Protocol p = normalize(s);
    REQUIRE(p.nonsilent().empty());
    auto r = find_layered_termination(p, layered_options());
    REQUIRE(r.kind == LayeredResult::Kind::Found);
    REQUIRE(r.partition.layers.size() == 1);
    CHECK(r.partition.layers[0] == all_transitions(p));
  }

  TEST_CASE("ping-pong extension of majority has no certificate") {
    Protocol p = ping_pong_majority();
    REQUIRE(p.nonsilent_count() == 6);
    auto r = find_layered_termination(p, layered_options());
    CHECK(r.kind == LayeredResult::Kind::None);
    CHECK(r.k_tried == 6);
  }

  TEST_CASE("ping-pong extension fails every ordered partition") {
    Protocol p = ping_pong_majority();
    auto parts = ordered_partitions(p);
    CHECK(parts.size() == 4683);
    // Both conditions only look at one layer and the union below it, so
    // their answers are memoized across partitions.
    std::map<TransitionSet, bool> cycle;
    std::map<std::pair<TransitionSet, TransitionSet>, bool> dead;
    auto layered_ok = [&](const OrderedPartition& op) {
      TransitionSet below;
      for (const auto& layer : op.layers) {
        TransitionSet live;
        for (TransitionId t : layer)
          if (!p.transition(t).silent()) live.push_back(t);
        auto c = cycle.find(live);
        if (c == cycle.end()) c = cycle.emplace(live, has_nonsilent_invariant_cycle(p, live, solver()).has_value()).first;
        if (c->second) return false;
        auto key = std::make_pair(layer, below);
        auto d = dead.find(key);
        if (d == dead.end()) d = dead.emplace(key, is_U_dead(p, layer, below)).first;
        if (!d->second) return false;
        below.insert(below.end(), layer.begin(), layer.end());
        std::sort(below.begin(), below.end());
      }
      return true;
    };
    for (const auto& op : parts) CHECK_FALSE(layered_ok(op));
    std::mt19937 rng(43);
    for (int k = 0; k < 40; ++k) {
      const auto& op = parts[rng() % parts.size()];
      CHECK_FALSE(verify_partition(p, op, solver()).ok());
    }
    CHECK(cycle.size() <= 63);
  }

  TEST_CASE("small protocols agree with exhaustive partition search") {
    std::mt19937 rng(41);
    int found = 0, none = 0;
    for (int round = 0; round < 60; ++round) {
      Protocol p = random_protocol(rng, 2 + rng() % 3, 2 + rng() % 3);
      if (p.nonsilent_count() > 4 || p.nonsilent().empty()) continue;
      auto r = find_layered_termination(p, layered_options());
      REQUIRE(r.kind != LayeredResult::Kind::Unknown);
      CAPTURE(round);
      CHECK((r.kind == LayeredResult::Kind::Found) == some_partition_verifies(p));
      if (r.kind == LayeredResult::Kind::Found) {
        ++found;
        CHECK(verify_partition(p, r.partition, solver()).ok());
        CHECK(check_ranking(p, r.partition, r.ranking));
        CHECK(terminates_on_small_inputs(p, 5));
      } else {
        ++none;
      }
    }
    CHECK(found > 3);
    CHECK(none > 3);
  }

  TEST_CASE("rankings decrease along random steps") {
    std::mt19937 rng(42);
    std::vector<Protocol> ps = {gen_majority(), gen_remainder(RemainderSpec::benchmark(5, 1)), gen_flock_cms(5),
                                gen_flock_guidelines(5), gen_threshold(ThresholdSpec::benchmark(2, 1))};
    std::size_t steps = 0;
    for (const auto& p : ps) {
      auto r = find_layered_termination(p, layered_options());
      REQUIRE(r.kind == LayeredResult::Kind::Found);
      while (steps < 1000 * (&p - ps.data() + 1) / ps.size()) {
        Configuration c = random_config(p, 2 + rng() % 8, rng);
        std::vector<TransitionId> en;
        for (TransitionId t : p.nonsilent())
          if (c.covers(p.transition(t).pre())) en.push_back(t);
        if (en.empty()) continue;
        TransitionId t = en[rng() % en.size()];
        std::size_t i = layer_of(r.partition, t);
        REQUIRE(i < r.ranking.size());
        Configuration d = step(c, p.transition(t));
        CHECK(weigh(r.ranking[i], d) < weigh(r.ranking[i], c));
        ++steps;
      }
    }
    CHECK(steps == 1000);
  }

  TEST_CASE("certified families terminate on small inputs") {
    for (const auto& p : {gen_majority(), gen_broadcast(), gen_flock_cms(4), gen_flock_guidelines(4),
                          gen_remainder(RemainderSpec{{1}, 0, 3, false})}) {
      auto r = find_layered_termination(p, layered_options());
      REQUIRE(r.kind == LayeredResult::Kind::Found);
      CHECK(terminates_on_small_inputs(p, 5));
    }
  }

  TEST_CASE("k_max bounds the search") {
    LayeredOptions o = layered_options();
    o.k_max = 1;
    auto r = find_layered_termination(gen_majority(), o);
    CHECK(r.kind == LayeredResult::Kind::None);
    CHECK(r.k_tried == 1);
  }
}
