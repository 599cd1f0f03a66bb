#include <doctest.h>

#include <numeric>
#include <random>
#include <set>

#include "ppv/families.hpp"
#include "ppv/oracle.hpp"
#include "support.hpp"

using namespace ppv;
using namespace ppv::test;

namespace {

std::set<Configuration> node_set(const ReachGraph& g) { return {g.nodes.begin(), g.nodes.end()}; }

// Same graph with nodes renumbered by perm (old index -> new index).
ReachGraph relabel(const ReachGraph& g, const std::vector<std::uint32_t>& perm) {
  ReachGraph h;
  h.nodes.resize(g.nodes.size());
  h.succ.resize(g.nodes.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    h.nodes[perm[i]] = g.nodes[i];
    for (auto j : g.succ[i]) h.succ[perm[i]].push_back(perm[j]);
  }
  h.bottom = bottom_sccs(h.succ);
  return h;
}

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("explore examples") {
    Protocol m = gen_majority();
    auto g = explore(m, m.config({{"A", 1}, {"B", 1}}));
    CHECK(node_set(g) ==
          std::set<Configuration>{m.config({{"A", 1}, {"B", 1}}), m.config({{"a", 1}, {"b", 1}}), m.config({{"b", 2}})});
    CHECK(g.nodes[0] == m.config({{"A", 1}, {"B", 1}}));

    auto t = explore(m, m.config({{"b", 3}}));
    CHECK(t.nodes.size() == 1);
    REQUIRE(t.bottom.size() == 1);
    CHECK(t.bottom[0] == std::vector<std::uint32_t>{0});

    Protocol b = gen_broadcast();
    CHECK(explore(b, b.config({{"top", 1}, {"bot", 2}})).nodes.size() == 3);
  }

  TEST_CASE("cap is enforced") {
    Protocol m = gen_majority();
    CHECK_THROWS_AS(explore(m, m.config({{"A", 1}, {"B", 1}}), 2), CapExceeded);
  }

  TEST_CASE("bottom components of hand-built graphs") {
    // 0 -> 1 <-> 2, 0 -> 3, 4 isolated
    std::vector<std::vector<std::uint32_t>> succ{{1, 3}, {2}, {1}, {}, {}};
    auto b = bottom_sccs(succ);
    std::sort(b.begin(), b.end());
    CHECK(b == std::vector<std::vector<std::uint32_t>>{{1, 2}, {3}, {4}});
    // A self-loop with an exit is not bottom.
    auto c = bottom_sccs({{0, 1}, {}});
    CHECK(c == std::vector<std::vector<std::uint32_t>>{{1}});
  }

  TEST_CASE("classification examples") {
    Protocol m = gen_majority();
    auto tie = classify_input(m, InputAssignment{{1, 1}});
    CHECK(tie.kind == InputClassification::Kind::Stabilizes);
    CHECK(tie.value);
    CHECK(tie.silent);
    auto more_a = classify_input(m, InputAssignment{{2, 1}});
    CHECK(more_a.kind == InputClassification::Kind::Stabilizes);
    CHECK_FALSE(more_a.value);

    Protocol pp = ping_pong_majority();
    auto loop = classify_input(pp, InputAssignment{{1, 1}});
    CHECK(loop.kind == InputClassification::Kind::Stabilizes);
    CHECK(loop.value);
    CHECK_FALSE(loop.silent);

    Protocol two = two_state();
    CHECK(classify_input(two, InputAssignment{{1, 1}}).kind == InputClassification::Kind::NonConsensus);
    CHECK(classify_input(two, InputAssignment{{2, 0}}).kind == InputClassification::Kind::Stabilizes);
  }

  TEST_CASE("non-consensus bottom component") {
    // Both homogeneous pairs fall into the terminal mixed pair (p, q).
    ProtocolSpec s = two_state().to_spec();
    s.transitions.push_back(Raw{"pp", {"p", "p"}, {"p", "q"}});
    s.transitions.push_back(Raw{"qq", {"q", "q"}, {"p", "q"}});
    Protocol p = normalize(s);
    auto g = explore(p, p.config({{"p", 2}}));
    auto cls = classify_graph(p, g);
    CHECK(cls.kind == InputClassification::Kind::NonConsensus);
  }

  TEST_CASE("split between bottom components") {
    // From (r, r) the protocol commits to all-p or all-q.
    ProtocolSpec s;
    s.states = {"r", "p", "q"};
    s.transitions = {Raw{"to_p", {"r", "r"}, {"p", "p"}}, Raw{"to_q", {"r", "r"}, {"q", "q"}},
                     Raw{"pr", {"p", "r"}, {"p", "p"}}, Raw{"qr", {"q", "r"}, {"q", "q"}},
                     Raw{"pq", {"p", "q"}, {"p", "p"}}};
    s.alphabet = {"r"};
    s.input = {{"r", "r"}};
    s.output = {{"r", 0}, {"p", 0}, {"q", 1}};
    Protocol p = normalize(s);
    auto cls = classify_input(p, InputAssignment{{2}});
    CHECK(cls.kind == InputClassification::Kind::Split);
  }

  TEST_CASE("well-specification sweeps") {
    Protocol m = gen_majority();
    auto rep = oracle_well_specified(m, 6);
    REQUIRE(rep.ok());
    CHECK(rep.silent());
    CHECK(rep.table.size() == all_inputs(2, 6).size());
    for (const auto& e : rep.table) CHECK(e.cls.value == (e.input.counts[1] >= e.input.counts[0]));

    auto broken = oracle_well_specified(two_state(), 6);
    REQUIRE(broken.broken.has_value());
    CHECK(broken.broken->counts == std::vector<std::uint64_t>{1, 1});

    RemainderSpec mod3{{1}, 0, 3, false};
    Protocol r = gen_remainder(mod3);
    auto rr = oracle_well_specified(r, 6);
    REQUIRE(rr.ok());
    for (const auto& e : rr.table) CHECK(e.cls.value == (e.input.counts[0] % 3 == 0));
  }

  TEST_CASE("input enumeration") {
    auto xs = all_inputs(2, 4);
    // sizes 2, 3, 4 over two symbols: 3 + 4 + 5
    CHECK(xs.size() == 12);
    for (std::size_t i = 1; i < xs.size(); ++i) CHECK(xs[i - 1].size() <= xs[i].size());
    // C(n+2, 2) inputs of size n over three symbols
    CHECK(all_inputs(3, 6).size() == 6 + 10 + 15 + 21 + 28);
  }

  TEST_CASE("parallel sweep matches the sequential one") {
    Protocol p = gen_threshold(ThresholdSpec{{1, -1}, 1, false});
    auto a = oracle_well_specified(p, 6, kDefaultCap, 1), b = oracle_well_specified(p, 6, kDefaultCap, 4);
    REQUIRE(a.table.size() == b.table.size());
    for (std::size_t i = 0; i < a.table.size(); ++i) {
      CHECK(a.table[i].input == b.table[i].input);
      CHECK(a.table[i].cls.value == b.table[i].cls.value);
      CHECK(a.table[i].cls.kind == b.table[i].cls.kind);
    }
  }

  TEST_CASE("classification ignores node numbering") {
    std::mt19937 rng(71);
    for (int round = 0; round < 100; ++round) {
      Protocol p = random_protocol(rng, 2 + rng() % 4, 1 + rng() % 6);
      ReachGraph g = explore(p, random_config(p, 2 + rng() % 4, rng));
      std::vector<std::uint32_t> perm(g.nodes.size());
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      auto a = classify_graph(p, g), b = classify_graph(p, relabel(g, perm));
      CHECK(a.kind == b.kind);
      CHECK(a.silent == b.silent);
      if (a.kind == InputClassification::Kind::Stabilizes) CHECK(a.value == b.value);
    }
  }
}
