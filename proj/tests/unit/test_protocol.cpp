#include <doctest.h>

#include <random>

#include "ppv/families.hpp"
#include "ppv/protocol.hpp"
#include "support.hpp"

using namespace ppv;
using ppv::test::Raw;

namespace {

bool has_transition(const std::vector<Transition>& ts, const std::string& name) {
  return std::any_of(ts.begin(), ts.end(), [&](const Transition& t) { return t.name == name; });
}

}  // namespace

TEST_SUITE("core") {
  TEST_CASE("majority is the four-state protocol with identity input") {
    Protocol p = gen_majority();
    CHECK(p.num_states() == 4);
    CHECK(p.nonsilent_count() == 4);
    CHECK(p.state_names() == std::vector<std::string>{"A", "B", "a", "b"});
    CHECK(p.input(p.symbol("A")) == p.state("A"));
    CHECK(p.input(p.symbol("B")) == p.state("B"));
    CHECK_FALSE(p.output(p.state("A")));
    CHECK_FALSE(p.output(p.state("a")));
    CHECK(p.output(p.state("B")));
    CHECK(p.output(p.state("b")));
    // 10 unordered pairs, 4 of them declared; implicit pairs are not indexed
    CHECK(p.implicit_silent().size() == 6);
    CHECK(p.num_transitions() == 4);
  }

  TEST_CASE("step") {
    Protocol p = gen_majority();
    auto t = [&](const char* n) { return p.transition(*p.find_transition(n)); };
    CHECK(step(p.config({{"A", 1}, {"B", 1}}), t("t_AB")) == p.config({{"a", 1}, {"b", 1}}));
    CHECK(step(p.config({{"b", 1}, {"a", 1}}), t("t_ba")) == p.config({{"b", 2}}));

    Configuration c = p.config({{"A", 2}, {"a", 1}});
    for (const auto& tr : enabled_transitions(p, c))
      if (tr.silent()) CHECK(step(c, tr) == c);

    try {
      step(p.config({{"A", 2}}), t("t_AB"));
      FAIL("expected NotEnabled");
    } catch (const NotEnabled& e) {
      REQUIRE(e.missing().size() == 1);
      CHECK(e.missing()[0] == p.state("B"));
    }
  }

  TEST_CASE("enabled transitions") {
    Protocol p = gen_majority();
    auto en = enabled_transitions(p, p.config({{"A", 2}}));
    REQUIRE(en.size() == 1);
    CHECK(en[0].silent());
    CHECK(en[0].pre() == Pair(p.state("A"), p.state("A")));

    auto all = enabled_transitions(p, p.config({{"A", 1}, {"B", 1}, {"a", 1}, {"b", 1}}));
    for (const char* n : {"t_AB", "t_Ab", "t_Ba", "t_ba"}) CHECK(has_transition(all, n));

    ProtocolSpec s;
    s.states = {"p", "q"};
    s.transitions = {Raw{"go", {"p", "q"}, {"q", "q"}}};
    s.alphabet = {"p"};
    s.input = {{"p", "p"}};
    s.output = {{"p", 0}, {"q", 1}};
    Protocol two = normalize(s);
    auto en2 = enabled_transitions(two, two.config({{"p", 1}, {"q", 1}}));
    REQUIRE(en2.size() == 1);
    CHECK(en2[0].name == "go");
    CHECK(enabled_transitions(two, two.config({{"p", 3}})).size() == 1);
  }

  TEST_CASE("terminal and consensus") {
    Protocol p = gen_majority();
    CHECK(is_terminal(p, p.config({{"b", 2}})));
    CHECK_FALSE(is_terminal(p, p.config({{"A", 1}, {"B", 1}})));
    Protocol q = test::two_state();
    CHECK(is_terminal(q, q.config({{"p", 3}, {"q", 2}})));

    CHECK(consensus_output(p, p.config({{"A", 1}, {"a", 1}})) == false);
    CHECK_FALSE(consensus_output(p, p.config({{"a", 1}, {"b", 1}})).has_value());
    CHECK(consensus_output(p, p.config({{"B", 5}})) == true);
  }

  TEST_CASE("initialize") {
    Protocol p = gen_majority();
    CHECK(initialize(p, InputAssignment{{1, 1}}) == p.config({{"A", 1}, {"B", 1}}));
    CHECK_THROWS_AS(initialize(p, InputAssignment{{1, 0}}), InputTooSmall);

    ProtocolSpec s;
    s.states = {"q", "r"};
    s.alphabet = {"u", "v", "w"};
    s.input = {{"u", "q"}, {"v", "q"}, {"w", "q"}};
    s.output = {{"q", 0}, {"r", 1}};
    Protocol one = normalize(s);
    CHECK(initialize(one, InputAssignment{{2, 1, 3}}) == one.config({{"q", 6}}));

    Protocol t = gen_threshold(ThresholdSpec::benchmark(3, 1));
    for (std::int64_t v = -3; v <= 3; ++v) {
      InputAssignment x{std::vector<std::uint64_t>(t.num_symbols(), 0)};
      x.counts[idx(t.symbol("x[" + std::to_string(v) + "]"))] = 2;
      std::string q = "(1," + std::to_string(v) + "," + (v < 1 ? "1" : "0") + ")";
      CHECK(initialize(t, x) == t.config({{q, 2}}));
    }
  }

  TEST_CASE("validation errors") {
    auto kind_of = [](const ProtocolSpec& s) {
      try {
        normalize(s);
      } catch (const ProtocolError& e) {
        return int(e.kind());
      }
      return -1;
    };
    ProtocolSpec ok = gen_majority().to_spec();
    CHECK(kind_of(ok) == -1);

    auto s = ok;
    s.states.push_back("A");
    CHECK(kind_of(s) == int(ProtocolError::Kind::DuplicateState));
    s = ok;
    s.transitions[0].post = {"a", "z"};
    CHECK(kind_of(s) == int(ProtocolError::Kind::UnknownStateInTransition));
    s = ok;
    s.transitions[0].pre = {"A", "B", "B"};
    CHECK(kind_of(s) == int(ProtocolError::Kind::NonBinaryTransition));
    s = ok;
    s.alphabet.clear();
    s.input.clear();
    CHECK(kind_of(s) == int(ProtocolError::Kind::EmptyAlphabet));
    s = ok;
    s.input.erase("B");
    CHECK(kind_of(s) == int(ProtocolError::Kind::IncompleteInputMap));
    s = ok;
    s.output.erase("b");
    CHECK(kind_of(s) == int(ProtocolError::Kind::IncompleteOutputMap));
    s = ok;
    s.output["b"] = 2;
    CHECK(kind_of(s) == int(ProtocolError::Kind::InvalidOutput));
  }

  TEST_CASE("reordered duplicates collapse to one semantic transition") {
    ProtocolSpec s = gen_majority().to_spec();
    s.transitions.push_back(Raw{"t_BA", {"B", "A"}, {"b", "a"}});
    Protocol p = normalize(s);
    CHECK(p.declared().size() == 5);
    CHECK(p.nonsilent_count() == 4);
    CHECK(p.find_transition("t_BA") == p.find_transition("t_AB"));
  }

  TEST_CASE("step invariants on random configurations") {
    std::mt19937 rng(7);
    for (int round = 0; round < 200; ++round) {
      Protocol p = test::random_protocol(rng, 2 + rng() % 4, 1 + rng() % 6);
      Configuration c = test::random_config(p, 2 + rng() % 5, rng);
      auto en = enabled_transitions(p, c);
      CHECK_FALSE(en.empty());
      bool all_silent = true;
      for (const auto& t : en) {
        Configuration d = step(c, t);
        CHECK(d.size() == c.size());
        CHECK((d == c) == t.silent());
        all_silent = all_silent && t.silent();
      }
      CHECK(is_terminal(p, c) == all_silent);
    }
  }

  TEST_CASE("initialize is additive") {
    std::mt19937 rng(11);
    Protocol p = gen_remainder(RemainderSpec::benchmark(4, 1));
    for (int round = 0; round < 100; ++round) {
      InputAssignment x{std::vector<std::uint64_t>(p.num_symbols())}, y = x, xy = x;
      for (std::size_t s = 0; s < p.num_symbols(); ++s) {
        x.counts[s] = rng() % 3 + (s == 0 ? 2 : 0);
        y.counts[s] = rng() % 3 + (s == 0 ? 2 : 0);
        xy.counts[s] = x.counts[s] + y.counts[s];
      }
      CHECK(initialize(p, xy) == initialize(p, x) + initialize(p, y));
    }
  }
}
