#include <doctest.h>

#include "ppv/families.hpp"
#include "ppv/format.hpp"
#include "ppv/verdict.hpp"
#include "support.hpp"

using namespace ppv;
using namespace ppv::test;

namespace {

Verdict wsss_verdict(const Protocol& p) {
  Verdict v;
  v.command = "check";
  v.layered = find_layered_termination(p, layered_options());
  v.consensus = check_strong_consensus(p, consensus_options());
  v.kind = combine(v);
  return v;
}

Verdict round_trip(const Protocol& p, const Verdict& v) { return parse_verdict(p, serialize_verdict(p, v)); }

}  // namespace

TEST_SUITE("verdict") {
  TEST_CASE("exit codes") {
    CHECK(exit_code(Verdict::Kind::Holds) == 0);
    CHECK(exit_code(Verdict::Kind::Fails) == 1);
    CHECK(exit_code(Verdict::Kind::Unknown) == 2);
  }

  TEST_CASE("combine") {
    Protocol p = gen_majority();
    Verdict v = wsss_verdict(p);
    CHECK(v.kind == Verdict::Kind::Holds);
    v.consensus->kind = ConsensusVerdict::Kind::Unknown;
    CHECK(combine(v) == Verdict::Kind::Unknown);
    v.layered->kind = LayeredResult::Kind::None;
    CHECK(combine(v) == Verdict::Kind::Fails);
  }

  TEST_CASE("holding verdict round trip") {
    Protocol p = gen_majority();
    Verdict v = wsss_verdict(p);
    Verdict back = round_trip(p, v);
    CHECK(back.kind == v.kind);
    CHECK(back.command == v.command);
    REQUIRE(back.layered.has_value());
    CHECK(back.layered->partition == v.layered->partition);
    CHECK(back.layered->ranking == v.layered->ranking);
    REQUIRE(back.consensus.has_value());
    CHECK(back.consensus->kind == ConsensusVerdict::Kind::Holds);
    CHECK(back.consensus->traps == v.consensus->traps);
    CHECK(back.consensus->siphons == v.consensus->siphons);
    CHECK(serialize_verdict(p, back) == serialize_verdict(p, v));
    auto rep = replay_verdict(p, back, solver());
    CHECK(rep.ok);
  }

  TEST_CASE("failing verdict round trip") {
    Protocol p = two_state();
    Verdict v = wsss_verdict(p);
    REQUIRE(v.kind == Verdict::Kind::Fails);
    Verdict back = round_trip(p, v);
    REQUIRE(back.consensus.has_value());
    CHECK(back.consensus->kind == ConsensusVerdict::Kind::Fails);
    CHECK(back.consensus->c0 == v.consensus->c0);
    CHECK(back.consensus->c1 == v.consensus->c1);
    CHECK(back.consensus->c2 == v.consensus->c2);
    CHECK(back.consensus->x1 == v.consensus->x1);
    CHECK(audit_counterexample(p, *back.consensus));
    CHECK(replay_verdict(p, back, solver()).ok);
  }

  TEST_CASE("correctness counterexample round trip") {
    Protocol p = gen_majority();
    Predicate wrong = Predicate::negation(majority_predicate());
    Verdict v;
    v.command = "correct";
    v.predicate = wrong;
    v.correctness = check_correctness(p, wrong, consensus_options());
    v.kind = combine(v);
    REQUIRE(v.kind == Verdict::Kind::Fails);
    Verdict back = round_trip(p, v);
    REQUIRE(back.correctness.has_value());
    CHECK(back.correctness->input == v.correctness->input);
    CHECK(back.correctness->c == v.correctness->c);
    CHECK(back.correctness->x == v.correctness->x);
    CHECK(back.correctness->expected == v.correctness->expected);
    REQUIRE(back.predicate.has_value());
    CHECK(*back.predicate == wrong);
    CHECK(replay_verdict(p, back, solver()).ok);
  }

  TEST_CASE("replay rejects tampered certificates") {
    Protocol p = gen_majority();
    Verdict v = wsss_verdict(p);
    Verdict bad = v;
    std::swap(bad.layered->partition.layers[0], bad.layered->partition.layers[1]);
    CHECK_FALSE(replay_verdict(p, bad, solver()).ok);

    Verdict bad_rank = v;
    for (auto& y : bad_rank.layered->ranking) std::fill(y.begin(), y.end(), 0);
    CHECK_FALSE(replay_verdict(p, bad_rank, solver()).ok);

    Protocol two = two_state();
    Verdict f = wsss_verdict(two);
    f.consensus->c1 = two.config({{"q", 2}});
    CHECK_FALSE(replay_verdict(two, f, solver()).ok);
  }

  TEST_CASE("malformed verdicts") {
    Protocol p = gen_majority();
    CHECK_THROWS_AS(parse_verdict(p, "{"), ParseError);
    CHECK_THROWS_AS(parse_verdict(p, "[]"), ParseError);
    std::string text = serialize_verdict(p, wsss_verdict(p));
    // Transitions are identified by their pre and post states.
    auto at = text.find("\"pre\"");
    REQUIRE(at != std::string::npos);
    at = text.find("\"B\"", at);
    std::string unknown = text;
    unknown.replace(at, 3, "\"Z\"");
    CHECK_THROWS_AS(parse_verdict(p, unknown), ParseError);
    std::string absent = text;
    absent.replace(at, 3, "\"A\"");
    CHECK_THROWS_AS(parse_verdict(p, absent), ParseError);
  }
}
