#include <doctest.h>

#include <random>

#include "ppv/correctness.hpp"
#include "ppv/families.hpp"
#include "ppv/oracle.hpp"
#include "support.hpp"

using namespace ppv;
using namespace ppv::test;

namespace {

InputAssignment input(const Protocol& p, std::initializer_list<std::pair<const char*, std::uint64_t>> counts) {
  InputAssignment x{std::vector<std::uint64_t>(p.num_symbols(), 0)};
  for (auto [s, k] : counts) x.counts[idx(p.symbol(s))] = k;
  return x;
}

// Oracle stabilized value equals the predicate on every small input.
void oracle_agrees(const Protocol& p, const Predicate& pd, std::size_t max_agents) {
  auto rep = oracle_well_specified(p, max_agents);
  REQUIRE(rep.ok());
  for (const auto& e : rep.table) CHECK(e.cls.value == eval_predicate(pd, p, e.input));
}

// Fully independent evaluation for two-symbol protocols over A and B.
Predicate random_predicate(std::mt19937& rng, int depth) {
  int pick = depth == 0 ? int(rng() % 2) : int(rng() % 5);
  auto coeffs = [&] {
    std::map<std::string, std::int64_t> c;
    c["A"] = std::int64_t(rng() % 9) - 4;
    c["B"] = std::int64_t(rng() % 9) - 4;
    return c;
  };
  switch (pick) {
    case 0: return Predicate::threshold(coeffs(), std::int64_t(rng() % 11) - 5);
    case 1: return Predicate::remainder(coeffs(), std::int64_t(rng() % 7) - 3, 2 + std::int64_t(rng() % 4));
    case 2: return Predicate::negation(random_predicate(rng, depth - 1));
    case 3: return Predicate::conjunction(random_predicate(rng, depth - 1), random_predicate(rng, depth - 1));
    default: return Predicate::disjunction(random_predicate(rng, depth - 1), random_predicate(rng, depth - 1));
  }
}

}  // namespace

TEST_SUITE("correctness") {
  TEST_CASE("predicate evaluation") {
    Protocol m = gen_majority();
    CHECK_FALSE(eval_predicate(majority_predicate(), m, input(m, {{"A", 2}, {"B", 1}})));
    CHECK(eval_predicate(majority_predicate(), m, input(m, {{"A", 2}, {"B", 2}})));
    Protocol f = gen_flock_cms(2);
    Predicate even = Predicate::remainder({{"x", 1}}, 0, 2);
    CHECK(eval_predicate(even, f, input(f, {{"x", 4}})));
    CHECK_FALSE(eval_predicate(even, f, input(f, {{"x", 5}})));
    Predicate neg = Predicate::remainder({{"x", -1}}, 1, 3);
    CHECK(eval_predicate(neg, f, input(f, {{"x", 2}})));
    for (std::uint64_t k = 2; k < 8; ++k)
      CHECK_FALSE(eval_predicate(Predicate::conjunction(even, Predicate::negation(even)), f, input(f, {{"x", k}})));
    CHECK(floor_mod(-7, 3) == 2);
  }

  TEST_CASE("majority computes at least as many B as A") {
    Protocol p = gen_majority();
    auto r = check_correctness(p, majority_predicate(), consensus_options());
    CHECK(r.kind == CorrectnessResult::Kind::Holds);
    oracle_agrees(p, majority_predicate(), 6);
  }

  TEST_CASE("broadcast computes some top") {
    Protocol p = gen_broadcast();
    Predicate some_top = Predicate::threshold({{"top", -1}}, 0);
    CHECK(some_top == broadcast_predicate());
    auto r = check_correctness(p, some_top, consensus_options());
    CHECK(r.kind == CorrectnessResult::Kind::Holds);
    oracle_agrees(p, some_top, 6);
  }

  TEST_CASE("remainder modulo five") {
    RemainderSpec s = RemainderSpec::benchmark(5, 1);
    Protocol p = gen_remainder(s);
    auto r = check_correctness(p, remainder_predicate(s), consensus_options());
    CHECK(r.kind == CorrectnessResult::Kind::Holds);
    oracle_agrees(p, remainder_predicate(s), 5);
  }

  TEST_CASE("flock of birds with four") {
    Protocol p = gen_flock_cms(4);
    Predicate at_least = Predicate::negation(Predicate::threshold({{"x", 1}}, 4));
    auto r = check_correctness(p, at_least, consensus_options());
    CHECK(r.kind == CorrectnessResult::Kind::Holds);
    oracle_agrees(p, at_least, 6);
  }

  TEST_CASE("negated majority yields an oracle-confirmed counterexample") {
    Protocol p = gen_majority();
    Predicate wrong = Predicate::negation(majority_predicate());
    auto r = check_correctness(p, wrong, consensus_options());
    REQUIRE(r.kind == CorrectnessResult::Kind::Fails);
    CHECK(audit_correctness(p, wrong, r));
    CHECK(r.expected == eval_predicate(wrong, p, r.input));
    CHECK(r.c0 == initialize(p, r.input));
    auto cls = classify_input(p, r.input);
    REQUIRE(cls.kind == InputClassification::Kind::Stabilizes);
    CHECK(cls.value != eval_predicate(wrong, p, r.input));

    auto bad = r;
    bad.expected = !bad.expected;
    CHECK_FALSE(audit_correctness(p, wrong, bad));
  }

  TEST_CASE("wrong flock threshold yields a counterexample") {
    Protocol p = gen_flock_cms(4);
    Predicate at_least3 = Predicate::negation(Predicate::threshold({{"x", 1}}, 3));
    auto r = check_correctness(p, at_least3, consensus_options());
    REQUIRE(r.kind == CorrectnessResult::Kind::Fails);
    CHECK(audit_correctness(p, at_least3, r));
    auto cls = classify_input(p, r.input);
    REQUIRE(cls.kind == InputClassification::Kind::Stabilizes);
    CHECK(cls.value != eval_predicate(at_least3, p, r.input));
  }

  TEST_CASE("encoding agrees with evaluation") {
    std::mt19937 rng(61);
    Protocol p = gen_majority();
    int truths = 0;
    for (int round = 0; round < 60; ++round) {
      Predicate pd = random_predicate(rng, 2);
      InputAssignment x = input(p, {{"A", rng() % 7}, {"B", rng() % 7}});
      smt::Session s(solver(), smt::Logic::QF_LIA);
      std::vector<smt::Var> vars;
      for (std::size_t i = 0; i < p.num_symbols(); ++i) {
        vars.push_back(s.declare("X" + std::to_string(i), smt::Sort::Nat));
        s.add(smt::eq(vars.back(), std::int64_t(x.counts[i])));
      }
      auto enc = encode_predicate(s, p, pd, vars);
      s.add(enc.side);
      s.push();
      s.add(enc.phi);
      bool sat_pos = s.check().status == smt::Status::Sat;
      s.pop();
      s.add(!enc.phi);
      bool sat_neg = s.check().status == smt::Status::Sat;
      bool want = eval_predicate(pd, p, x);
      CAPTURE(to_string(pd));
      CAPTURE(x.counts);
      CHECK(sat_pos == want);
      CHECK(sat_neg == !want);
      truths += want;
    }
    CHECK(truths > 5);
    CHECK(truths < 55);
  }
}
