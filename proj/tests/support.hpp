#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ppv/consensus.hpp"
#include "ppv/families.hpp"
#include "ppv/layered.hpp"
#include "ppv/protocol.hpp"
#include "ppv/smt.hpp"
#include "ppv/structural.hpp"

namespace ppv::test {

using Raw = ProtocolSpec::RawTransition;

inline smt::SolverOptions solver() { return smt::default_solver_options(); }

inline ConsensusOptions consensus_options() { return ConsensusOptions{solver(), std::nullopt}; }

inline LayeredOptions layered_options() { return LayeredOptions{solver(), std::nullopt}; }

// p (output 0), q (output 1), identity input, nothing declared.
inline Protocol two_state() {
  ProtocolSpec s;
  s.states = {"p", "q"};
  s.alphabet = {"p", "q"};
  s.input = {{"p", "p"}, {"q", "q"}};
  s.output = {{"p", 0}, {"q", 1}};
  return normalize(s);
}

// Majority plus b' with (b,b) -> (b',b') and back.
inline Protocol ping_pong_majority() {
  ProtocolSpec s = gen_majority().to_spec();
  s.states.push_back("b'");
  s.output["b'"] = 1;
  s.transitions.push_back(Raw{"t_bb", {"b", "b"}, {"b'", "b'"}});
  s.transitions.push_back(Raw{"t_b'b'", {"b'", "b'"}, {"b", "b"}});
  return normalize(s);
}

// Only the two ping-pong transitions over b and b'.
inline Protocol ping_pong() {
  ProtocolSpec s;
  s.states = {"b", "b'"};
  s.transitions = {Raw{"fwd", {"b", "b"}, {"b'", "b'"}}, Raw{"back", {"b'", "b'"}, {"b", "b"}}};
  s.alphabet = {"b"};
  s.input = {{"b", "b"}};
  s.output = {{"b", 1}, {"b'", 1}};
  return normalize(s);
}

inline TransitionId tid(const Protocol& p, const std::string& name) { return *p.find_transition(name); }

inline TransitionSet tset(const Protocol& p, std::initializer_list<const char*> names) {
  TransitionSet out;
  for (const char* n : names) out.push_back(tid(p, n));
  std::sort(out.begin(), out.end());
  return out;
}

inline StateSet sset(const Protocol& p, std::initializer_list<const char*> names) {
  StateSet out;
  for (const char* n : names) out.push_back(p.state(n));
  std::sort(out.begin(), out.end());
  return out;
}

// Random protocol over states s0..s{n-1}; inputs are the first `inputs` states.
inline Protocol random_protocol(std::mt19937& rng, std::size_t n, std::size_t transitions, std::size_t inputs = 2) {
  std::uniform_int_distribution<std::size_t> st(0, n - 1);
  ProtocolSpec s;
  for (std::size_t i = 0; i < n; ++i) {
    s.states.push_back("s" + std::to_string(i));
    s.output[s.states.back()] = int(rng() % 2);
  }
  for (std::size_t k = 0; k < transitions; ++k) {
    auto name = [&] { return s.states[st(rng)]; };
    s.transitions.push_back(Raw{std::nullopt, {name(), name()}, {name(), name()}});
  }
  inputs = std::min(inputs, n);
  for (std::size_t i = 0; i < inputs; ++i) {
    s.alphabet.push_back("i" + std::to_string(i));
    s.input[s.alphabet.back()] = s.states[i];
  }
  return normalize(s);
}

inline std::vector<TransitionSet> subsets(const TransitionSet& all) {
  std::vector<TransitionSet> out;
  for (std::size_t mask = 0; mask < (std::size_t(1) << all.size()); ++mask) {
    TransitionSet u;
    for (std::size_t i = 0; i < all.size(); ++i)
      if (mask >> i & 1) u.push_back(all[i]);
    out.push_back(u);
  }
  return out;
}

inline std::vector<StateSet> state_subsets(const StateSet& all) {
  std::vector<StateSet> out;
  for (std::size_t mask = 0; mask < (std::size_t(1) << all.size()); ++mask) {
    StateSet u;
    for (std::size_t i = 0; i < all.size(); ++i)
      if (mask >> i & 1) u.push_back(all[i]);
    out.push_back(u);
  }
  return out;
}

// Random execution of `steps` non-silent steps from c (stops early at terminal).
// Returns the end configuration and the occurrence count of each transition.
struct Execution {
  Configuration start, end;
  FlowAssignment counts;
  std::vector<TransitionId> word;
};

inline Execution random_execution(const Protocol& p, const Configuration& c, std::size_t steps, std::mt19937& rng) {
  Execution e{c, c, FlowAssignment(p.num_transitions()), {}};
  for (std::size_t k = 0; k < steps; ++k) {
    std::vector<TransitionId> en;
    for (TransitionId t : p.nonsilent())
      if (e.end.covers(p.transition(t).pre())) en.push_back(t);
    if (en.empty()) break;
    TransitionId t = en[rng() % en.size()];
    e.end = step(e.end, p.transition(t));
    e.counts[t] += 1;
    e.word.push_back(t);
  }
  return e;
}

inline Configuration random_config(const Protocol& p, std::size_t agents, std::mt19937& rng) {
  Configuration c;
  for (std::size_t i = 0; i < agents; ++i) c.add(State(rng() % p.num_states()));
  return c;
}

}  // namespace ppv::test
