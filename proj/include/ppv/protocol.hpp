#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ppv {

/// Index of a state inside a protocol. States are numbered in lexicographic
/// order of their names.
enum class State : std::uint32_t {};
/// Index of a semantic (deduplicated) transition inside a protocol.
enum class TransitionId : std::uint32_t {};
/// Index of an input symbol. Symbols are numbered in lexicographic order.
enum class Symbol : std::uint32_t {};

constexpr std::size_t idx(State s) { return static_cast<std::size_t>(s); }
constexpr std::size_t idx(TransitionId t) { return static_cast<std::size_t>(t); }
constexpr std::size_t idx(Symbol s) { return static_cast<std::size_t>(s); }

/// Multiset of exactly two states, stored sorted.
struct Pair {
  State lo{};
  State hi{};

  Pair() = default;
  Pair(State a, State b) : lo(a < b ? a : b), hi(a < b ? b : a) {}

  int count(State q) const { return int(lo == q) + int(hi == q); }
  bool contains(State q) const { return lo == q || hi == q; }

  friend auto operator<=>(const Pair&, const Pair&) = default;
  friend bool operator==(const Pair&, const Pair&) = default;
};

struct Transition {
  std::string name;  // empty for implicit silent transitions
  State p{}, q{};    // ordered pre endpoints as declared
  State p2{}, q2{};  // ordered post endpoints as declared
  bool implicit = false;

  Pair pre() const { return {p, q}; }
  Pair post() const { return {p2, q2}; }
  bool silent() const { return pre() == post(); }
  /// post(t)(s) - pre(t)(s)
  int effect(State s) const { return post().count(s) - pre().count(s); }
};

/// Raw, name-based protocol description as read from a document.
struct ProtocolSpec {
  struct RawTransition {
    std::optional<std::string> name;
    std::vector<std::string> pre;
    std::vector<std::string> post;
    friend bool operator==(const RawTransition&, const RawTransition&) = default;
  };
  std::vector<std::string> states;
  std::vector<RawTransition> transitions;
  std::vector<std::string> alphabet;
  std::map<std::string, std::string> input;
  std::map<std::string, int> output;
  friend bool operator==(const ProtocolSpec&, const ProtocolSpec&) = default;
};

class ProtocolError : public std::runtime_error {
 public:
  enum class Kind {
    DuplicateState,
    DuplicateSymbol,
    UnknownStateInTransition,
    NonBinaryTransition,
    EmptyAlphabet,
    EmptyStateSet,
    IncompleteInputMap,
    IncompleteOutputMap,
    InvalidOutput,
  };
  ProtocolError(Kind kind, std::string element, const std::string& what)
      : std::runtime_error(what), kind_(kind), element_(std::move(element)) {}
  Kind kind() const { return kind_; }
  /// The offending state, symbol or transition.
  const std::string& element() const { return element_; }

 private:
  Kind kind_;
  std::string element_;
};

class Configuration;

/// A population protocol (Q, T, Sigma, I, O) after implicit-silent
/// completion. Immutable once built.
class Protocol {
 public:
  std::size_t num_states() const { return state_names_.size(); }
  /// Distinct declared transitions. Implicit silent pairs are not indexed.
  std::size_t num_transitions() const { return transitions_.size(); }
  std::size_t num_symbols() const { return alphabet_.size(); }

  const std::string& state_name(State s) const { return state_names_[idx(s)]; }
  const std::string& symbol_name(Symbol s) const { return alphabet_[idx(s)]; }
  const std::vector<std::string>& state_names() const { return state_names_; }
  const std::vector<std::string>& alphabet() const { return alphabet_; }
  std::optional<State> find_state(const std::string& name) const;
  std::optional<Symbol> find_symbol(const std::string& name) const;
  /// Throws std::out_of_range for unknown names.
  State state(const std::string& name) const;
  Symbol symbol(const std::string& name) const;

  /// Deduplicated transitions (one per distinct (pre, post) multiset pair),
  /// sorted by (pre, post). Includes declared silent transitions.
  const std::vector<Transition>& transitions() const { return transitions_; }
  const Transition& transition(TransitionId t) const { return transitions_[idx(t)]; }
  /// Non-silent transitions, in order.
  const std::vector<TransitionId>& nonsilent() const { return nonsilent_; }
  std::size_t nonsilent_count() const { return nonsilent_.size(); }
  /// Declared transitions exactly as written, in input order.
  const std::vector<Transition>& declared() const { return declared_; }
  /// State pairs with no declared transition; each carries a silent one.
  const std::vector<Pair>& implicit_silent() const { return implicit_silent_; }
  std::optional<TransitionId> find_transition(Pair pre, Pair post) const;
  /// Looks a transition up by its name (first declaration wins).
  std::optional<TransitionId> find_transition(const std::string& name) const;

  State input(Symbol s) const { return input_[idx(s)]; }
  bool output(State s) const { return output_[idx(s)]; }
  /// States in I(Sigma).
  std::vector<State> initial_states() const;

  /// Builds a configuration from (state name, count) pairs.
  Configuration config(std::initializer_list<std::pair<std::string, std::uint64_t>> counts) const;

  /// Name-based description that rebuilds an equal protocol.
  ProtocolSpec to_spec() const;

  friend Protocol normalize(const ProtocolSpec& raw);

 private:
  std::vector<std::string> state_names_;
  std::map<std::string, State, std::less<>> state_index_;
  std::vector<std::string> alphabet_;
  std::vector<Transition> declared_;
  std::vector<Transition> transitions_;
  std::vector<TransitionId> nonsilent_;
  std::vector<Pair> implicit_silent_;
  std::map<std::pair<Pair, Pair>, TransitionId> by_effect_;
  std::vector<State> input_;
  std::vector<bool> output_;
};

/// Validates a raw protocol and completes it with implicit silent transitions
/// for every state pair without a declared transition.
Protocol normalize(const ProtocolSpec& raw);

/// Sparse multiset of states. Entries are sorted by state and never zero.
class Configuration {
 public:
  using Entry = std::pair<State, std::uint64_t>;

  Configuration() = default;

  std::uint64_t count(State q) const;
  std::uint64_t size() const;
  bool empty() const { return entries_.empty(); }
  void add(State q, std::uint64_t n = 1);
  /// Throws std::invalid_argument if fewer than n agents are in q.
  void remove(State q, std::uint64_t n = 1);
  bool covers(Pair pre) const;
  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<State> support() const;

  friend bool operator==(const Configuration&, const Configuration&) = default;
  friend auto operator<=>(const Configuration&, const Configuration&) = default;

 private:
  std::vector<Entry> entries_;
};

struct ConfigurationHash {
  std::size_t operator()(const Configuration& c) const noexcept;
};

Configuration operator+(Configuration a, const Configuration& b);

/// Counts per input symbol, dense over the alphabet.
struct InputAssignment {
  std::vector<std::uint64_t> counts;
  std::uint64_t size() const;
  friend bool operator==(const InputAssignment&, const InputAssignment&) = default;
  friend auto operator<=>(const InputAssignment&, const InputAssignment&) = default;
};

class NotEnabled : public std::invalid_argument {
 public:
  NotEnabled(const std::string& what, std::vector<State> missing)
      : std::invalid_argument(what), missing_(std::move(missing)) {}
  /// One entry per missing agent.
  const std::vector<State>& missing() const { return missing_; }

 private:
  std::vector<State> missing_;
};

class InputTooSmall : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// C - pre(t) + post(t). Throws NotEnabled unless pre(t) <= C.
Configuration step(const Configuration& c, const Transition& t);

/// Declared and implicit transitions with pre <= C.
std::vector<Transition> enabled_transitions(const Protocol& p, const Configuration& c);

bool is_terminal(const Protocol& p, const Configuration& c);

/// The common output of all supported states, if they agree.
std::optional<bool> consensus_output(const Protocol& p, const Configuration& c);

/// I(X). Throws InputTooSmall if |X| < 2.
Configuration initialize(const Protocol& p, const InputAssignment& x);

std::string to_string(const Protocol& p, const Configuration& c);
std::string to_string(const Protocol& p, const Transition& t);

}  // namespace ppv
