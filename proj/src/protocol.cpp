#include "ppv/protocol.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace ppv {

namespace {

std::string pair_text(const std::vector<std::string>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s + "]";
}

}  // namespace

std::optional<State> Protocol::find_state(const std::string& name) const {
  auto it = state_index_.find(name);
  if (it == state_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<Symbol> Protocol::find_symbol(const std::string& name) const {
  auto it = std::lower_bound(alphabet_.begin(), alphabet_.end(), name);
  if (it == alphabet_.end() || *it != name) return std::nullopt;
  return Symbol(it - alphabet_.begin());
}

State Protocol::state(const std::string& name) const {
  if (auto s = find_state(name)) return *s;
  throw std::out_of_range("unknown state '" + name + "'");
}

Symbol Protocol::symbol(const std::string& name) const {
  if (auto s = find_symbol(name)) return *s;
  throw std::out_of_range("unknown input symbol '" + name + "'");
}

std::optional<TransitionId> Protocol::find_transition(Pair pre, Pair post) const {
  auto it = by_effect_.find({pre, post});
  if (it == by_effect_.end()) return std::nullopt;
  return it->second;
}

std::optional<TransitionId> Protocol::find_transition(const std::string& name) const {
  for (std::size_t i = 0; i < transitions_.size(); ++i)
    if (transitions_[i].name == name) return TransitionId(i);
  // A collapsed duplicate keeps its own name here.
  for (const auto& t : declared_)
    if (t.name == name) return find_transition(t.pre(), t.post());
  return std::nullopt;
}

std::vector<State> Protocol::initial_states() const {
  std::vector<State> out(input_.begin(), input_.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Configuration Protocol::config(
    std::initializer_list<std::pair<std::string, std::uint64_t>> counts) const {
  Configuration c;
  for (const auto& [name, n] : counts) c.add(state(name), n);
  return c;
}

ProtocolSpec Protocol::to_spec() const {
  ProtocolSpec spec;
  spec.states = state_names_;
  for (const auto& t : declared_) {
    ProtocolSpec::RawTransition raw;
    if (!t.name.empty()) raw.name = t.name;
    raw.pre = {state_name(t.p), state_name(t.q)};
    raw.post = {state_name(t.p2), state_name(t.q2)};
    spec.transitions.push_back(std::move(raw));
  }
  spec.alphabet = alphabet_;
  for (std::size_t i = 0; i < alphabet_.size(); ++i)
    spec.input[alphabet_[i]] = state_name(input_[i]);
  for (std::size_t i = 0; i < state_names_.size(); ++i)
    spec.output[state_names_[i]] = output_[i] ? 1 : 0;
  return spec;
}

Protocol normalize(const ProtocolSpec& raw) {
  using K = ProtocolError::Kind;
  Protocol p;
  if (raw.states.empty()) throw ProtocolError(K::EmptyStateSet, "", "protocol has no states");

  p.state_names_ = raw.states;
  std::sort(p.state_names_.begin(), p.state_names_.end());
  for (std::size_t i = 0; i + 1 < p.state_names_.size(); ++i)
    if (p.state_names_[i] == p.state_names_[i + 1])
      throw ProtocolError(K::DuplicateState, p.state_names_[i],
                          "duplicate state '" + p.state_names_[i] + "'");
  for (std::size_t i = 0; i < p.state_names_.size(); ++i)
    p.state_index_.emplace(p.state_names_[i], State(i));

  if (raw.alphabet.empty()) throw ProtocolError(K::EmptyAlphabet, "", "input alphabet is empty");
  p.alphabet_ = raw.alphabet;
  std::sort(p.alphabet_.begin(), p.alphabet_.end());
  for (std::size_t i = 0; i + 1 < p.alphabet_.size(); ++i)
    if (p.alphabet_[i] == p.alphabet_[i + 1])
      throw ProtocolError(K::DuplicateSymbol, p.alphabet_[i],
                          "duplicate input symbol '" + p.alphabet_[i] + "'");

  for (std::size_t n = 0; n < raw.transitions.size(); ++n) {
    const auto& rt = raw.transitions[n];
    const std::string label = rt.name ? *rt.name : "#" + std::to_string(n);
    if (rt.pre.size() != 2 || rt.post.size() != 2)
      throw ProtocolError(K::NonBinaryTransition, label,
                          "transition " + label + " must have exactly two pre and two post states, got " +
                              pair_text(rt.pre) + " -> " + pair_text(rt.post));
    auto lookup = [&](const std::string& s) {
      auto st = p.find_state(s);
      if (!st)
        throw ProtocolError(K::UnknownStateInTransition, s,
                            "transition " + label + " refers to undeclared state '" + s + "'");
      return *st;
    };
    Transition t;
    t.name = rt.name.value_or("");
    t.p = lookup(rt.pre[0]);
    t.q = lookup(rt.pre[1]);
    t.p2 = lookup(rt.post[0]);
    t.q2 = lookup(rt.post[1]);
    p.declared_.push_back(std::move(t));
  }

  // One semantic transition per (pre, post) multiset pair; the first
  // declaration provides the name.
  std::map<std::pair<Pair, Pair>, Transition> unique;
  for (const auto& t : p.declared_) unique.try_emplace({t.pre(), t.post()}, t);
  for (auto& [key, t] : unique) {
    if (t.name.empty())
      t.name = p.state_name(t.p) + "," + p.state_name(t.q) + "->" + p.state_name(t.p2) + "," +
               p.state_name(t.q2);
    auto id = TransitionId(p.transitions_.size());
    p.by_effect_.emplace(key, id);
    if (!t.silent()) p.nonsilent_.push_back(id);
    p.transitions_.push_back(t);
  }

  std::set<Pair> covered;
  for (const auto& t : p.transitions_) covered.insert(t.pre());
  for (std::size_t a = 0; a < p.num_states(); ++a)
    for (std::size_t b = a; b < p.num_states(); ++b) {
      Pair pr{State(a), State(b)};
      if (!covered.count(pr)) p.implicit_silent_.push_back(pr);
    }

  p.input_.resize(p.alphabet_.size());
  for (std::size_t i = 0; i < p.alphabet_.size(); ++i) {
    auto it = raw.input.find(p.alphabet_[i]);
    if (it == raw.input.end())
      throw ProtocolError(K::IncompleteInputMap, p.alphabet_[i],
                          "input map has no entry for symbol '" + p.alphabet_[i] + "'");
    auto st = p.find_state(it->second);
    if (!st)
      throw ProtocolError(K::UnknownStateInTransition, it->second,
                          "input map sends '" + p.alphabet_[i] + "' to undeclared state '" +
                              it->second + "'");
    p.input_[i] = *st;
  }
  for (const auto& [sym, st] : raw.input)
    if (!p.find_symbol(sym))
      throw ProtocolError(K::IncompleteInputMap, sym, "input map mentions unknown symbol '" + sym + "'");

  p.output_.resize(p.num_states());
  for (std::size_t i = 0; i < p.num_states(); ++i) {
    auto it = raw.output.find(p.state_names_[i]);
    if (it == raw.output.end())
      throw ProtocolError(K::IncompleteOutputMap, p.state_names_[i],
                          "output map has no entry for state '" + p.state_names_[i] + "'");
    if (it->second != 0 && it->second != 1)
      throw ProtocolError(K::InvalidOutput, p.state_names_[i],
                          "output of state '" + p.state_names_[i] + "' must be 0 or 1");
    p.output_[i] = it->second == 1;
  }
  for (const auto& [st, o] : raw.output)
    if (!p.find_state(st))
      throw ProtocolError(K::IncompleteOutputMap, st, "output map mentions unknown state '" + st + "'");
  return p;
}

// ---------------------------------------------------------------------------

std::uint64_t Configuration::count(State q) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), q,
                             [](const Entry& e, State s) { return e.first < s; });
  return it != entries_.end() && it->first == q ? it->second : 0;
}

std::uint64_t Configuration::size() const {
  std::uint64_t n = 0;
  for (const auto& e : entries_) n += e.second;
  return n;
}

void Configuration::add(State q, std::uint64_t n) {
  if (n == 0) return;
  auto it = std::lower_bound(entries_.begin(), entries_.end(), q,
                             [](const Entry& e, State s) { return e.first < s; });
  if (it != entries_.end() && it->first == q)
    it->second += n;
  else
    entries_.insert(it, {q, n});
}

void Configuration::remove(State q, std::uint64_t n) {
  if (n == 0) return;
  auto it = std::lower_bound(entries_.begin(), entries_.end(), q,
                             [](const Entry& e, State s) { return e.first < s; });
  if (it == entries_.end() || it->first != q || it->second < n)
    throw std::invalid_argument("not enough agents to remove");
  it->second -= n;
  if (it->second == 0) entries_.erase(it);
}

bool Configuration::covers(Pair pre) const {
  if (pre.lo == pre.hi) return count(pre.lo) >= 2;
  return count(pre.lo) >= 1 && count(pre.hi) >= 1;
}

std::vector<State> Configuration::support() const {
  std::vector<State> s;
  s.reserve(entries_.size());
  for (const auto& e : entries_) s.push_back(e.first);
  return s;
}

std::size_t ConfigurationHash::operator()(const Configuration& c) const noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (const auto& [q, n] : c.entries()) {
    h ^= idx(q) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= std::hash<std::uint64_t>{}(n) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

Configuration operator+(Configuration a, const Configuration& b) {
  for (const auto& [q, n] : b.entries()) a.add(q, n);
  return a;
}

std::uint64_t InputAssignment::size() const {
  std::uint64_t n = 0;
  for (auto v : counts) n += v;
  return n;
}

Configuration step(const Configuration& c, const Transition& t) {
  if (!c.covers(t.pre())) {
    std::vector<State> missing;
    Pair pre = t.pre();
    if (pre.lo == pre.hi) {
      for (auto have = c.count(pre.lo); have < 2; ++have) missing.push_back(pre.lo);
    } else {
      if (c.count(pre.lo) == 0) missing.push_back(pre.lo);
      if (c.count(pre.hi) == 0) missing.push_back(pre.hi);
    }
    throw NotEnabled("transition " + t.name + " is not enabled: " + std::to_string(missing.size()) +
                         " agent(s) missing",
                     std::move(missing));
  }
  if (t.silent()) return c;
  Configuration out = c;
  out.remove(t.p);
  out.remove(t.q);
  out.add(t.p2);
  out.add(t.q2);
  return out;
}

std::vector<Transition> enabled_transitions(const Protocol& p, const Configuration& c) {
  std::vector<Transition> out;
  for (const auto& t : p.transitions())
    if (c.covers(t.pre())) out.push_back(t);
  for (const auto& pr : p.implicit_silent())
    if (c.covers(pr)) {
      Transition t;
      t.p = t.p2 = pr.lo;
      t.q = t.q2 = pr.hi;
      t.implicit = true;
      out.push_back(t);
    }
  return out;
}

bool is_terminal(const Protocol& p, const Configuration& c) {
  for (auto id : p.nonsilent())
    if (c.covers(p.transition(id).pre())) return false;
  return true;
}

std::optional<bool> consensus_output(const Protocol& p, const Configuration& c) {
  std::optional<bool> out;
  for (const auto& [q, n] : c.entries()) {
    bool o = p.output(q);
    if (out && *out != o) return std::nullopt;
    out = o;
  }
  return out;
}

Configuration initialize(const Protocol& p, const InputAssignment& x) {
  if (x.counts.size() != p.num_symbols())
    throw std::invalid_argument("input assignment does not match the alphabet");
  if (x.size() < 2)
    throw InputTooSmall("input must contain at least two agents, got " + std::to_string(x.size()));
  Configuration c;
  for (std::size_t i = 0; i < x.counts.size(); ++i) c.add(p.input(Symbol(i)), x.counts[i]);
  return c;
}

std::string to_string(const Protocol& p, const Configuration& c) {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (const auto& [q, n] : c.entries()) {
    os << (first ? "" : ", ") << p.state_name(q) << ":" << n;
    first = false;
  }
  os << "}";
  return os.str();
}

std::string to_string(const Protocol& p, const Transition& t) {
  return "(" + p.state_name(t.p) + ", " + p.state_name(t.q) + ") -> (" + p.state_name(t.p2) + ", " +
         p.state_name(t.q2) + ")";
}

}  // namespace ppv
