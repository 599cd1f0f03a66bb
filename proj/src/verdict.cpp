#include "ppv/verdict.hpp"

#include <algorithm>

#include "ppv/format.hpp"

namespace ppv {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

const char* to_string(Verdict::Kind k) {
  switch (k) {
    case Verdict::Kind::Holds: return "holds";
    case Verdict::Kind::Fails: return "fails";
    case Verdict::Kind::Unknown: return "unknown";
  }
  return "?";
}

int exit_code(Verdict::Kind k) {
  switch (k) {
    case Verdict::Kind::Holds: return 0;
    case Verdict::Kind::Fails: return 1;
    case Verdict::Kind::Unknown: return 2;
  }
  return 2;
}

Verdict::Kind combine(const Verdict& v) {
  bool unknown = false, fails = false;
  if (v.layered) {
    fails |= v.layered->kind == LayeredResult::Kind::None;
    unknown |= v.layered->kind == LayeredResult::Kind::Unknown;
  }
  if (v.consensus) {
    fails |= v.consensus->kind == ConsensusVerdict::Kind::Fails;
    unknown |= v.consensus->kind == ConsensusVerdict::Kind::Unknown;
  }
  if (v.correctness) {
    fails |= v.correctness->kind == CorrectnessResult::Kind::Fails;
    unknown |= v.correctness->kind == CorrectnessResult::Kind::Unknown;
  }
  return fails ? Verdict::Kind::Fails : unknown ? Verdict::Kind::Unknown : Verdict::Kind::Holds;
}

// --- writing ------------------------------------------------------------------

namespace {

ordered_json transition_ref(const Protocol& p, TransitionId t) {
  const auto& tr = p.transition(t);
  ordered_json j;
  j["name"] = tr.name;
  j["pre"] = {p.state_name(tr.p), p.state_name(tr.q)};
  j["post"] = {p.state_name(tr.p2), p.state_name(tr.q2)};
  return j;
}

ordered_json config_json(const Protocol& p, const Configuration& c) {
  ordered_json j = ordered_json::object();
  for (const auto& [q, n] : c.entries()) j[p.state_name(q)] = n;
  return j;
}

ordered_json flow_json(const Protocol& p, const FlowAssignment& x) {
  ordered_json j = ordered_json::array();
  for (std::size_t t = 0; t < x.x.size(); ++t) {
    if (!x.x[t]) continue;
    ordered_json e = transition_ref(p, TransitionId(t));
    e["count"] = x.x[t];
    j.push_back(e);
  }
  return j;
}

ordered_json sets_json(const Protocol& p, const std::vector<StateSet>& sets) {
  ordered_json j = ordered_json::array();
  for (const auto& s : sets) {
    ordered_json names = ordered_json::array();
    for (State q : s) names.push_back(p.state_name(q));
    j.push_back(names);
  }
  return j;
}

ordered_json stats_json(const smt::Stats& s) {
  ordered_json j;
  j["checks"] = s.checks;
  j["solver_seconds"] = s.solver_seconds;
  j["script_bytes"] = s.script_bytes;
  return j;
}

ordered_json reach_json(const Protocol& p, const ReachabilityCheck& r) {
  ordered_json j;
  j["ok"] = r.ok();
  if (!r.ok()) {
    j["condition"] = std::string(1, r.failed);
    j["witness"] = sets_json(p, {r.witness})[0];
  }
  return j;
}

ordered_json layered_json(const Protocol& p, const LayeredResult& r) {
  ordered_json j;
  j["kind"] = to_string(r.kind);
  j["k_tried"] = r.k_tried;
  if (r.kind == LayeredResult::Kind::Found) {
    ordered_json layers = ordered_json::array();
    for (const auto& layer : r.partition.layers) {
      ordered_json l = ordered_json::array();
      for (TransitionId t : layer) l.push_back(transition_ref(p, t));
      layers.push_back(l);
    }
    j["partition"] = layers;
    ordered_json ranking = ordered_json::array();
    for (const auto& y : r.ranking) {
      ordered_json w = ordered_json::object();
      for (std::size_t q = 0; q < y.size(); ++q) w[p.state_name(State(q))] = y[q];
      ranking.push_back(w);
    }
    j["ranking"] = ranking;
  }
  if (!r.reason.empty()) j["reason"] = r.reason;
  j["stats"] = stats_json(r.stats);
  return j;
}

ordered_json consensus_json(const Protocol& p, const ConsensusVerdict& v) {
  ordered_json j;
  j["kind"] = to_string(v.kind);
  j["iterations"] = v.iterations;
  j["traps"] = sets_json(p, v.traps);
  j["siphons"] = sets_json(p, v.siphons);
  if (v.kind == ConsensusVerdict::Kind::Fails) {
    ordered_json ce;
    ce["c0"] = config_json(p, v.c0);
    ce["c1"] = config_json(p, v.c1);
    ce["c2"] = config_json(p, v.c2);
    ce["x1"] = flow_json(p, v.x1);
    ce["x2"] = flow_json(p, v.x2);
    ordered_json a;
    a["initial"] = v.audit.initial;
    a["terminal_c1"] = v.audit.terminal1;
    a["terminal_c2"] = v.audit.terminal2;
    a["true_c1"] = v.audit.true1;
    a["false_c2"] = v.audit.false2;
    a["reach_c1"] = reach_json(p, v.audit.reach1);
    a["reach_c2"] = reach_json(p, v.audit.reach2);
    ce["audit"] = a;
    j["counterexample"] = ce;
  }
  if (!v.reason.empty()) j["reason"] = v.reason;
  j["stats"] = stats_json(v.stats);
  return j;
}

ordered_json correctness_json(const Protocol& p, const CorrectnessResult& r) {
  ordered_json j;
  j["kind"] = to_string(r.kind);
  j["iterations"] = r.iterations;
  j["traps"] = sets_json(p, r.traps);
  j["siphons"] = sets_json(p, r.siphons);
  if (r.kind == CorrectnessResult::Kind::Fails) {
    ordered_json ce;
    ordered_json in = ordered_json::object();
    for (std::size_t i = 0; i < r.input.counts.size(); ++i) in[p.symbol_name(Symbol(i))] = r.input.counts[i];
    ce["input"] = in;
    ce["c0"] = config_json(p, r.c0);
    ce["c"] = config_json(p, r.c);
    ce["x"] = flow_json(p, r.x);
    ce["expected"] = r.expected ? 1 : 0;
    j["counterexample"] = ce;
  }
  if (!r.reason.empty()) j["reason"] = r.reason;
  j["stats"] = stats_json(r.stats);
  return j;
}

}  // namespace

std::string serialize_verdict(const Protocol& p, const Verdict& v) {
  ordered_json j;
  j["kind"] = to_string(v.kind);
  j["command"] = v.command;
  j["failing"] = v.failing;
  j["elapsed_seconds"] = v.elapsed_seconds;
  if (v.predicate) j["predicate"] = predicate_to_json(*v.predicate);
  if (v.layered) j["layered"] = layered_json(p, *v.layered);
  if (v.consensus) j["consensus"] = consensus_json(p, *v.consensus);
  if (v.correctness) j["correctness"] = correctness_json(p, *v.correctness);
  return j.dump(2) + "\n";
}

// --- reading ------------------------------------------------------------------

namespace {

[[noreturn]] void schema(const std::string& where, const std::string& msg) {
  throw ParseError(ParseError::Kind::Schema, where, msg);
}

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) schema(where, std::string("missing field '") + key + "'");
  return j.at(key);
}

State state_ref(const Protocol& p, const json& j, const std::string& where) {
  if (!j.is_string()) schema(where, "expected a state name");
  auto q = p.find_state(j.get<std::string>());
  if (!q) throw ParseError(ParseError::Kind::Semantic, where, "unknown state '" + j.get<std::string>() + "'");
  return *q;
}

std::uint64_t natural(const json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    schema(where, "expected a natural number");
  return j.get<std::uint64_t>();
}

TransitionId transition_from(const Protocol& p, const json& j, const std::string& where) {
  const auto& pre = field(j, "pre", where);
  const auto& post = field(j, "post", where);
  if (!pre.is_array() || pre.size() != 2 || !post.is_array() || post.size() != 2)
    schema(where, "transition needs two pre and two post states");
  Pair a(state_ref(p, pre[0], where + "/pre/0"), state_ref(p, pre[1], where + "/pre/1"));
  Pair b(state_ref(p, post[0], where + "/post/0"), state_ref(p, post[1], where + "/post/1"));
  auto t = p.find_transition(a, b);
  if (!t) throw ParseError(ParseError::Kind::Semantic, where, "no such transition in the protocol");
  return *t;
}

Configuration config_from(const Protocol& p, const json& j, const std::string& where) {
  if (!j.is_object()) schema(where, "expected a configuration object");
  Configuration c;
  for (const auto& [name, n] : j.items()) {
    State q = state_ref(p, json(name), where + "/" + name);
    if (auto k = natural(n, where + "/" + name)) c.add(q, k);
  }
  return c;
}

FlowAssignment flow_from(const Protocol& p, const json& j, const std::string& where) {
  if (!j.is_array()) schema(where, "expected a flow list");
  FlowAssignment x(p.num_transitions());
  for (std::size_t i = 0; i < j.size(); ++i) {
    auto w = where + "/" + std::to_string(i);
    x[transition_from(p, j[i], w)] += natural(field(j[i], "count", w), w + "/count");
  }
  return x;
}

std::vector<StateSet> sets_from(const Protocol& p, const json& j, const std::string& where) {
  std::vector<StateSet> out;
  if (!j.is_array()) schema(where, "expected a list of state sets");
  for (std::size_t i = 0; i < j.size(); ++i) {
    StateSet s;
    for (std::size_t k = 0; k < j[i].size(); ++k)
      s.push_back(state_ref(p, j[i][k], where + "/" + std::to_string(i) + "/" + std::to_string(k)));
    std::sort(s.begin(), s.end());
    out.push_back(s);
  }
  return out;
}

smt::Stats stats_from(const json& j) {
  smt::Stats s;
  if (!j.is_object()) return s;
  s.checks = j.value("checks", std::size_t(0));
  s.solver_seconds = j.value("solver_seconds", 0.0);
  s.script_bytes = j.value("script_bytes", std::size_t(0));
  return s;
}

template <class K>
K kind_from(const json& j, const std::string& where, std::initializer_list<std::pair<const char*, K>> names) {
  if (!j.is_string()) schema(where, "expected a verdict kind");
  for (const auto& [n, k] : names)
    if (j.get<std::string>() == n) return k;
  schema(where, "unknown kind '" + j.get<std::string>() + "'");
}

LayeredResult layered_from(const Protocol& p, const json& j) {
  const std::string w = "/layered";
  LayeredResult r;
  r.kind = kind_from<LayeredResult::Kind>(field(j, "kind", w), w + "/kind",
                                          {{"found", LayeredResult::Kind::Found},
                                           {"none", LayeredResult::Kind::None},
                                           {"unknown", LayeredResult::Kind::Unknown}});
  r.k_tried = j.value("k_tried", std::size_t(0));
  r.reason = j.value("reason", std::string());
  r.stats = stats_from(j.value("stats", json::object()));
  if (r.kind == LayeredResult::Kind::Found) {
    const auto& layers = field(j, "partition", w);
    for (std::size_t i = 0; i < layers.size(); ++i) {
      TransitionSet ts;
      for (std::size_t k = 0; k < layers[i].size(); ++k)
        ts.push_back(transition_from(p, layers[i][k], w + "/partition/" + std::to_string(i) + "/" + std::to_string(k)));
      std::sort(ts.begin(), ts.end());
      r.partition.layers.push_back(ts);
    }
    const auto& ranking = field(j, "ranking", w);
    for (std::size_t i = 0; i < ranking.size(); ++i) {
      std::vector<std::uint64_t> y(p.num_states(), 0);
      auto wi = w + "/ranking/" + std::to_string(i);
      if (!ranking[i].is_object()) schema(wi, "expected a state weight object");
      for (const auto& [name, n] : ranking[i].items()) y[idx(state_ref(p, json(name), wi))] = natural(n, wi + "/" + name);
      r.ranking.push_back(y);
    }
  }
  return r;
}

ConsensusVerdict consensus_from(const Protocol& p, const json& j) {
  const std::string w = "/consensus";
  ConsensusVerdict v;
  v.kind = kind_from<ConsensusVerdict::Kind>(field(j, "kind", w), w + "/kind",
                                             {{"holds", ConsensusVerdict::Kind::Holds},
                                              {"fails", ConsensusVerdict::Kind::Fails},
                                              {"unknown", ConsensusVerdict::Kind::Unknown}});
  v.iterations = j.value("iterations", std::size_t(0));
  v.traps = sets_from(p, j.value("traps", json::array()), w + "/traps");
  v.siphons = sets_from(p, j.value("siphons", json::array()), w + "/siphons");
  v.reason = j.value("reason", std::string());
  v.stats = stats_from(j.value("stats", json::object()));
  if (v.kind == ConsensusVerdict::Kind::Fails) {
    const auto& ce = field(j, "counterexample", w);
    auto wc = w + "/counterexample";
    v.c0 = config_from(p, field(ce, "c0", wc), wc + "/c0");
    v.c1 = config_from(p, field(ce, "c1", wc), wc + "/c1");
    v.c2 = config_from(p, field(ce, "c2", wc), wc + "/c2");
    v.x1 = flow_from(p, field(ce, "x1", wc), wc + "/x1");
    v.x2 = flow_from(p, field(ce, "x2", wc), wc + "/x2");
    v.audit = audit(p, v.c0, v.c1, v.c2, v.x1, v.x2);
  }
  return v;
}

CorrectnessResult correctness_from(const Protocol& p, const json& j) {
  const std::string w = "/correctness";
  CorrectnessResult r;
  r.kind = kind_from<CorrectnessResult::Kind>(field(j, "kind", w), w + "/kind",
                                              {{"holds", CorrectnessResult::Kind::Holds},
                                               {"fails", CorrectnessResult::Kind::Fails},
                                               {"unknown", CorrectnessResult::Kind::Unknown}});
  r.iterations = j.value("iterations", std::size_t(0));
  r.traps = sets_from(p, j.value("traps", json::array()), w + "/traps");
  r.siphons = sets_from(p, j.value("siphons", json::array()), w + "/siphons");
  r.reason = j.value("reason", std::string());
  r.stats = stats_from(j.value("stats", json::object()));
  if (r.kind == CorrectnessResult::Kind::Fails) {
    const auto& ce = field(j, "counterexample", w);
    auto wc = w + "/counterexample";
    const auto& in = field(ce, "input", wc);
    if (!in.is_object()) schema(wc + "/input", "expected an input object");
    r.input.counts.assign(p.num_symbols(), 0);
    for (const auto& [name, n] : in.items()) {
      auto s = p.find_symbol(name);
      if (!s) throw ParseError(ParseError::Kind::Semantic, wc + "/input/" + name, "unknown symbol '" + name + "'");
      r.input.counts[idx(*s)] = natural(n, wc + "/input/" + name);
    }
    r.c0 = config_from(p, field(ce, "c0", wc), wc + "/c0");
    r.c = config_from(p, field(ce, "c", wc), wc + "/c");
    r.x = flow_from(p, field(ce, "x", wc), wc + "/x");
    r.expected = natural(field(ce, "expected", wc), wc + "/expected") != 0;
  }
  return r;
}

}  // namespace

Verdict parse_verdict(const Protocol& p, std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(ParseError::Kind::Syntax, "byte " + std::to_string(e.byte), e.what());
  }
  if (!j.is_object()) schema("", "verdict must be an object");
  Verdict v;
  v.kind = kind_from<Verdict::Kind>(field(j, "kind", ""), "/kind",
                                    {{"holds", Verdict::Kind::Holds},
                                     {"fails", Verdict::Kind::Fails},
                                     {"unknown", Verdict::Kind::Unknown}});
  v.command = j.value("command", std::string());
  if (j.contains("failing") && j["failing"].is_array())
    for (const auto& f : j["failing"]) v.failing.push_back(f.get<std::string>());
  v.elapsed_seconds = j.value("elapsed_seconds", 0.0);
  if (j.contains("predicate")) v.predicate = predicate_from_json(j["predicate"]);
  if (j.contains("layered")) v.layered = layered_from(p, j["layered"]);
  if (j.contains("consensus")) v.consensus = consensus_from(p, j["consensus"]);
  if (j.contains("correctness")) v.correctness = correctness_from(p, j["correctness"]);
  return v;
}

ReplayReport replay_verdict(const Protocol& p, const Verdict& v, const smt::SolverOptions& opts) {
  ReplayReport rep;
  auto line = [&](bool ok, const std::string& what) {
    rep.ok &= ok;
    rep.lines.push_back(std::string(ok ? "ok    " : "FAIL  ") + what);
  };
  if (v.layered && v.layered->kind == LayeredResult::Kind::Found) {
    const auto& r = *v.layered;
    bool shape = true;
    try {
      validate_partition(p, r.partition);
    } catch (const std::invalid_argument& e) {
      shape = false;
      line(false, std::string("partition structure: ") + e.what());
    }
    if (shape) {
      line(check_ranking(p, r.partition, r.ranking), "ranking vectors decrease on every non-silent layer transition");
      auto chk = verify_partition(p, r.partition, opts);
      line(chk.ok(), chk.ok() ? "partition passes the cycle and deadness tests"
                              : "partition fails at layer " + std::to_string(chk.layer) + " condition " +
                                    std::string(1, chk.condition));
    }
  }
  if (v.consensus && v.consensus->kind == ConsensusVerdict::Kind::Fails)
    line(audit_counterexample(p, *v.consensus), "consensus counterexample audit");
  if (v.correctness && v.correctness->kind == CorrectnessResult::Kind::Fails) {
    if (!v.predicate)
      line(false, "correctness counterexample without a predicate");
    else
      line(audit_correctness(p, *v.predicate, *v.correctness), "correctness counterexample audit");
  }
  if (rep.lines.empty()) rep.lines.push_back("ok    no replayable certificate in verdict");
  return rep;
}

}  // namespace ppv
