#include "ppv/cli.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ppv/consensus.hpp"
#include "ppv/correctness.hpp"
#include "ppv/families.hpp"
#include "ppv/format.hpp"
#include "ppv/layered.hpp"
#include "ppv/oracle.hpp"
#include "ppv/verdict.hpp"

namespace ppv::cli {

namespace {

using Clock = std::chrono::steady_clock;
using ordered_json = nlohmann::ordered_json;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct RunConfig {
  std::string protocol_path;
  std::string verdict_path;
  bool no_verdict = false;
  std::string solver;
  std::vector<std::string> solver_args;
  double timeout_secs = 0;
  bool no_incremental = false;
  std::string dump_dir;
  std::string format = "human";
  std::size_t k_max = 0;
  std::size_t max_refinements = 0;
  bool fail_fast = false;
  std::string predicate_path;
  std::size_t max_agents = 6;
  std::size_t cap = kDefaultCap;
  std::size_t jobs = 1;
  // gen / bench
  std::string family;
  std::int64_t param = 0;
  std::int64_t c = 1;
  std::vector<std::int64_t> params;
  bool bench_correct = false;
  std::string out_path;
  std::string replay_verdict;

  bool structured() const { return format == "structured"; }
};

smt::SolverOptions solver_options(const RunConfig& cfg) {
  smt::SolverOptions o = smt::default_solver_options();
  if (!cfg.solver.empty()) o.path = cfg.solver;
  o.args = cfg.solver_args;
  o.timeout = std::chrono::milliseconds(static_cast<long long>(cfg.timeout_secs * 1000));
  o.incremental = !cfg.no_incremental;
  o.dump_dir = cfg.dump_dir;
  if (!smt::resolve_solver(o.path))
    throw smt::SolverError(smt::SolverError::Kind::NotFound,
                           "solver '" + o.path + "' not found; use --solver or set " + smt::kSolverEnv);
  return o;
}

LayeredOptions layered_options(const RunConfig& cfg) {
  LayeredOptions o;
  o.solver = solver_options(cfg);
  if (cfg.k_max) o.k_max = cfg.k_max;
  return o;
}

ConsensusOptions consensus_options(const RunConfig& cfg) {
  ConsensusOptions o;
  o.solver = solver_options(cfg);
  if (cfg.max_refinements) o.max_refinements = cfg.max_refinements;
  return o;
}

std::string transition_label(const Protocol& p, TransitionId t) {
  const auto& tr = p.transition(t);
  return tr.name.empty() ? to_string(p, tr) : tr.name;
}

std::string set_label(const Protocol& p, const StateSet& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + p.state_name(s[i]);
  return out + "}";
}

std::string flow_label(const Protocol& p, const FlowAssignment& x) {
  std::string out;
  for (std::size_t t = 0; t < x.x.size(); ++t)
    if (x.x[t]) out += (out.empty() ? "" : " ") + transition_label(p, TransitionId(t)) + "*" + std::to_string(x.x[t]);
  return out.empty() ? "0" : out;
}

std::string input_label(const Protocol& p, const InputAssignment& x) {
  std::string out;
  for (std::size_t i = 0; i < x.counts.size(); ++i)
    if (x.counts[i]) out += (out.empty() ? "" : " ") + p.symbol_name(Symbol(i)) + "=" + std::to_string(x.counts[i]);
  return out;
}

void print_layered(std::ostream& out, const Protocol& p, const LayeredResult& r) {
  out << "LayeredTermination: ";
  switch (r.kind) {
    case LayeredResult::Kind::Found:
      out << "holds (" << r.partition.layers.size() << " layer" << (r.partition.layers.size() == 1 ? "" : "s")
          << ")\n";
      for (std::size_t i = 0; i < r.partition.layers.size(); ++i) {
        out << "  layer " << i + 1 << ":";
        std::size_t shown = 0;
        for (TransitionId t : r.partition.layers[i]) {
          if (p.transition(t).silent()) continue;
          if (++shown > 12) {
            out << " ...";
            break;
          }
          out << " " << transition_label(p, t);
        }
        out << "\n";
      }
      break;
    case LayeredResult::Kind::None:
      out << "fails (no ordered partition with at most " << r.k_tried << " layers)\n";
      break;
    case LayeredResult::Kind::Unknown:
      out << "unknown (" << (r.reason.empty() ? "solver gave up" : r.reason) << ")\n";
      break;
  }
}

void print_consensus(std::ostream& out, const Protocol& p, const ConsensusVerdict& v) {
  out << "StrongConsensus: " << to_string(v.kind) << " (" << v.iterations << " solver call"
      << (v.iterations == 1 ? "" : "s") << ", " << v.traps.size() << " traps, " << v.siphons.size() << " siphons)\n";
  if (v.kind == ConsensusVerdict::Kind::Fails) {
    out << "  not in WSSS via StrongConsensus; potential reachability over-approximates reachability,\n"
           "  so this does not by itself show the protocol is ill-specified\n";
    out << "  C0 = " << to_string(p, v.c0) << "\n";
    out << "  C1 = " << to_string(p, v.c1) << " via " << flow_label(p, v.x1) << "\n";
    out << "  C2 = " << to_string(p, v.c2) << " via " << flow_label(p, v.x2) << "\n";
    out << "  audit: " << (v.audit.ok() ? "passed" : "FAILED") << "\n";
  } else if (v.kind == ConsensusVerdict::Kind::Unknown) {
    out << "  " << v.reason << "\n";
  }
  for (const auto& t : v.traps) out << "  trap " << set_label(p, t) << "\n";
  for (const auto& s : v.siphons) out << "  siphon " << set_label(p, s) << "\n";
}

void print_correctness(std::ostream& out, const Protocol& p, const Predicate& pd, const CorrectnessResult& r) {
  out << "Correctness (" << to_string(pd) << "): " << to_string(r.kind) << " (" << r.iterations << " solver call"
      << (r.iterations == 1 ? "" : "s") << ", " << r.traps.size() << " traps, " << r.siphons.size() << " siphons)\n";
  if (r.kind == CorrectnessResult::Kind::Fails) {
    out << "  input X: " << input_label(p, r.input) << " (predicate value " << int(r.expected) << ")\n";
    out << "  C0 = " << to_string(p, r.c0) << "\n";
    out << "  C  = " << to_string(p, r.c) << " via " << flow_label(p, r.x) << "\n";
  } else if (r.kind == CorrectnessResult::Kind::Unknown) {
    out << "  " << r.reason << "\n";
  }
}

std::string default_verdict_path(const std::string& protocol_path) {
  std::string base = protocol_path;
  const std::string ext = ".pp.json";
  if (base.size() > ext.size() && base.compare(base.size() - ext.size(), ext.size(), ext) == 0)
    base.resize(base.size() - ext.size());
  else if (auto dot = base.rfind('.'); dot != std::string::npos && dot > base.rfind('/') + 1)
    base.resize(dot);
  return base + ".verdict.json";
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << text;
}

int finish(const RunConfig& cfg, const Protocol& p, Verdict& v, std::ostream& out, std::ostream& err) {
  v.kind = combine(v);
  std::string text = serialize_verdict(p, v);
  if (!cfg.no_verdict) {
    std::string path = cfg.verdict_path.empty() ? default_verdict_path(cfg.protocol_path) : cfg.verdict_path;
    write_file(path, text);
    if (!cfg.structured()) err << "verdict written to " << path << "\n";
  }
  if (cfg.structured()) {
    out << nlohmann::json::parse(text).dump() << "\n";
  } else {
    out << "verdict: " << to_string(v.kind);
    if (!v.failing.empty()) {
      out << " (failing:";
      for (const auto& f : v.failing) out << " " << f;
      out << ")";
    }
    out << ", " << std::fixed << std::setprecision(2) << v.elapsed_seconds << " s\n";
    out.unsetf(std::ios::floatfield);
  }
  return exit_code(v.kind);
}

struct Loaded {
  Protocol protocol;
  std::optional<Predicate> predicate;
};

Loaded load(const RunConfig& cfg) {
  auto doc = read_protocol_file(cfg.protocol_path);
  Loaded l{normalize(doc.protocol), doc.predicate};
  if (!cfg.predicate_path.empty()) {
    auto text = read_text_file(cfg.predicate_path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(ParseError::Kind::Syntax, cfg.predicate_path, e.what());
    }
    if (j.is_object() && j.contains("predicate")) j = j["predicate"];
    l.predicate = predicate_from_json(j, "");
    for (const auto& s : predicate_symbols(*l.predicate))
      if (!l.protocol.find_symbol(s))
        throw ParseError(ParseError::Kind::Semantic, cfg.predicate_path, "predicate mentions unknown symbol '" + s + "'");
  }
  return l;
}

void print_header(std::ostream& out, const RunConfig& cfg, const Protocol& p) {
  if (cfg.structured()) return;
  out << "protocol: " << cfg.protocol_path << "  |Q|=" << p.num_states() << " |T|=" << p.nonsilent_count() << "\n";
}

int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  auto l = load(cfg);
  const Protocol& p = l.protocol;
  auto t0 = Clock::now();
  Verdict v;
  v.command = "check";
  print_header(out, cfg, p);
  v.layered = find_layered_termination(p, layered_options(cfg));
  if (!cfg.structured()) print_layered(out, p, *v.layered);
  if (v.layered->kind == LayeredResult::Kind::None) v.failing.push_back("LayeredTermination");
  if (!(cfg.fail_fast && v.layered->kind != LayeredResult::Kind::Found)) {
    v.consensus = check_strong_consensus(p, consensus_options(cfg));
    if (!cfg.structured()) print_consensus(out, p, *v.consensus);
    if (v.consensus->kind == ConsensusVerdict::Kind::Fails) v.failing.push_back("StrongConsensus");
  }
  v.elapsed_seconds = seconds_since(t0);
  if (!cfg.structured()) {
    auto k = combine(v);
    if (k == Verdict::Kind::Fails) {
      out << "not in WSSS via";
      for (std::size_t i = 0; i < v.failing.size(); ++i) out << (i ? ", " : " ") << v.failing[i];
      out << "\n";
    } else {
      out << (k == Verdict::Kind::Holds ? "in WSSS\n" : "undecided\n");
    }
  }
  return finish(cfg, p, v, out, err);
}

int cmd_layered(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  auto l = load(cfg);
  auto t0 = Clock::now();
  Verdict v;
  v.command = "layered";
  print_header(out, cfg, l.protocol);
  v.layered = find_layered_termination(l.protocol, layered_options(cfg));
  if (v.layered->kind == LayeredResult::Kind::None) v.failing.push_back("LayeredTermination");
  if (!cfg.structured()) print_layered(out, l.protocol, *v.layered);
  v.elapsed_seconds = seconds_since(t0);
  return finish(cfg, l.protocol, v, out, err);
}

int cmd_consensus(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  auto l = load(cfg);
  auto t0 = Clock::now();
  Verdict v;
  v.command = "consensus";
  print_header(out, cfg, l.protocol);
  v.consensus = check_strong_consensus(l.protocol, consensus_options(cfg));
  if (v.consensus->kind == ConsensusVerdict::Kind::Fails) v.failing.push_back("StrongConsensus");
  if (!cfg.structured()) print_consensus(out, l.protocol, *v.consensus);
  v.elapsed_seconds = seconds_since(t0);
  return finish(cfg, l.protocol, v, out, err);
}

int cmd_correct(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  auto l = load(cfg);
  if (!l.predicate) {
    err << "error: no predicate; embed one in the protocol document or pass --predicate\n";
    return kInputError;
  }
  auto t0 = Clock::now();
  Verdict v;
  v.command = "correct";
  v.predicate = l.predicate;
  print_header(out, cfg, l.protocol);
  v.correctness = check_correctness(l.protocol, *l.predicate, consensus_options(cfg));
  if (v.correctness->kind == CorrectnessResult::Kind::Fails) v.failing.push_back("Correctness");
  if (!cfg.structured()) print_correctness(out, l.protocol, *l.predicate, *v.correctness);
  v.elapsed_seconds = seconds_since(t0);
  return finish(cfg, l.protocol, v, out, err);
}

int cmd_gen(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  auto inst = make_family(cfg.family, cfg.param, cfg.c);
  std::string text = serialize_protocol(to_document(inst.protocol, inst.predicate));
  if (cfg.out_path.empty()) {
    out << text;
  } else {
    write_file(cfg.out_path, text);
    err << inst.label << ": |Q|=" << inst.protocol.num_states() << " |T|=" << inst.protocol.nonsilent_count()
        << " written to " << cfg.out_path << "\n";
  }
  return kHolds;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  auto l = load(cfg);
  const Protocol& p = l.protocol;
  auto rep = oracle_well_specified(p, cfg.max_agents, cfg.cap, cfg.jobs);
  std::size_t mismatches = 0;
  for (const auto& e : rep.table) {
    std::optional<bool> expected;
    if (l.predicate) expected = eval_predicate(*l.predicate, p, e.input);
    bool stab = e.cls.kind == InputClassification::Kind::Stabilizes;
    bool match = !expected || (stab && e.cls.value == *expected);
    if (!match) ++mismatches;
    if (cfg.structured()) {
      ordered_json j;
      ordered_json in = ordered_json::object();
      for (std::size_t i = 0; i < e.input.counts.size(); ++i) in[p.symbol_name(Symbol(i))] = e.input.counts[i];
      j["input"] = in;
      j["kind"] = to_string(e.cls.kind);
      if (stab) j["value"] = e.cls.value ? 1 : 0;
      j["silent"] = e.cls.silent;
      j["nodes"] = e.cls.nodes;
      if (expected) j["expected"] = *expected ? 1 : 0;
      out << j.dump() << "\n";
    } else {
      out << std::left << std::setw(40) << input_label(p, e.input) << " " << to_string(e.cls.kind);
      if (stab) out << " " << int(e.cls.value);
      out << (e.cls.silent ? " silent" : " not-silent") << "  (" << e.cls.nodes << " configurations)";
      if (expected) out << (match ? "" : "  MISMATCH, predicate says " + std::to_string(int(*expected)));
      out << "\n";
    }
  }
  if (!cfg.structured()) {
    out << rep.table.size() << " inputs: " << (rep.ok() ? "all stabilize" : "not well-specified")
        << (rep.silent() ? ", all silent" : ", some not silent");
    if (l.predicate) out << ", " << mismatches << " predicate mismatches";
    out << "\n";
  }
  return rep.ok() && mismatches == 0 ? kHolds : kFails;
}

struct BenchRow {
  std::string label;
  std::size_t states = 0, transitions = 0;
  double layered_s = 0, consensus_s = 0, correct_s = 0;
  std::string layered, consensus, correct = "-";
  std::size_t layers = 0, refinements = 0;
  Verdict::Kind kind = Verdict::Kind::Unknown;
  std::string error;
};

BenchRow bench_one(const RunConfig& cfg, std::int64_t param) {
  BenchRow row;
  try {
    auto inst = make_family(cfg.family, param, cfg.c);
    row.label = inst.label;
    row.states = inst.protocol.num_states();
    row.transitions = inst.protocol.nonsilent_count();
    Verdict v;
    auto t0 = Clock::now();
    v.layered = find_layered_termination(inst.protocol, layered_options(cfg));
    row.layered_s = seconds_since(t0);
    row.layered = to_string(v.layered->kind);
    row.layers = v.layered->partition.layers.size();
    t0 = Clock::now();
    v.consensus = check_strong_consensus(inst.protocol, consensus_options(cfg));
    row.consensus_s = seconds_since(t0);
    row.consensus = to_string(v.consensus->kind);
    row.refinements = v.consensus->traps.size() + v.consensus->siphons.size();
    if (cfg.bench_correct) {
      t0 = Clock::now();
      v.correctness = check_correctness(inst.protocol, inst.predicate, consensus_options(cfg));
      row.correct_s = seconds_since(t0);
      row.correct = to_string(v.correctness->kind);
    }
    row.kind = combine(v);
  } catch (const std::exception& e) {
    row.error = e.what();
    row.kind = Verdict::Kind::Unknown;
  }
  return row;
}

int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  std::vector<std::int64_t> params = cfg.params;
  if (params.empty()) params.push_back(cfg.param);
  solver_options(cfg);  // fail early if the solver is missing
  std::vector<BenchRow> rows(params.size());
  std::atomic<std::size_t> next{0};
  std::mutex out_mu;
  auto emit = [&](const BenchRow& r, std::int64_t param) {
    if (!cfg.structured()) return;
    ordered_json j;
    j["family"] = cfg.family;
    j["param"] = param;
    j["label"] = r.label;
    j["states"] = r.states;
    j["transitions"] = r.transitions;
    j["layered"] = r.layered;
    j["layers"] = r.layers;
    j["layered_seconds"] = r.layered_s;
    j["consensus"] = r.consensus;
    j["refinements"] = r.refinements;
    j["consensus_seconds"] = r.consensus_s;
    if (cfg.bench_correct) {
      j["correctness"] = r.correct;
      j["correctness_seconds"] = r.correct_s;
    }
    j["verdict"] = to_string(r.kind);
    if (!r.error.empty()) j["error"] = r.error;
    std::lock_guard lock(out_mu);
    out << j.dump() << "\n" << std::flush;
  };
  auto worker = [&] {
    for (std::size_t i; (i = next++) < params.size();) {
      rows[i] = bench_one(cfg, params[i]);
      emit(rows[i], params[i]);
    }
  };
  std::size_t jobs = std::max<std::size_t>(1, std::min(cfg.jobs, params.size()));
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  bool all_ok = true;
  for (const auto& r : rows) all_ok &= r.kind == Verdict::Kind::Holds;
  if (!cfg.structured()) {
    out << std::left << std::setw(30) << "instance" << std::right << std::setw(6) << "|Q|" << std::setw(7) << "|T|"
        << std::setw(11) << "layered" << std::setw(9) << "time" << std::setw(11) << "consensus" << std::setw(6)
        << "refs" << std::setw(9) << "time";
    if (cfg.bench_correct) out << std::setw(10) << "correct" << std::setw(9) << "time";
    out << std::setw(10) << "verdict" << "\n";
    out << std::fixed << std::setprecision(2);
    for (const auto& r : rows) {
      out << std::left << std::setw(30) << r.label << std::right << std::setw(6) << r.states << std::setw(7)
          << r.transitions << std::setw(11) << r.layered << std::setw(9) << r.layered_s << std::setw(11) << r.consensus
          << std::setw(6) << r.refinements << std::setw(9) << r.consensus_s;
      if (cfg.bench_correct) out << std::setw(10) << r.correct << std::setw(9) << r.correct_s;
      out << std::setw(10) << (r.kind == Verdict::Kind::Holds ? "WSSS" : to_string(r.kind)) << "\n";
      if (!r.error.empty()) out << "  error: " << r.error << "\n";
    }
    out.unsetf(std::ios::floatfield);
  }
  return all_ok ? kHolds : kFails;
}

int cmd_replay(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  auto l = load(cfg);
  Verdict v = parse_verdict(l.protocol, read_text_file(cfg.replay_verdict));
  if (!v.predicate) v.predicate = l.predicate;
  auto rep = replay_verdict(l.protocol, v, solver_options(cfg));
  for (const auto& line : rep.lines) out << line << "\n";
  out << (rep.ok ? "replay: ok\n" : "replay: FAILED\n");
  return rep.ok ? kHolds : kFails;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Population protocol verifier: decides membership in WSSS and predicate correctness", "ppv"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ppv 1.0");

  auto solver_flags = [&](CLI::App* sc) {
    sc->add_option("--solver", cfg.solver, std::string("SMT-LIB2 solver executable (default: $") + smt::kSolverEnv +
                                               " or z3)");
    sc->add_option("--solver-arg", cfg.solver_args, "Argument passed to the solver (repeatable)")->take_all();
    sc->add_option("--timeout", cfg.timeout_secs, "Per-query solver time limit in seconds (0 = none)")
        ->check(CLI::NonNegativeNumber);
    sc->add_flag("--no-incremental", cfg.no_incremental, "Re-send the full script to a fresh solver for every query");
    sc->add_option("--dump-smt", cfg.dump_dir, "Write every solver query to this directory");
  };
  auto format_flag = [&](CLI::App* sc) {
    sc->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"human", "structured"}));
  };
  auto verdict_flags = [&](CLI::App* sc) {
    sc->add_option("--verdict", cfg.verdict_path, "Verdict file (default: <protocol>.verdict.json)");
    sc->add_flag("--no-verdict", cfg.no_verdict, "Do not write a verdict file");
  };
  auto protocol_arg = [&](CLI::App* sc) {
    sc->add_option("protocol", cfg.protocol_path, "Protocol document (.pp.json)")->required();
  };

  auto* check = app.add_subcommand("check", "Decide membership in WSSS (LayeredTermination and StrongConsensus)");
  protocol_arg(check);
  solver_flags(check);
  format_flag(check);
  verdict_flags(check);
  check->add_option("--k-max", cfg.k_max, "Largest number of layers to try");
  check->add_option("--max-refinements", cfg.max_refinements, "Give up after this many refinement rounds");
  check->add_flag("--fail-fast", cfg.fail_fast, "Skip StrongConsensus when LayeredTermination does not hold");

  auto* layered = app.add_subcommand("layered", "Search for a layered termination certificate");
  protocol_arg(layered);
  solver_flags(layered);
  format_flag(layered);
  verdict_flags(layered);
  layered->add_option("--k-max", cfg.k_max, "Largest number of layers to try");

  auto* consensus = app.add_subcommand("consensus", "Decide StrongConsensus by trap/siphon refinement");
  protocol_arg(consensus);
  solver_flags(consensus);
  format_flag(consensus);
  verdict_flags(consensus);
  consensus->add_option("--max-refinements", cfg.max_refinements, "Give up after this many refinement rounds");

  auto* correct = app.add_subcommand("correct", "Check that a WSSS protocol computes its predicate");
  protocol_arg(correct);
  solver_flags(correct);
  format_flag(correct);
  verdict_flags(correct);
  correct->add_option("--predicate", cfg.predicate_path, "Predicate document overriding the embedded one");
  correct->add_option("--max-refinements", cfg.max_refinements, "Give up after this many refinement rounds");

  auto* gen = app.add_subcommand("gen", "Generate a benchmark protocol document");
  gen->add_option("family", cfg.family, "Protocol family")->required()->check(CLI::IsMember(family_names()));
  gen->add_option("param", cfg.param, "v_max (threshold), m (remainder) or c (flock variants)");
  gen->add_option("--c", cfg.c, "Threshold or remainder constant");
  gen->add_option("-o,--out", cfg.out_path, "Output file (default: standard output)");

  auto* oracle = app.add_subcommand("oracle", "Explicit-state well-specification check on small inputs");
  protocol_arg(oracle);
  format_flag(oracle);
  oracle->add_option("--max-agents", cfg.max_agents, "Largest population size")->check(CLI::Range(2, 1000));
  oracle->add_option("--cap", cfg.cap, "Configuration limit per input");
  oracle->add_option("--jobs", cfg.jobs, "Worker threads");
  oracle->add_option("--predicate", cfg.predicate_path, "Predicate document to compare against");

  auto* bench = app.add_subcommand("bench", "Check a protocol family for increasing parameters");
  bench->add_option("family", cfg.family, "Protocol family")->required()->check(CLI::IsMember(family_names()));
  bench->add_option("--params", cfg.params, "Comma-separated parameter values")->delimiter(',');
  bench->add_option("--c", cfg.c, "Threshold or remainder constant");
  bench->add_option("--jobs", cfg.jobs, "Instances checked concurrently");
  bench->add_flag("--correct", cfg.bench_correct, "Also check predicate correctness");
  solver_flags(bench);
  format_flag(bench);
  bench->add_option("--k-max", cfg.k_max, "Largest number of layers to try");
  bench->add_option("--max-refinements", cfg.max_refinements, "Give up after this many refinement rounds");

  auto* replay = app.add_subcommand("replay", "Re-check the certificates of a verdict file");
  protocol_arg(replay);
  replay->add_option("verdict", cfg.replay_verdict, "Verdict file (.verdict.json)")->required();
  solver_flags(replay);
  replay->add_option("--predicate", cfg.predicate_path, "Predicate document for correctness certificates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : kInputError;
  }

  try {
    if (*check) return cmd_check(cfg, out, err);
    if (*layered) return cmd_layered(cfg, out, err);
    if (*consensus) return cmd_consensus(cfg, out, err);
    if (*correct) return cmd_correct(cfg, out, err);
    if (*gen) return cmd_gen(cfg, out, err);
    if (*oracle) return cmd_oracle(cfg, out, err);
    if (*bench) return cmd_bench(cfg, out, err);
    if (*replay) return cmd_replay(cfg, out, err);
  } catch (const ParseError& e) {
    err << "error: " << e.location() << ": " << e.what() << "\n";
    return kInputError;
  } catch (const ProtocolError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const smt::SolverError& e) {
    err << "solver error: " << e.what() << "\n";
    if (!e.diagnostics().empty()) err << e.diagnostics() << "\n";
    return e.kind() == smt::SolverError::Kind::NotFound ? kInputError : kUnknown;
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kUnknown;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace ppv::cli
