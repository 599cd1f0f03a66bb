#include "ppv/smt.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "process.hpp"

namespace ppv::smt {

// --- terms ------------------------------------------------------------------

LinTerm& LinTerm::add(Var v, std::int64_t coeff) {
  if (coeff == 0) return *this;
  auto it = std::lower_bound(terms_.begin(), terms_.end(), v,
                             [](const auto& e, Var x) { return e.first < x; });
  if (it != terms_.end() && it->first == v) {
    it->second += coeff;
    if (it->second == 0) terms_.erase(it);
  } else {
    terms_.insert(it, {v, coeff});
  }
  return *this;
}

LinTerm& LinTerm::operator+=(const LinTerm& o) {
  for (const auto& [v, c] : o.terms_) add(v, c);
  constant_ += o.constant_;
  return *this;
}

LinTerm& LinTerm::operator-=(const LinTerm& o) {
  for (const auto& [v, c] : o.terms_) add(v, -c);
  constant_ -= o.constant_;
  return *this;
}

LinTerm& LinTerm::operator*=(std::int64_t k) {
  if (k == 0) {
    terms_.clear();
    constant_ = 0;
    return *this;
  }
  for (auto& e : terms_) e.second *= k;
  constant_ *= k;
  return *this;
}

// --- formulas ---------------------------------------------------------------

struct Formula::Node {
  Kind kind = Kind::True;
  Rel rel = Rel::Eq;
  LinTerm term;
  std::vector<Formula> operands;
};

Formula::Formula() : node_(std::make_shared<const Node>()) {}

Formula Formula::truth(bool b) {
  auto n = std::make_shared<Node>();
  n->kind = b ? Kind::True : Kind::False;
  return Formula(std::move(n));
}

Formula Formula::atom(LinTerm term, Rel rel) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Atom;
  n->rel = rel;
  n->term = std::move(term);
  return Formula(std::move(n));
}

Formula Formula::conj(std::vector<Formula> fs) {
  if (fs.empty()) return truth(true);
  if (fs.size() == 1) return fs.front();
  auto n = std::make_shared<Node>();
  n->kind = Kind::And;
  n->operands = std::move(fs);
  return Formula(std::move(n));
}

Formula Formula::disj(std::vector<Formula> fs) {
  if (fs.empty()) return truth(false);
  if (fs.size() == 1) return fs.front();
  auto n = std::make_shared<Node>();
  n->kind = Kind::Or;
  n->operands = std::move(fs);
  return Formula(std::move(n));
}

Formula Formula::negation(Formula f) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Not;
  n->operands.push_back(std::move(f));
  return Formula(std::move(n));
}

Formula Formula::implies(Formula lhs, Formula rhs) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Implies;
  n->operands.push_back(std::move(lhs));
  n->operands.push_back(std::move(rhs));
  return Formula(std::move(n));
}

Formula::Kind Formula::kind() const { return node_->kind; }
Rel Formula::rel() const { return node_->rel; }
const LinTerm& Formula::term() const { return node_->term; }
const std::vector<Formula>& Formula::operands() const { return node_->operands; }

Formula eq(const LinTerm& a, const LinTerm& b) { return Formula::atom(a - b, Rel::Eq); }
Formula le(const LinTerm& a, const LinTerm& b) { return Formula::atom(a - b, Rel::Le); }
Formula lt(const LinTerm& a, const LinTerm& b) { return Formula::atom(a - b, Rel::Lt); }
Formula ge(const LinTerm& a, const LinTerm& b) { return Formula::atom(a - b, Rel::Ge); }
Formula gt(const LinTerm& a, const LinTerm& b) { return Formula::atom(a - b, Rel::Gt); }
Formula operator&&(Formula a, Formula b) { return Formula::conj({std::move(a), std::move(b)}); }
Formula operator||(Formula a, Formula b) { return Formula::disj({std::move(a), std::move(b)}); }
Formula operator!(Formula a) { return Formula::negation(std::move(a)); }

// --- problems ---------------------------------------------------------------

Var Problem::declare(std::string name, Sort sort) {
  Var v{std::uint32_t(vars_.size())};
  vars_.push_back({std::move(name), sort});
  return v;
}

void Problem::add(const Formula& f) {
  if (f.kind() == Formula::Kind::And) {
    for (const auto& g : f.operands()) add(g);
  } else if (f.kind() != Formula::Kind::True) {
    assertions_.push_back(f);
  }
}

void Problem::truncate(std::size_t n) {
  if (n < assertions_.size()) assertions_.resize(n);
}

// --- evaluation -------------------------------------------------------------

std::uint64_t Model::natural(Var v) const {
  const Rational& r = value(v);
  if (denominator(r) != 1 || r < 0 || numerator(r) > Integer(UINT64_MAX))
    throw SolverError(SolverError::Kind::MalformedModel, "model value is not a machine-sized natural number");
  return static_cast<std::uint64_t>(numerator(r));
}

std::int64_t Model::integer(Var v) const {
  const Rational& r = value(v);
  if (denominator(r) != 1 || numerator(r) > Integer(INT64_MAX) || numerator(r) < Integer(INT64_MIN))
    throw SolverError(SolverError::Kind::MalformedModel, "model value is not a machine-sized integer");
  return static_cast<std::int64_t>(numerator(r));
}

Rational evaluate(const LinTerm& t, const Model& m) {
  Rational sum = t.constant();
  for (const auto& [v, c] : t.terms()) sum += m.value(v) * c;
  return sum;
}

bool evaluate(const Formula& f, const Model& m) {
  switch (f.kind()) {
    case Formula::Kind::True:
      return true;
    case Formula::Kind::False:
      return false;
    case Formula::Kind::Atom: {
      Rational v = evaluate(f.term(), m);
      switch (f.rel()) {
        case Rel::Eq: return v == 0;
        case Rel::Le: return v <= 0;
        case Rel::Lt: return v < 0;
        case Rel::Ge: return v >= 0;
        case Rel::Gt: return v > 0;
      }
      return false;
    }
    case Formula::Kind::And:
      return std::all_of(f.operands().begin(), f.operands().end(), [&](const Formula& g) { return evaluate(g, m); });
    case Formula::Kind::Or:
      return std::any_of(f.operands().begin(), f.operands().end(), [&](const Formula& g) { return evaluate(g, m); });
    case Formula::Kind::Not:
      return !evaluate(f.operands()[0], m);
    case Formula::Kind::Implies:
      return !evaluate(f.operands()[0], m) || evaluate(f.operands()[1], m);
  }
  return false;
}

bool satisfies(const Problem& p, const Model& m) {
  if (m.values().size() != p.vars().size()) return false;
  for (std::size_t i = 0; i < p.vars().size(); ++i) {
    const auto& d = p.vars()[i];
    const auto& v = m.values()[i];
    bool integral = d.sort == Sort::Int || d.sort == Sort::Nat;
    if (integral && denominator(v) != 1) return false;
    if ((d.sort == Sort::Nat || d.sort == Sort::NonNegReal) && v < 0) return false;
  }
  return std::all_of(p.assertions().begin(), p.assertions().end(),
                     [&](const Formula& f) { return evaluate(f, m); });
}

// --- emission ---------------------------------------------------------------

namespace {

bool integral_sort(Sort s) { return s == Sort::Int || s == Sort::Nat; }

// Under QF_LIRA an atom is real as soon as one of its variables is.
bool real_atom(const Problem& p, const LinTerm& term) {
  switch (p.logic()) {
    case Logic::QF_LIA: return false;
    case Logic::QF_LRA: return true;
    case Logic::QF_LIRA: break;
  }
  return std::any_of(term.terms().begin(), term.terms().end(),
                     [&](const auto& vc) { return !integral_sort(p.decl(vc.first).sort); });
}

std::string numeral(std::int64_t k, bool real) {
  Integer v = k;
  std::string mag = (k < 0 ? Integer(-v) : v).str();
  if (real) mag += ".0";
  return k < 0 ? "(- " + mag + ")" : mag;
}

std::string sum_text(const Problem& p, const std::vector<std::pair<Var, std::int64_t>>& terms, std::int64_t k,
                     bool real) {
  std::vector<std::string> parts;
  for (const auto& [v, c] : terms) {
    const auto& d = p.decl(v);
    std::string name = real && p.logic() == Logic::QF_LIRA && integral_sort(d.sort) ? "(to_real " + d.name + ")" : d.name;
    parts.push_back(c == 1 ? name : "(* " + numeral(c, real) + " " + name + ")");
  }
  if (k != 0) parts.push_back(numeral(k, real));
  if (parts.empty()) return numeral(0, real);
  if (parts.size() == 1) return parts.front();
  std::string s = "(+";
  for (const auto& x : parts) s += " " + x;
  return s + ")";
}

void emit_atom(const Problem& p, const LinTerm& term, Rel rel, std::string& out) {
  const bool real = real_atom(p, term);
  std::int64_t k = term.constant();
  // integer normal form for strict inequalities: t < 0  =>  t + 1 <= 0
  if (!real && rel == Rel::Lt) {
    rel = Rel::Le;
    k += 1;
  } else if (!real && rel == Rel::Gt) {
    rel = Rel::Ge;
    k -= 1;
  }
  std::vector<std::pair<Var, std::int64_t>> lhs, rhs;
  for (const auto& [v, c] : term.terms()) {
    if (c > 0) lhs.push_back({v, c});
    else rhs.push_back({v, -c});
  }
  std::int64_t lk = k > 0 ? k : 0, rk = k < 0 ? -k : 0;
  const char* op = "=";
  switch (rel) {
    case Rel::Eq: op = "="; break;
    case Rel::Le: op = "<="; break;
    case Rel::Lt: op = "<"; break;
    case Rel::Ge: op = ">="; break;
    case Rel::Gt: op = ">"; break;
  }
  out += "(";
  out += op;
  out += " ";
  out += sum_text(p, lhs, lk, real);
  out += " ";
  out += sum_text(p, rhs, rk, real);
  out += ")";
}

void emit(const Problem& p, const Formula& f, std::string& out) {
  switch (f.kind()) {
    case Formula::Kind::True: out += "true"; return;
    case Formula::Kind::False: out += "false"; return;
    case Formula::Kind::Atom: emit_atom(p, f.term(), f.rel(), out); return;
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Not:
    case Formula::Kind::Implies: {
      const char* op = f.kind() == Formula::Kind::And   ? "and"
                       : f.kind() == Formula::Kind::Or  ? "or"
                       : f.kind() == Formula::Kind::Not ? "not"
                                                        : "=>";
      out += "(";
      out += op;
      for (const auto& g : f.operands()) {
        out += " ";
        emit(p, g, out);
      }
      out += ")";
      return;
    }
  }
}

const char* sort_name(Sort s) { return s == Sort::Int || s == Sort::Nat ? "Int" : "Real"; }

std::string declaration(const VarDecl& d) {
  std::string s = "(declare-fun " + d.name + " () " + sort_name(d.sort) + ")\n";
  if (d.sort == Sort::Nat) s += "(assert (>= " + d.name + " 0))\n";
  if (d.sort == Sort::NonNegReal) s += "(assert (>= " + d.name + " 0.0))\n";
  return s;
}

const char* logic_name(Logic l) {
  switch (l) {
    case Logic::QF_LIA: return "QF_LIA";
    case Logic::QF_LRA: return "QF_LRA";
    case Logic::QF_LIRA: return "QF_LIRA";
  }
  return "ALL";
}

std::string header(const Problem& p) {
  return std::string("(set-option :produce-models true)\n(set-logic ") +
         logic_name(p.logic()) + ")\n";
}

std::string declarations(const Problem& p, std::size_t from) {
  std::vector<std::size_t> order;
  for (std::size_t i = from; i < p.vars().size(); ++i) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return p.vars()[a].name < p.vars()[b].name; });
  std::string s;
  for (auto i : order) s += declaration(p.vars()[i]);
  return s;
}

std::string assertions(const Problem& p, std::size_t from) {
  std::string s;
  for (std::size_t i = from; i < p.assertions().size(); ++i) {
    s += "(assert ";
    emit(p, p.assertions()[i], s);
    s += ")\n";
  }
  return s;
}

// --- model parsing ----------------------------------------------------------

struct SExpr {
  std::string atom;
  std::vector<SExpr> list;
  bool is_list = false;
};

SExpr parse_sexpr(const std::string& text, std::size_t& i) {
  auto skip = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  skip();
  if (i >= text.size()) throw SolverError(SolverError::Kind::MalformedModel, "unexpected end of solver output");
  SExpr e;
  if (text[i] == '(') {
    e.is_list = true;
    ++i;
    for (;;) {
      skip();
      if (i >= text.size()) throw SolverError(SolverError::Kind::MalformedModel, "unbalanced solver output");
      if (text[i] == ')') {
        ++i;
        break;
      }
      e.list.push_back(parse_sexpr(text, i));
    }
    return e;
  }
  std::size_t j = i;
  if (text[i] == '|') {
    j = text.find('|', i + 1);
    if (j == std::string::npos) throw SolverError(SolverError::Kind::MalformedModel, "unterminated symbol");
    e.atom = text.substr(i + 1, j - i - 1);
    i = j + 1;
    return e;
  }
  while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != '(' && text[j] != ')')
    ++j;
  e.atom = text.substr(i, j - i);
  i = j;
  return e;
}

Rational parse_numeral(const std::string& s) {
  if (s.empty() || !std::isdigit(static_cast<unsigned char>(s[0])))
    throw SolverError(SolverError::Kind::MalformedModel, "bad numeral '" + s + "'");
  auto dot = s.find('.');
  if (dot == std::string::npos) return Rational(Integer(s));
  std::string whole = s.substr(0, dot), frac = s.substr(dot + 1);
  Integer den = 1;
  for (std::size_t k = 0; k < frac.size(); ++k) den *= 10;
  return Rational(Integer(whole + frac), den);
}

Rational parse_value(const SExpr& e) {
  if (!e.is_list) return parse_numeral(e.atom);
  if (e.list.size() == 2 && !e.list[0].is_list && e.list[0].atom == "-") return -parse_value(e.list[1]);
  if (e.list.size() == 3 && !e.list[0].is_list && e.list[0].atom == "/")
    return parse_value(e.list[1]) / parse_value(e.list[2]);
  throw SolverError(SolverError::Kind::MalformedModel, "unsupported value term in model");
}

Model parse_values(const Problem& p, const std::string& text) {
  std::size_t i = 0;
  SExpr root = parse_sexpr(text, i);
  if (!root.is_list) throw SolverError(SolverError::Kind::MalformedModel, "expected a value list, got '" + text + "'");
  if (!root.list.empty() && !root.list[0].is_list && root.list[0].atom == "error")
    throw SolverError(SolverError::Kind::Protocol, "solver error: " + text);
  std::unordered_map<std::string, Rational> byname;
  for (const auto& entry : root.list) {
    if (!entry.is_list || entry.list.size() != 2 || entry.list[0].is_list)
      throw SolverError(SolverError::Kind::MalformedModel, "malformed get-value entry");
    byname[entry.list[0].atom] = parse_value(entry.list[1]);
  }
  std::vector<Rational> values;
  values.reserve(p.vars().size());
  for (const auto& d : p.vars()) {
    auto it = byname.find(d.name);
    if (it == byname.end())
      throw SolverError(SolverError::Kind::MalformedModel, "model does not assign '" + d.name + "'");
    values.push_back(it->second);
  }
  return Model(std::move(values));
}

std::string get_value_command(const Problem& p) {
  std::string s = "(get-value (";
  for (std::size_t i = 0; i < p.vars().size(); ++i) s += (i ? " " : "") + p.vars()[i].name;
  return s + "))\n";
}

Status parse_status(const std::string& answer, const std::string& diagnostics) {
  if (answer == "sat") return Status::Sat;
  if (answer == "unsat") return Status::Unsat;
  if (answer == "unknown") return Status::Unknown;
  throw SolverError(SolverError::Kind::Protocol, "unexpected solver answer: " + answer, diagnostics);
}

}  // namespace

std::string emit_formula(const Problem& p, const Formula& f) {
  std::string s;
  emit(p, f, s);
  return s;
}

std::string emit_script(const Problem& p) { return header(p) + declarations(p, 0) + assertions(p, 0) + "(check-sat)\n"; }

// --- solver processes ---------------------------------------------------------

SolverOptions default_solver_options() {
  SolverOptions o;
  if (const char* env = std::getenv(kSolverEnv); env && *env) o.path = env;
  return o;
}

std::optional<std::string> resolve_solver(const std::string& path) {
  if (path.empty()) return std::nullopt;
  if (path.find('/') != std::string::npos)
    return ::access(path.c_str(), X_OK) == 0 ? std::optional<std::string>(path) : std::nullopt;
  const char* env = std::getenv("PATH");
  std::stringstream ss(env ? env : "");
  std::string dir;
  while (std::getline(ss, dir, ':')) {
    if (dir.empty()) dir = ".";
    auto candidate = dir + "/" + path;
    if (::access(candidate.c_str(), X_OK) == 0) return candidate;
  }
  return std::nullopt;
}

std::vector<std::string> effective_args(const SolverOptions& opts) {
  if (!opts.args.empty()) return opts.args;
  auto base = std::filesystem::path(opts.path).filename().string();
  if (base.rfind("z3", 0) == 0) return {"-in", "-smt2"};
  if (base.rfind("cvc5", 0) == 0 || base.rfind("cvc4", 0) == 0) return {"--lang=smt2", "--incremental"};
  if (base.rfind("yices", 0) == 0) return {"--incremental"};
  return {};
}

const char* to_string(Status s) {
  switch (s) {
    case Status::Sat: return "sat";
    case Status::Unsat: return "unsat";
    case Status::Unknown: return "unknown";
  }
  return "?";
}

Session::Session(SolverOptions opts, Logic logic) : opts_(std::move(opts)), problem_(logic) {
  if (!resolve_solver(opts_.path))
    throw SolverError(SolverError::Kind::NotFound, "solver executable '" + opts_.path + "' not found");
}

Session::~Session() = default;

void Session::add(const Formula& f) { problem_.add(f); }

void Session::start() {
  if (proc_ && proc_->alive()) return;
  proc_ = std::make_unique<Process>(opts_.path, effective_args(opts_));
  sent_vars_ = sent_asserts_ = 0;
  std::string init = header(problem_);
  stats_.script_bytes += init.size();
  if (!proc_->write(init, Process::Clock::time_point::max()))
    throw SolverError(SolverError::Kind::Crashed, "could not initialise solver");
}

void Session::sync() {
  start();
  std::string chunk = declarations(problem_, sent_vars_) + assertions(problem_, sent_asserts_);
  sent_vars_ = problem_.vars().size();
  sent_asserts_ = problem_.assertions().size();
  stats_.script_bytes += chunk.size();
  if (!chunk.empty() && !proc_->write(chunk, Process::Clock::time_point::max()))
    throw SolverError(SolverError::Kind::Crashed, "could not send assertions to solver", proc_->stderr_text());
}

void Session::push() {
  frames_.push_back({problem_.assertions().size(), problem_.vars().size()});
  if (opts_.incremental && !dead_) {
    sync();
    proc_->write("(push 1)\n", Process::Clock::time_point::max());
  }
}

void Session::pop() {
  if (frames_.empty()) throw std::logic_error("pop without matching push");
  Frame f = frames_.back();
  frames_.pop_back();
  problem_.truncate(f.asserts);
  if (opts_.incremental && proc_ && proc_->alive()) {
    proc_->write("(pop 1)\n", Process::Clock::time_point::max());
    sent_asserts_ = std::min(sent_asserts_, f.asserts);
    sent_vars_ = std::min(sent_vars_, f.vars);
  }
}

void Session::dump(const std::string& script) {
  if (opts_.dump_dir.empty()) return;
  std::filesystem::create_directories(opts_.dump_dir);
  auto path = std::filesystem::path(opts_.dump_dir) / (opts_.dump_tag + "-" + std::to_string(stats_.checks) + ".smt2");
  std::ofstream(path) << script;
}

Result Session::check() {
  if (dead_) return {Status::Unknown, std::nullopt, "timeout"};
  ++stats_.checks;
  dump(emit_script(problem_));
  auto t0 = Process::Clock::now();
  Result r = opts_.incremental ? check_incremental() : check_fresh();
  stats_.solver_seconds += std::chrono::duration<double>(Process::Clock::now() - t0).count();
  if (r.model && !satisfies(problem_, *r.model))
    throw SolverError(SolverError::Kind::MalformedModel, "solver model violates the asserted constraints");
  return r;
}

Result Session::check_incremental() {
  sync();
  auto deadline = opts_.timeout.count() > 0 ? Process::Clock::now() + opts_.timeout : Process::Clock::time_point::max();
  std::string answer;
  if (!proc_->write("(check-sat)\n", deadline) || !proc_->read_expr(answer, deadline)) {
    proc_->kill();
    dead_ = true;
    return {Status::Unknown, std::nullopt, "timeout"};
  }
  Result r;
  r.status = parse_status(answer, proc_->stderr_text());
  if (r.status == Status::Sat) {
    std::string values;
    if (!proc_->write(get_value_command(problem_), deadline) || !proc_->read_expr(values, deadline)) {
      proc_->kill();
      dead_ = true;
      return {Status::Unknown, std::nullopt, "timeout"};
    }
    r.model = parse_values(problem_, values);
  } else if (r.status == Status::Unknown) {
    std::string reason;
    if (proc_->write("(get-info :reason-unknown)\n", deadline) && proc_->read_expr(reason, deadline))
      r.reason = reason;
  }
  return r;
}

Result Session::check_fresh() {
  proc_.reset();
  std::string script = emit_script(problem_);
  stats_.script_bytes += script.size();
  Process proc(opts_.path, effective_args(opts_));
  auto deadline = opts_.timeout.count() > 0 ? Process::Clock::now() + opts_.timeout : Process::Clock::time_point::max();
  std::string answer;
  if (!proc.write(script, deadline) || !proc.read_expr(answer, deadline))
    return {Status::Unknown, std::nullopt, "timeout"};
  Result r;
  r.status = parse_status(answer, proc.stderr_text());
  if (r.status == Status::Sat) {
    std::string values;
    if (!proc.write(get_value_command(problem_), deadline) || !proc.read_expr(values, deadline))
      return {Status::Unknown, std::nullopt, "timeout"};
    r.model = parse_values(problem_, values);
  }
  return r;
}

Result solve(const Problem& p, const SolverOptions& opts) {
  SolverOptions o = opts;
  o.incremental = false;
  Session s(o, p.logic());
  for (const auto& d : p.vars()) s.declare(d.name, d.sort);
  for (const auto& f : p.assertions()) s.add(f);
  return s.check();
}

}  // namespace ppv::smt
