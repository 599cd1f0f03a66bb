#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace ppv::smt {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Nat and NonNegReal are emitted as Int/Real plus a `v >= 0` assertion.
enum class Sort { Int, Nat, Real, NonNegReal };
enum class Logic { QF_LIA, QF_LRA, QF_LIRA };

struct Var {
  std::uint32_t id = 0;
  friend auto operator<=>(const Var&, const Var&) = default;
};

/// sum(coeff * var) + constant, canonical: sorted by variable, no zero
/// coefficients, no repeated variables.
class LinTerm {
 public:
  LinTerm() = default;
  LinTerm(std::int64_t constant) : constant_(constant) {}  // NOLINT(implicit)
  LinTerm(Var v) { add(v, 1); }                           // NOLINT(implicit)

  LinTerm& add(Var v, std::int64_t coeff);
  LinTerm& operator+=(const LinTerm& o);
  LinTerm& operator-=(const LinTerm& o);
  LinTerm& operator*=(std::int64_t k);

  const std::vector<std::pair<Var, std::int64_t>>& terms() const { return terms_; }
  std::int64_t constant() const { return constant_; }
  bool is_constant() const { return terms_.empty(); }

  friend LinTerm operator+(LinTerm a, const LinTerm& b) { return a += b; }
  friend LinTerm operator-(LinTerm a, const LinTerm& b) { return a -= b; }
  friend LinTerm operator*(std::int64_t k, LinTerm a) { return a *= k; }
  friend bool operator==(const LinTerm&, const LinTerm&) = default;

 private:
  std::vector<std::pair<Var, std::int64_t>> terms_;
  std::int64_t constant_ = 0;
};

enum class Rel { Eq, Le, Lt, Ge, Gt };

/// Immutable formula tree; copies share structure.
class Formula {
 public:
  enum class Kind { True, False, Atom, And, Or, Not, Implies };

  Formula();  // true

  static Formula truth(bool b);
  /// term REL 0
  static Formula atom(LinTerm term, Rel rel);
  static Formula conj(std::vector<Formula> fs);
  static Formula disj(std::vector<Formula> fs);
  static Formula negation(Formula f);
  static Formula implies(Formula lhs, Formula rhs);

  Kind kind() const;
  Rel rel() const;
  const LinTerm& term() const;
  const std::vector<Formula>& operands() const;

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

Formula eq(const LinTerm& a, const LinTerm& b);
Formula le(const LinTerm& a, const LinTerm& b);
Formula lt(const LinTerm& a, const LinTerm& b);
Formula ge(const LinTerm& a, const LinTerm& b);
Formula gt(const LinTerm& a, const LinTerm& b);
Formula operator&&(Formula a, Formula b);
Formula operator||(Formula a, Formula b);
Formula operator!(Formula a);

struct VarDecl {
  std::string name;
  Sort sort;
};

/// Declarations plus a list of top-level assertions.
class Problem {
 public:
  explicit Problem(Logic logic = Logic::QF_LIA) : logic_(logic) {}

  /// Names must be valid SMT-LIB simple symbols and unique.
  Var declare(std::string name, Sort sort);
  /// Adds one assertion per top-level conjunct.
  void add(const Formula& f);
  /// Drops assertions beyond the first n.
  void truncate(std::size_t n);

  Logic logic() const { return logic_; }
  const std::vector<VarDecl>& vars() const { return vars_; }
  const VarDecl& decl(Var v) const { return vars_[v.id]; }
  const std::vector<Formula>& assertions() const { return assertions_; }

 private:
  Logic logic_;
  std::vector<VarDecl> vars_;
  std::vector<Formula> assertions_;
};

/// Assignment of exact values to every declared variable.
class Model {
 public:
  Model() = default;
  explicit Model(std::vector<Rational> values) : values_(std::move(values)) {}
  const Rational& value(Var v) const { return values_.at(v.id); }
  /// Value as a nonnegative machine integer; throws SolverError otherwise.
  std::uint64_t natural(Var v) const;
  std::int64_t integer(Var v) const;
  const std::vector<Rational>& values() const { return values_; }

 private:
  std::vector<Rational> values_;
};

Rational evaluate(const LinTerm& t, const Model& m);
bool evaluate(const Formula& f, const Model& m);
/// True iff m satisfies every assertion and sort constraint of p.
bool satisfies(const Problem& p, const Model& m);

/// Complete, deterministic script: options, logic, sorted declarations,
/// sort side constraints, one assert per conjunct, (check-sat).
std::string emit_script(const Problem& p);
/// SMT-LIB rendering of one formula against p's declarations.
std::string emit_formula(const Problem& p, const Formula& f);

class SolverError : public std::runtime_error {
 public:
  enum class Kind { NotFound, Crashed, MalformedModel, Protocol };
  SolverError(Kind kind, const std::string& what, std::string diagnostics = {})
      : std::runtime_error(what), kind_(kind), diagnostics_(std::move(diagnostics)) {}
  Kind kind() const { return kind_; }
  /// Captured standard error of the solver, if any.
  const std::string& diagnostics() const { return diagnostics_; }

 private:
  Kind kind_;
  std::string diagnostics_;
};

struct SolverOptions {
  std::string path = "z3";
  /// Empty means: pick defaults for known solvers (z3, cvc5, yices-smt2).
  std::vector<std::string> args;
  /// Per check-sat wall-clock limit; zero disables it.
  std::chrono::milliseconds timeout{0};
  /// Keep one process and assert refinements incrementally; otherwise every
  /// check re-emits the full script to a fresh process.
  bool incremental = true;
  /// When nonempty, every checked script is written here as <tag>-<n>.smt2.
  std::string dump_dir;
  std::string dump_tag = "query";
};

/// Environment variable naming the default solver executable.
inline constexpr const char* kSolverEnv = "PPV_SOLVER";

/// Options with path taken from PPV_SOLVER when set.
SolverOptions default_solver_options();
/// Resolves the executable against PATH; nullopt if it cannot be found.
std::optional<std::string> resolve_solver(const std::string& path);
std::vector<std::string> effective_args(const SolverOptions& opts);

enum class Status { Sat, Unsat, Unknown };
const char* to_string(Status s);

struct Result {
  Status status = Status::Unknown;
  std::optional<Model> model;
  /// Solver reason or "timeout" for unknown answers.
  std::string reason;
};

struct Stats {
  std::size_t checks = 0;
  double solver_seconds = 0;
  std::size_t script_bytes = 0;
};

class Process;

/// A solver session over a growing problem. Not thread-safe; one per task.
class Session {
 public:
  Session(SolverOptions opts, Logic logic);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  Var declare(std::string name, Sort sort) { return problem_.declare(std::move(name), sort); }
  void add(const Formula& f);
  void push();
  void pop();
  /// Sat results carry a model validated against every live assertion.
  Result check();

  const Problem& problem() const { return problem_; }
  const Stats& stats() const { return stats_; }

 private:
  void start();
  void sync();
  Result check_incremental();
  Result check_fresh();
  void dump(const std::string& script);

  SolverOptions opts_;
  Problem problem_;
  struct Frame {
    std::size_t asserts;
    std::size_t vars;
  };
  std::vector<Frame> frames_;
  std::unique_ptr<Process> proc_;
  std::size_t sent_vars_ = 0;
  std::size_t sent_asserts_ = 0;
  bool dead_ = false;
  Stats stats_;
};

/// One-shot solve in a fresh process.
Result solve(const Problem& p, const SolverOptions& opts);

}  // namespace ppv::smt
