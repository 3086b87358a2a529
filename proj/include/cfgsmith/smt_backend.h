#ifndef CFGSMITH_SMT_BACKEND_H
#define CFGSMITH_SMT_BACKEND_H

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cfgsmith/assignment.h"
#include "cfgsmith/term.h"

namespace cfgsmith {

// ---------------------------------------------------------------------
// SMT-LIB v2 serialization
// ---------------------------------------------------------------------

// Pipe-quotes a name unless it is a simple symbol (characters from
// [A-Za-z0-9_.-], not starting with a digit). Timed names like "x@3"
// therefore always come out as |x@3|.
std::string smt2_symbol(const std::string & name);

// "Bool" or "(_ BitVec w)".
std::string smt2_sort(const Sort & s);

// Renders one term. Bit-vector constants use #x when the width is a
// multiple of four, #b otherwise.
std::string smt2_term(const Term & t);

// Script fragment for f: one declare-const per free variable (sorted by
// name) followed by one assert per top-level conjunct. No set-logic /
// set-option lines; SolverSession emits those. Equal formulas produce
// byte-identical text.
std::string serialize_smt2(const Term & f);

// ---------------------------------------------------------------------
// External solver process
// ---------------------------------------------------------------------

struct SatResult
{
  enum class Status
  {
    kSat,
    kUnsat,
    kUnknown,
  };

  Status status;
  // Present iff status == kSat; restricted to the queried variables.
  std::optional<Assignment> model;

  bool is_sat() const { return status == Status::kSat; }
  bool is_unsat() const { return status == Status::kUnsat; }
};

struct SolverConfig
{
  // argv[0] is the solver executable (resolved via PATH), the rest are
  // its flags. The solver must read SMT-LIB v2 from stdin and answer on
  // stdout.
  std::vector<std::string> argv;

  // Wall-clock budget per query. On expiry the solver is killed and
  // SolverTimeoutError is raised. Default four thousand seconds.
  int64_t timeout_ms = 4000 * 1000L;
};

// One solver process speaking SMT-LIB v2 over pipes. Not copyable; one
// in-flight query at a time. All failures surface as SolverCrashError
// (process died / unusable), SolverProtocolError (unparseable or
// unexpected response, client misuse) or SolverTimeoutError.
class SolverSession
{
 public:
  explicit SolverSession(SolverConfig config);
  ~SolverSession();

  SolverSession(const SolverSession &) = delete;
  SolverSession & operator=(const SolverSession &) = delete;

  // Declares v if no variable of that name was declared yet. Redeclaring
  // with a different sort raises SolverProtocolError.
  void declare(const Variable & v);

  // Declares all free variables of f, then asserts each top-level
  // conjunct of f.
  void assert_term(const Term & f);

  void push();
  void pop();  // raises SolverProtocolError at depth 0
  int depth() const { return depth_; }

  // False once the process was killed (timeout/crash) or closed.
  bool alive() const { return open_; }

  // Checks satisfiability of the current assertion stack. On sat the
  // model covers query_vars (declared on demand); on unsat/unknown the
  // model is absent.
  SatResult check_sat(const std::vector<Variable> & query_vars = {});

  // Sends (exit) and reaps the process. Idempotent; also run by the
  // destructor.
  void close();

 private:
  void start();
  void send(const std::string & line);
  std::string read_response();
  std::optional<std::string> extract_response();
  [[noreturn]] void die_crash(const std::string & context);
  void kill_solver();
  Assignment parse_model(const std::string & text,
                         const std::vector<Variable> & query_vars);

  SolverConfig config_;
  int pid_ = -1;
  int to_solver_ = -1;
  int from_solver_ = -1;
  std::string rdbuf_;
  std::map<std::string, Sort> declared_;
  // names declared within each open scope, forgotten again on pop
  std::vector<std::vector<std::string>> scope_decls_;
  int depth_ = 0;
  bool open_ = false;
};

// One-shot convenience: fresh session, assert f, check, close.
SatResult check_sat_formula(const SolverConfig & config, const Term & f,
                            const std::vector<Variable> & query_vars = {});

}  // namespace cfgsmith

#endif
