#ifndef CFGSMITH_MINIBV_SMT2_H
#define CFGSMITH_MINIBV_SMT2_H

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cfgsmith/term.h"
#include "minibv/bitblast.h"
#include "minibv/sat.h"

namespace minibv {

// Stateful SMT-LIB v2 session over the QF_BV subset cfgsmith emits:
// set-logic/set-info/set-option, declare-const, declare-fun (0-ary),
// assert, push/pop, check-sat, get-value (declared symbols only),
// reset, echo, exit. Responses go to `out`, one per line.
class Smt2Session
{
 public:
  explicit Smt2Session(std::ostream & out);
  ~Smt2Session();

  // Handles one complete ()-balanced command. Returns false after
  // (exit).
  bool handle(const std::string & command);

 private:
  struct Frame
  {
    std::vector<cfgsmith::Term> assertions;
    std::vector<std::string> symbols;
  };

  void respond_success();
  void error(const std::string & msg);
  const cfgsmith::Variable * lookup(const std::string & name) const;

  std::ostream & out_;
  std::map<std::string, cfgsmith::Variable> symbols_;
  std::vector<Frame> frames_;
  std::unique_ptr<SatSolver> solver_;
  std::unique_ptr<BitBlaster> blaster_;
  bool have_model_ = false;
  bool print_success_ = false;
};

// Splits a stream into ()-balanced commands, honoring ; comments,
// |symbols| and "strings". Returns false at EOF.
bool read_command(std::istream & in, std::string & out);

// Full REPL: reads commands from `in` until EOF or (exit).
int run_smt2(std::istream & in, std::ostream & out);

}  // namespace minibv

#endif
