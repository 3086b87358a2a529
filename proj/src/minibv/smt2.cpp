#include "minibv/smt2.h"

#include <istream>
#include <ostream>

#include "cfgsmith/errors.h"
#include "cfgsmith/smtlib.h"

namespace minibv {

using cfgsmith::CfgSmithError;
using cfgsmith::ParseError;
using cfgsmith::Sort;
using cfgsmith::Term;
using cfgsmith::Variable;
using cfgsmith::smtlib::TokKind;
using cfgsmith::smtlib::Token;
using cfgsmith::smtlib::TokenStream;

namespace {

bool needs_quoting(const std::string & name)
{
  if (name.empty()) return true;
  if (name[0] >= '0' && name[0] <= '9') return true;
  for (char c : name) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')
              || (c >= '0' && c <= '9') || c == '_' || c == '.' || c == '-';
    if (!ok) return true;
  }
  return false;
}

std::string symbol_out(const std::string & name)
{
  return needs_quoting(name) ? "|" + name + "|" : name;
}

std::string value_out(const Variable & v, uint64_t val)
{
  if (v.sort.is_bool()) return val ? "true" : "false";
  std::string bits;
  for (unsigned i = v.sort.width(); i-- > 0;) {
    bits += char('0' + ((val >> i) & 1));
  }
  return "#b" + bits;
}

}  // namespace

Smt2Session::Smt2Session(std::ostream & out) : out_(out)
{
  frames_.emplace_back();
}

Smt2Session::~Smt2Session() = default;

void Smt2Session::respond_success()
{
  if (print_success_) out_ << "success\n" << std::flush;
}

void Smt2Session::error(const std::string & msg)
{
  std::string clean;
  for (char c : msg) clean += (c == '"') ? '\'' : c;
  out_ << "(error \"" << clean << "\")\n" << std::flush;
}

const Variable * Smt2Session::lookup(const std::string & name) const
{
  auto it = symbols_.find(name);
  return it == symbols_.end() ? nullptr : &it->second;
}

bool Smt2Session::handle(const std::string & command)
{
  try {
    TokenStream ts(cfgsmith::smtlib::tokenize(command));
    if (ts.peek().kind != TokKind::kLParen) {
      error("expected a command");
      return true;
    }
    ts.next();
    const Token & head = ts.next();
    if (head.kind != TokKind::kAtom) {
      error("expected a command name");
      return true;
    }
    const std::string & cmd = head.text;

    if (cmd == "exit") {
      respond_success();
      return false;
    }
    if (cmd == "set-logic" || cmd == "set-info") {
      respond_success();
      return true;
    }
    if (cmd == "set-option") {
      // (set-option :name value)
      if (ts.peek().kind == TokKind::kColon) {
        ts.next();
        const Token & opt = ts.next();
        if (opt.kind == TokKind::kAtom && opt.text == "print-success") {
          const Token & val = ts.next();
          print_success_ = val.kind == TokKind::kAtom && val.text == "true";
        }
      }
      respond_success();
      return true;
    }
    if (cmd == "echo") {
      const Token & s = ts.next();
      out_ << (s.kind == TokKind::kString ? s.text : s.text) << "\n"
           << std::flush;
      return true;
    }
    if (cmd == "reset") {
      symbols_.clear();
      frames_.clear();
      frames_.emplace_back();
      solver_.reset();
      blaster_.reset();
      have_model_ = false;
      print_success_ = false;
      respond_success();
      return true;
    }
    if (cmd == "declare-const" || cmd == "declare-fun") {
      const Token & name = ts.next();
      if (name.kind != TokKind::kAtom) {
        error("expected a symbol to declare");
        return true;
      }
      if (cmd == "declare-fun") {
        if (ts.next().kind != TokKind::kLParen
            || ts.next().kind != TokKind::kRParen) {
          error("only 0-ary declare-fun is supported");
          return true;
        }
      }
      Sort sort = cfgsmith::smtlib::parse_sort(ts);
      if (symbols_.count(name.text)) {
        error("symbol '" + name.text + "' already declared");
        return true;
      }
      symbols_.emplace(name.text, Variable{ name.text, sort });
      frames_.back().symbols.push_back(name.text);
      have_model_ = false;
      respond_success();
      return true;
    }
    if (cmd == "assert") {
      Term t = cfgsmith::smtlib::parse_term(ts, symbols_);
      if (!t.sort().is_bool()) {
        error("assert needs a Bool term");
        return true;
      }
      frames_.back().assertions.push_back(t);
      have_model_ = false;
      respond_success();
      return true;
    }
    if (cmd == "push" || cmd == "pop") {
      uint64_t n = 1;
      if (ts.peek().kind == TokKind::kAtom) {
        n = std::stoull(ts.next().text);
      }
      if (cmd == "push") {
        for (uint64_t i = 0; i < n; ++i) frames_.emplace_back();
      } else {
        if (n >= frames_.size()) {
          error("pop below the base frame");
          return true;
        }
        for (uint64_t i = 0; i < n; ++i) {
          for (const std::string & s : frames_.back().symbols) {
            symbols_.erase(s);
          }
          frames_.pop_back();
        }
      }
      have_model_ = false;
      respond_success();
      return true;
    }
    if (cmd == "check-sat") {
      solver_ = std::make_unique<SatSolver>();
      blaster_ = std::make_unique<BitBlaster>(*solver_);
      for (const Frame & f : frames_) {
        for (const Term & t : f.assertions) blaster_->assert_true(t);
      }
      SatSolver::Result r = solver_->solve();
      have_model_ = r == SatSolver::Result::kSat;
      out_ << (r == SatSolver::Result::kSat     ? "sat"
               : r == SatSolver::Result::kUnsat ? "unsat"
                                                : "unknown")
           << "\n"
           << std::flush;
      return true;
    }
    if (cmd == "get-value") {
      if (!have_model_) {
        error("no model available");
        return true;
      }
      if (ts.next().kind != TokKind::kLParen) {
        error("get-value expects a term list");
        return true;
      }
      std::string resp = "(";
      bool first = true;
      while (ts.peek().kind == TokKind::kAtom) {
        const Token & sym = ts.next();
        const Variable * v = lookup(sym.text);
        if (!v) {
          error("get-value supports declared symbols only, got '" + sym.text
                + "'");
          return true;
        }
        if (!first) resp += " ";
        first = false;
        resp += "(" + symbol_out(v->name) + " "
                + value_out(*v, blaster_->value_of(*v)) + ")";
      }
      if (first) {
        error("empty get-value");
        return true;
      }
      out_ << resp << ")\n" << std::flush;
      return true;
    }
    error("unsupported command '" + cmd + "'");
    return true;
  } catch (const CfgSmithError & e) {
    error(e.what());
    return true;
  } catch (const std::exception & e) {
    error(std::string("internal: ") + e.what());
    return true;
  }
}

bool read_command(std::istream & in, std::string & out)
{
  out.clear();
  int depth = 0;
  bool started = false;
  enum
  {
    kNormal,
    kComment,
    kPipe,
    kString
  } mode = kNormal;
  char c;
  while (in.get(c)) {
    switch (mode) {
      case kComment:
        if (c == '\n') mode = kNormal;
        break;
      case kPipe:
        out += c;
        if (c == '|') mode = kNormal;
        continue;
      case kString:
        out += c;
        if (c == '"') mode = kNormal;
        continue;
      case kNormal:
        if (c == ';') {
          mode = kComment;
          break;
        }
        if (!started && (c == ' ' || c == '\t' || c == '\n' || c == '\r')) {
          break;
        }
        out += c;
        if (c == '|') {
          mode = kPipe;
        } else if (c == '"') {
          mode = kString;
        } else if (c == '(') {
          started = true;
          ++depth;
        } else if (c == ')') {
          --depth;
          if (started && depth == 0) return true;
        }
        break;
    }
  }
  // EOF: only report a command if something non-trivial accumulated
  return false;
}

int run_smt2(std::istream & in, std::ostream & out)
{
  Smt2Session session(out);
  std::string cmd;
  while (read_command(in, cmd)) {
    if (!session.handle(cmd)) return 0;
  }
  return 0;
}

}  // namespace minibv
