#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cctype>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <set>

#include "cfgsmith/errors.h"
#include "cfgsmith/smt_backend.h"
#include "cfgsmith/smtlib.h"

namespace cfgsmith {

namespace {

std::string describe_exit(int status)
{
  if (WIFEXITED(status)) {
    return "exited with status " + std::to_string(WEXITSTATUS(status));
  }
  if (WIFSIGNALED(status)) {
    return "killed by signal " + std::to_string(WTERMSIG(status));
  }
  return "ended with raw status " + std::to_string(status);
}

uint64_t parse_value_atom(const std::string & text, const Sort & sort)
{
  if (sort.is_bool()) {
    if (text == "true") return 1;
    if (text == "false") return 0;
    throw SolverProtocolError("bad boolean value '" + text + "' in model");
  }
  uint64_t v = 0;
  if (text.rfind("#b", 0) == 0) {
    for (size_t i = 2; i < text.size(); ++i) {
      if (text[i] != '0' && text[i] != '1') {
        throw SolverProtocolError("bad binary literal '" + text
                                  + "' in model");
      }
      v = (v << 1) | uint64_t(text[i] - '0');
    }
  } else if (text.rfind("#x", 0) == 0) {
    for (size_t i = 2; i < text.size(); ++i) {
      char c = text[i];
      int d;
      if (c >= '0' && c <= '9') d = c - '0';
      else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
      else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
      else throw SolverProtocolError("bad hex literal '" + text + "' in model");
      v = (v << 4) | uint64_t(d);
    }
  } else {
    throw SolverProtocolError("bad bit-vector value '" + text + "' in model");
  }
  return v & sort.mask();
}

}  // namespace

SolverSession::SolverSession(SolverConfig config) : config_(std::move(config))
{
  if (config_.argv.empty()) {
    throw SolverProtocolError("solver command is empty");
  }
  start();
}

SolverSession::~SolverSession()
{
  try {
    close();
  } catch (const CfgSmithError &) {
    // destructor must not throw; the process was killed either way
  }
}

void SolverSession::start()
{
  ::signal(SIGPIPE, SIG_IGN);

  int to_child[2];
  int from_child[2];
  if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
    throw SolverCrashError(std::string("pipe failed: ") + std::strerror(errno));
  }

  int pid = ::fork();
  if (pid < 0) {
    throw SolverCrashError(std::string("fork failed: ") + std::strerror(errno));
  }
  if (pid == 0) {
    // own process group, so a kill reaches any helpers the solver forks
    ::setpgid(0, 0);
    ::dup2(to_child[0], 0);
    ::dup2(from_child[1], 1);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    std::vector<char *> argv;
    for (const std::string & a : config_.argv) {
      argv.push_back(const_cast<char *>(a.c_str()));
    }
    argv.push_back(nullptr);
    ::execvp(argv[0], argv.data());
    // exec failed; the parent sees EOF and reports the status
    ::_exit(127);
  }

  ::setpgid(pid, pid);  // both sides set it to close the startup race
  ::close(to_child[0]);
  ::close(from_child[1]);
  pid_ = pid;
  to_solver_ = to_child[1];
  from_solver_ = from_child[0];
  open_ = true;

  send("(set-logic QF_BV)");
  send("(set-option :produce-models true)");
}

void SolverSession::send(const std::string & line)
{
  if (!open_) {
    throw SolverProtocolError("session is closed");
  }
  std::string data = line + "\n";
  size_t off = 0;
  while (off < data.size()) {
    ssize_t n = ::write(to_solver_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      die_crash("writing '" + line + "'");
    }
    off += size_t(n);
  }
}

// Pulls one complete response out of rdbuf_: either a bare word up to
// the newline or a balanced s-expression (pipe symbols and string
// literals may contain parentheses).
std::optional<std::string> SolverSession::extract_response()
{
  size_t i = 0;
  while (i < rdbuf_.size() && std::isspace(uint8_t(rdbuf_[i]))) ++i;
  if (i == rdbuf_.size()) {
    rdbuf_.clear();
    return std::nullopt;
  }
  if (rdbuf_[i] != '(') {
    size_t e = rdbuf_.find('\n', i);
    if (e == std::string::npos) return std::nullopt;
    std::string word = rdbuf_.substr(i, e - i);
    while (!word.empty() && std::isspace(uint8_t(word.back()))) word.pop_back();
    rdbuf_.erase(0, e + 1);
    return word;
  }
  int depth = 0;
  bool in_pipe = false;
  bool in_string = false;
  for (size_t j = i; j < rdbuf_.size(); ++j) {
    char c = rdbuf_[j];
    if (in_pipe) {
      if (c == '|') in_pipe = false;
    } else if (in_string) {
      if (c == '"') in_string = false;
    } else if (c == '|') {
      in_pipe = true;
    } else if (c == '"') {
      in_string = true;
    } else if (c == '(') {
      ++depth;
    } else if (c == ')') {
      --depth;
      if (depth == 0) {
        std::string expr = rdbuf_.substr(i, j - i + 1);
        rdbuf_.erase(0, j + 1);
        return expr;
      }
    }
  }
  return std::nullopt;
}

std::string SolverSession::read_response()
{
  using clock = std::chrono::steady_clock;
  auto deadline = clock::now() + std::chrono::milliseconds(config_.timeout_ms);
  for (;;) {
    if (std::optional<std::string> resp = extract_response()) {
      return *resp;
    }
    auto now = clock::now();
    if (now >= deadline) {
      kill_solver();
      throw SolverTimeoutError("solver exceeded "
                               + std::to_string(config_.timeout_ms)
                               + " ms query budget");
    }
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                    deadline - now)
                    .count();
    struct pollfd pfd = { from_solver_, POLLIN, 0 };
    int pr = ::poll(&pfd, 1, int(std::min<int64_t>(left, 1000)));
    if (pr < 0) {
      if (errno == EINTR) continue;
      die_crash("polling for a response");
    }
    if (pr == 0) continue;
    char buf[4096];
    ssize_t n = ::read(from_solver_, buf, sizeof buf);
    if (n < 0) {
      if (errno == EINTR) continue;
      die_crash("reading a response");
    }
    if (n == 0) {
      die_crash("solver closed its output");
    }
    rdbuf_.append(buf, size_t(n));
  }
}

void SolverSession::die_crash(const std::string & context)
{
  kill_solver();
  int status = 0;
  std::string detail = "process already reaped";
  if (pid_ > 0 && ::waitpid(pid_, &status, 0) == pid_) {
    detail = describe_exit(status);
  }
  pid_ = -1;
  throw SolverCrashError("solver failure while " + context + " (" + detail
                         + ")");
}

void SolverSession::kill_solver()
{
  open_ = false;
  if (to_solver_ >= 0) {
    ::close(to_solver_);
    to_solver_ = -1;
  }
  if (from_solver_ >= 0) {
    ::close(from_solver_);
    from_solver_ = -1;
  }
  if (pid_ > 0) {
    ::kill(-pid_, SIGKILL);  // the whole group, orphans included
    ::kill(pid_, SIGKILL);
  }
}

void SolverSession::close()
{
  if (!open_) {
    if (pid_ > 0) {
      int status = 0;
      ::waitpid(pid_, &status, 0);
      pid_ = -1;
    }
    return;
  }
  send("(exit)");
  open_ = false;
  ::close(to_solver_);
  to_solver_ = -1;
  ::close(from_solver_);
  from_solver_ = -1;

  // grace period, then force
  for (int i = 0; i < 200; ++i) {
    int status = 0;
    int r = ::waitpid(pid_, &status, WNOHANG);
    if (r == pid_) {
      pid_ = -1;
      return;
    }
    ::usleep(10 * 1000);
  }
  ::kill(-pid_, SIGKILL);
  ::kill(pid_, SIGKILL);
  int status = 0;
  ::waitpid(pid_, &status, 0);
  pid_ = -1;
}

void SolverSession::declare(const Variable & v)
{
  auto it = declared_.find(v.name);
  if (it != declared_.end()) {
    if (!(it->second == v.sort)) {
      throw SolverProtocolError("variable '" + v.name
                                + "' redeclared with a different sort");
    }
    return;
  }
  send("(declare-const " + smt2_symbol(v.name) + " " + smt2_sort(v.sort)
       + ")");
  declared_.emplace(v.name, v.sort);
  // declarations inside a scope vanish with it (:global-declarations
  // defaults to false), so remember what to forget on pop
  if (depth_ > 0) scope_decls_.back().push_back(v.name);
}

void SolverSession::assert_term(const Term & f)
{
  if (!f.sort().is_bool()) {
    throw SolverProtocolError("asserted term is not Bool");
  }
  std::set<Variable> fv = free_vars(f);
  for (const Variable & v : fv) declare(v);
  for (const Term & c : conjuncts(f)) {
    send("(assert " + smt2_term(c) + ")");
  }
}

void SolverSession::push()
{
  send("(push 1)");
  ++depth_;
  scope_decls_.emplace_back();
}

void SolverSession::pop()
{
  if (depth_ == 0) {
    throw SolverProtocolError("pop at assertion-stack depth 0");
  }
  send("(pop 1)");
  --depth_;
  for (const std::string & name : scope_decls_.back()) declared_.erase(name);
  scope_decls_.pop_back();
}

SatResult SolverSession::check_sat(const std::vector<Variable> & query_vars)
{
  for (const Variable & v : query_vars) declare(v);
  send("(check-sat)");
  std::string resp = read_response();
  if (resp == "unsat") {
    return { SatResult::Status::kUnsat, std::nullopt };
  }
  if (resp == "unknown") {
    return { SatResult::Status::kUnknown, std::nullopt };
  }
  if (resp != "sat") {
    if (resp.rfind("(error", 0) == 0) {
      throw SolverProtocolError("solver error: " + resp);
    }
    throw SolverProtocolError("unexpected check-sat answer: '" + resp + "'");
  }
  if (query_vars.empty()) {
    return { SatResult::Status::kSat, Assignment{} };
  }
  std::string cmd = "(get-value (";
  for (size_t i = 0; i < query_vars.size(); ++i) {
    if (i) cmd += " ";
    cmd += smt2_symbol(query_vars[i].name);
  }
  cmd += "))";
  send(cmd);
  std::string vals = read_response();
  if (vals.rfind("(error", 0) == 0) {
    throw SolverProtocolError("solver error: " + vals);
  }
  return { SatResult::Status::kSat, parse_model(vals, query_vars) };
}

Assignment SolverSession::parse_model(const std::string & text,
                                      const std::vector<Variable> & query_vars)
{
  std::map<std::string, Sort> want;
  for (const Variable & v : query_vars) want.emplace(v.name, v.sort);

  Assignment model;
  try {
    using smtlib::TokKind;
    smtlib::TokenStream ts(smtlib::tokenize(text));
    if (ts.next().kind != TokKind::kLParen) {
      throw SolverProtocolError("model does not start with '('");
    }
    while (ts.peek().kind == TokKind::kLParen) {
      ts.next();
      const smtlib::Token & name = ts.next();
      if (name.kind != TokKind::kAtom) {
        throw SolverProtocolError("bad symbol in model");
      }
      auto it = want.find(name.text);
      if (it == want.end()) {
        throw SolverProtocolError("model names unqueried symbol '" + name.text
                                  + "'");
      }
      uint64_t v;
      if (ts.peek().kind == TokKind::kLParen) {
        // (_ bvN w)
        ts.next();
        const smtlib::Token & u = ts.next();
        const smtlib::Token & bv = ts.next();
        const smtlib::Token & w = ts.next();
        if (u.text != "_" || bv.text.rfind("bv", 0) != 0
            || ts.next().kind != TokKind::kRParen) {
          throw SolverProtocolError("bad value shape in model");
        }
        (void)w;
        v = std::stoull(bv.text.substr(2)) & it->second.mask();
      } else {
        v = parse_value_atom(ts.next().text, it->second);
      }
      if (ts.next().kind != TokKind::kRParen) {
        throw SolverProtocolError("unterminated model pair");
      }
      Variable var{ it->first, it->second };
      if (it->second.is_bool()) {
        model.set_bool(var, v != 0);
      } else {
        model.set_bv(var, v);
      }
    }
    if (ts.next().kind != TokKind::kRParen) {
      throw SolverProtocolError("unterminated model");
    }
  } catch (const ParseError & e) {
    throw SolverProtocolError(std::string("unparseable model: ") + e.what());
  }

  for (const Variable & v : query_vars) {
    if (!model.contains(v.name)) {
      throw SolverProtocolError("model is missing '" + v.name + "'");
    }
  }
  return model;
}

SatResult check_sat_formula(const SolverConfig & config, const Term & f,
                            const std::vector<Variable> & query_vars)
{
  SolverSession session(config);
  session.assert_term(f);
  SatResult r = session.check_sat(query_vars);
  session.close();
  return r;
}

}  // namespace cfgsmith
