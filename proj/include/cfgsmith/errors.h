#ifndef CFGSMITH_ERRORS_H
#define CFGSMITH_ERRORS_H

#include <stdexcept>
#include <string>

namespace cfgsmith {

class CfgSmithError : public std::runtime_error
{
 public:
  explicit CfgSmithError(const std::string & msg) : std::runtime_error(msg) {}
};

// Ill-sorted term construction or a substitution that changes a sort.
class SortError : public CfgSmithError
{
 public:
  using CfgSmithError::CfgSmithError;
};

// evaluate() hit a variable with no binding in the assignment.
class UnboundVariableError : public CfgSmithError
{
 public:
  using CfgSmithError::CfgSmithError;
};

// Malformed model, trace, decomposition or role data.
class ModelError : public CfgSmithError
{
 public:
  using CfgSmithError::CfgSmithError;
};

// Text input that does not parse; carries line/column when known.
class ParseError : public CfgSmithError
{
 public:
  ParseError(const std::string & msg, size_t line, size_t col)
      : CfgSmithError(format(msg, line, col)), line_(line), col_(col)
  {
  }
  explicit ParseError(const std::string & msg)
      : CfgSmithError(msg), line_(0), col_(0)
  {
  }
  size_t line() const { return line_; }
  size_t col() const { return col_; }

 private:
  static std::string format(const std::string & msg, size_t line, size_t col)
  {
    return "line " + std::to_string(line) + ":" + std::to_string(col) + ": "
           + msg;
  }
  size_t line_;
  size_t col_;
};

// Backend solver failures, each kind distinct so callers can react.
class SolverError : public CfgSmithError
{
 public:
  using CfgSmithError::CfgSmithError;
};

class SolverCrashError : public SolverError
{
 public:
  using SolverError::SolverError;
};

class SolverProtocolError : public SolverError
{
 public:
  using SolverError::SolverError;
};

class SolverTimeoutError : public SolverError
{
 public:
  using SolverError::SolverError;
};

}  // namespace cfgsmith

#endif
