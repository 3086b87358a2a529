#ifndef CFGSMITH_SMTLIB_H
#define CFGSMITH_SMTLIB_H

#include <map>
#include <string>
#include <vector>

#include "cfgsmith/term.h"

namespace cfgsmith {
namespace smtlib {

enum class TokKind
{
  kLParen,
  kRParen,
  kColon,
  kEquals,
  kAtom,
  kString,
  kEof,
};

struct Token
{
  TokKind kind;
  std::string text;
  size_t line;  // 1-based
  size_t col;   // 1-based
};

// Splits text into parens, bare ':' / '=' separators, and atoms.
// Comments run from ';' to end of line. '=' directly followed by '>' or
// another '=' stays part of an atom ("=>", "==").
std::vector<Token> tokenize(const std::string & text);

class TokenStream
{
 public:
  explicit TokenStream(std::vector<Token> toks) : toks_(std::move(toks)) {}

  const Token & peek() const { return toks_[pos_]; }
  const Token & next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  bool at_eof() const { return peek().kind == TokKind::kEof; }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
};

// Parses one SMT-LIB term over the given symbol table. Supported syntax:
// true/false, #b/#x literals, (_ bvN w), symbols, and applications of
// ite, and, or, not, =>, =, bvadd, bvsub, bvmul, bvult, bvule, concat,
// ((_ extract hi lo) t). Unknown symbols raise ParseError at their
// position; ill-sorted applications raise SortError tagged with the
// position of the offending '('.
Term parse_term(TokenStream & ts, const std::map<std::string, Variable> & symbols);

// Convenience wrapper: the text must contain exactly one term.
Term parse_term(const std::string & text,
                const std::map<std::string, Variable> & symbols);

// Parses a sort: "Bool" or "(_ BitVec w)".
Sort parse_sort(TokenStream & ts);

}  // namespace smtlib
}  // namespace cfgsmith

#endif
