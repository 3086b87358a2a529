#include "cfgsmith/smtlib.h"

#include <cstdlib>

#include "cfgsmith/errors.h"

namespace cfgsmith {
namespace smtlib {

namespace {

bool is_atom_char(char c)
{
  switch (c) {
    case '(':
    case ')':
    case ':':
    case ';':
    case ' ':
    case '\t':
    case '\r':
    case '\n': return false;
    default: return true;
  }
}

}  // namespace

std::vector<Token> tokenize(const std::string & text)
{
  std::vector<Token> out;
  size_t line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t j = 0; j < n; ++j) {
      if (text[i + j] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    i += n;
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == ';') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    size_t tline = line, tcol = col;
    if (c == '|') {
      size_t j = i + 1;
      while (j < text.size() && text[j] != '|') ++j;
      if (j == text.size()) {
        throw ParseError("unterminated |symbol|", tline, tcol);
      }
      out.push_back({ TokKind::kAtom, text.substr(i + 1, j - i - 1), tline,
                      tcol });
      advance(j + 1 - i);
      continue;
    }
    if (c == '"') {
      size_t j = i + 1;
      while (j < text.size() && text[j] != '"') ++j;
      if (j == text.size()) {
        throw ParseError("unterminated string literal", tline, tcol);
      }
      out.push_back({ TokKind::kString, text.substr(i + 1, j - i - 1), tline,
                      tcol });
      advance(j + 1 - i);
      continue;
    }
    if (c == '(') {
      out.push_back({ TokKind::kLParen, "(", tline, tcol });
      advance(1);
      continue;
    }
    if (c == ')') {
      out.push_back({ TokKind::kRParen, ")", tline, tcol });
      advance(1);
      continue;
    }
    if (c == ':') {
      out.push_back({ TokKind::kColon, ":", tline, tcol });
      advance(1);
      continue;
    }
    // '=' alone is the sorts-section separator; "=>" and "=" followed by
    // more atom characters belong to term syntax. A bare "=" atom is
    // also the equality operator, so only treat it as kEquals here and
    // let the term parser accept either.
    size_t j = i;
    while (j < text.size() && is_atom_char(text[j])) ++j;
    std::string atom = text.substr(i, j - i);
    if (atom == "=") {
      out.push_back({ TokKind::kEquals, "=", tline, tcol });
    } else {
      out.push_back({ TokKind::kAtom, atom, tline, tcol });
    }
    advance(j - i);
  }
  out.push_back({ TokKind::kEof, "", line, col });
  return out;
}

namespace {

[[noreturn]] void fail(const Token & t, const std::string & msg)
{
  throw ParseError(msg, t.line, t.col);
}

uint64_t parse_u64(const Token & t, const std::string & digits, int base)
{
  if (digits.empty()) fail(t, "empty numeral");
  uint64_t v = 0;
  for (char c : digits) {
    int d;
    if (c >= '0' && c <= '9') {
      d = c - '0';
    } else if (c >= 'a' && c <= 'f') {
      d = c - 'a' + 10;
    } else if (c >= 'A' && c <= 'F') {
      d = c - 'A' + 10;
    } else {
      fail(t, "bad digit '" + std::string(1, c) + "' in numeral");
    }
    if (d >= base) fail(t, "bad digit '" + std::string(1, c) + "' in numeral");
    uint64_t nv = v * base + d;
    if (nv / base != v || nv % base != uint64_t(d)) {
      fail(t, "numeral does not fit in 64 bits");
    }
    v = nv;
  }
  return v;
}

bool all_decimal(const std::string & s)
{
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

Term parse_atom(const Token & t,
                const std::map<std::string, Variable> & symbols)
{
  const std::string & a = t.text;
  if (a == "true") return mk_true();
  if (a == "false") return mk_false();
  if (a.size() > 2 && a[0] == '#' && a[1] == 'b') {
    std::string bits = a.substr(2);
    if (bits.size() > 64) fail(t, "binary literal wider than 64 bits");
    return bv_const(parse_u64(t, bits, 2), unsigned(bits.size()));
  }
  if (a.size() > 2 && a[0] == '#' && a[1] == 'x') {
    std::string hex = a.substr(2);
    if (hex.size() > 16) fail(t, "hex literal wider than 64 bits");
    return bv_const(parse_u64(t, hex, 16), unsigned(4 * hex.size()));
  }
  auto it = symbols.find(a);
  if (it == symbols.end()) fail(t, "unknown symbol '" + a + "'");
  return mk_var(it->second);
}

struct AppHead
{
  enum Kind
  {
    kPlain,
    kExtract
  } kind;
  std::string name;  // kPlain
  unsigned hi, lo;   // kExtract
};

// Parses the head of an application: either a plain operator symbol or
// an indexed identifier "(_ extract hi lo)" / the literal "(_ bvN w)".
// For "(_ bvN w)" the whole application is the literal and the caller
// must not expect arguments.
AppHead parse_head(TokenStream & ts)
{
  const Token & t = ts.peek();
  if (t.kind == TokKind::kAtom || t.kind == TokKind::kEquals) {
    AppHead h;
    h.kind = AppHead::kPlain;
    h.name = ts.next().text;
    return h;
  }
  if (t.kind != TokKind::kLParen) fail(t, "expected operator");
  ts.next();
  const Token & u = ts.next();
  if (u.kind != TokKind::kAtom || u.text != "_") {
    fail(u, "expected '_' in indexed identifier");
  }
  const Token & w = ts.next();
  if (w.kind != TokKind::kAtom) fail(w, "expected indexed identifier name");
  if (w.text == "extract") {
    const Token & hi = ts.next();
    const Token & lo = ts.next();
    if (hi.kind != TokKind::kAtom || !all_decimal(hi.text)) {
      fail(hi, "expected numeral");
    }
    if (lo.kind != TokKind::kAtom || !all_decimal(lo.text)) {
      fail(lo, "expected numeral");
    }
    if (ts.next().kind != TokKind::kRParen) fail(ts.peek(), "expected ')'");
    AppHead h;
    h.kind = AppHead::kExtract;
    h.hi = unsigned(parse_u64(hi, hi.text, 10));
    h.lo = unsigned(parse_u64(lo, lo.text, 10));
    return h;
  }
  fail(w, "unsupported indexed identifier '" + w.text + "'");
}

Term build_app(const Token & at, const std::string & name,
               const std::vector<Term> & args)
{
  auto want = [&](size_t n) {
    if (args.size() != n) {
      fail(at, "'" + name + "' expects " + std::to_string(n)
                   + " arguments, got " + std::to_string(args.size()));
    }
  };
  auto fold = [&](Term (*f)(const Term &, const Term &)) {
    if (args.size() < 2) {
      fail(at, "'" + name + "' expects at least 2 arguments");
    }
    Term acc = args[0];
    for (size_t i = 1; i < args.size(); ++i) acc = f(acc, args[i]);
    return acc;
  };
  if (name == "ite") {
    want(3);
    return mk_ite(args[0], args[1], args[2]);
  }
  if (name == "and") return fold(mk_and);
  if (name == "or") return fold(mk_or);
  if (name == "not") {
    want(1);
    return mk_not(args[0]);
  }
  if (name == "=>") {
    // right-associative: (=> a b c) = a => (b => c)
    if (args.size() < 2) fail(at, "'=>' expects at least 2 arguments");
    Term acc = args.back();
    for (size_t i = args.size() - 1; i-- > 0;) {
      acc = mk_implies(args[i], acc);
    }
    return acc;
  }
  if (name == "=") {
    want(2);
    return mk_eq(args[0], args[1]);
  }
  if (name == "bvadd") return fold(mk_bvadd);
  if (name == "bvsub") {
    want(2);
    return mk_bvsub(args[0], args[1]);
  }
  if (name == "bvmul") return fold(mk_bvmul);
  if (name == "bvult") {
    want(2);
    return mk_bvult(args[0], args[1]);
  }
  if (name == "bvule") {
    want(2);
    return mk_bvule(args[0], args[1]);
  }
  if (name == "concat") {
    want(2);
    return mk_concat(args[0], args[1]);
  }
  fail(at, "unknown operator '" + name + "'");
}

}  // namespace

Term parse_term(TokenStream & ts, const std::map<std::string, Variable> & symbols)
{
  const Token & t = ts.peek();
  switch (t.kind) {
    case TokKind::kAtom: return parse_atom(ts.next(), symbols);
    case TokKind::kEquals: fail(t, "'=' is not a term");
    case TokKind::kLParen: break;
    case TokKind::kRParen: fail(t, "unexpected ')'");
    case TokKind::kColon: fail(t, "unexpected ':'");
    case TokKind::kString: fail(t, "unexpected string literal");
    case TokKind::kEof: fail(t, "unexpected end of input");
  }
  Token open = ts.next();  // '('
  if (ts.peek().kind == TokKind::kAtom && ts.peek().text == "_") {
    // standalone indexed identifier: only "(_ bvN w)" is a term
    ts.next();
    const Token & w = ts.next();
    if (w.kind != TokKind::kAtom || w.text.size() < 3
        || w.text.compare(0, 2, "bv") != 0
        || !all_decimal(w.text.substr(2))) {
      fail(w, "expected 'bvN' literal after '_'");
    }
    const Token & wd = ts.next();
    if (wd.kind != TokKind::kAtom || !all_decimal(wd.text)) {
      fail(wd, "expected bit-vector width");
    }
    if (ts.next().kind != TokKind::kRParen) fail(ts.peek(), "expected ')'");
    try {
      return bv_const(parse_u64(w, w.text.substr(2), 10),
                      unsigned(parse_u64(wd, wd.text, 10)));
    } catch (const SortError & e) {
      throw SortError(std::string(e.what()) + " at line "
                      + std::to_string(open.line) + ":"
                      + std::to_string(open.col));
    }
  }
  AppHead head = parse_head(ts);
  std::vector<Term> args;
  while (ts.peek().kind != TokKind::kRParen) {
    if (ts.at_eof()) fail(ts.peek(), "missing ')'");
    args.push_back(parse_term(ts, symbols));
  }
  ts.next();  // ')'
  try {
    if (head.kind == AppHead::kExtract) {
      if (args.size() != 1) fail(open, "'extract' expects 1 argument");
      return mk_extract(args[0], head.hi, head.lo);
    }
    return build_app(open, head.name, args);
  } catch (const SortError & e) {
    throw SortError(std::string(e.what()) + " at line "
                    + std::to_string(open.line) + ":"
                    + std::to_string(open.col));
  }
}

Term parse_term(const std::string & text,
                const std::map<std::string, Variable> & symbols)
{
  TokenStream ts(tokenize(text));
  Term t = parse_term(ts, symbols);
  if (!ts.at_eof()) fail(ts.peek(), "trailing input after term");
  return t;
}

Sort parse_sort(TokenStream & ts)
{
  const Token & t = ts.peek();
  if (t.kind == TokKind::kAtom && t.text == "Bool") {
    ts.next();
    return Sort::boolean();
  }
  if (t.kind != TokKind::kLParen) {
    fail(t, "expected sort ('Bool' or '(_ BitVec w)')");
  }
  Token open = ts.next();
  const Token & u = ts.next();
  if (u.kind != TokKind::kAtom || u.text != "_") fail(u, "expected '_'");
  const Token & b = ts.next();
  if (b.kind != TokKind::kAtom || b.text != "BitVec") {
    fail(b, "expected 'BitVec'");
  }
  const Token & w = ts.next();
  if (w.kind != TokKind::kAtom || !all_decimal(w.text)) {
    fail(w, "expected width numeral");
  }
  if (ts.next().kind != TokKind::kRParen) fail(ts.peek(), "expected ')'");
  try {
    return Sort::bitvec(unsigned(parse_u64(w, w.text, 10)));
  } catch (const SortError & e) {
    throw SortError(std::string(e.what()) + " at line "
                    + std::to_string(open.line) + ":"
                    + std::to_string(open.col));
  }
}

}  // namespace smtlib
}  // namespace cfgsmith
