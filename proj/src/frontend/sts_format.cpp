#include <set>

#include "cfgsmith/errors.h"
#include "cfgsmith/frontend.h"
#include "cfgsmith/smtlib.h"

namespace cfgsmith {

namespace {

using smtlib::TokKind;
using smtlib::Token;
using smtlib::TokenStream;

const std::set<std::string> kSectionWords{ "sorts", "vars", "init", "trans" };
const std::set<std::string> kReservedWords{
  "sorts", "vars",  "init",   "trans", "input", "output",
  "config", "state", "Bool",  "BitVec", "true",  "false",
};

bool is_section_word(const Token & t)
{
  return t.kind == TokKind::kAtom && kSectionWords.count(t.text);
}

bool is_role_word(const Token & t)
{
  if (t.kind != TokKind::kAtom) return false;
  return t.text == "input" || t.text == "output" || t.text == "config"
         || t.text == "state";
}

std::string expect_name(TokenStream & ts)
{
  const Token & t = ts.next();
  if (t.kind != TokKind::kAtom) {
    throw ParseError("expected identifier", t.line, t.col);
  }
  if (kReservedWords.count(t.text)) {
    throw ParseError("'" + t.text + "' is reserved", t.line, t.col);
  }
  return t.text;
}

Sort parse_sort_field(TokenStream & ts, const std::map<std::string, Sort> & aliases)
{
  const Token & t = ts.peek();
  if (t.kind == TokKind::kAtom && aliases.count(t.text)) {
    ts.next();
    return aliases.at(t.text);
  }
  return smtlib::parse_sort(ts);
}

}  // namespace

TransitionSystem parse_sts(const std::string & text)
{
  TokenStream ts(smtlib::tokenize(text));

  std::map<std::string, Sort> aliases;
  std::vector<Variable> vars;
  std::map<std::string, unsigned> roles;
  Term init, trans;
  bool saw_vars = false, saw_init = false, saw_trans = false;

  while (!ts.at_eof()) {
    const Token & sec = ts.next();
    if (!is_section_word(sec)) {
      throw ParseError("expected section keyword (sorts/vars/init/trans), got '"
                           + sec.text + "'",
                       sec.line, sec.col);
    }
    if (sec.text == "sorts") {
      while (ts.peek().kind == TokKind::kAtom && !is_section_word(ts.peek())) {
        Token name_tok = ts.peek();
        std::string name = expect_name(ts);
        if (aliases.count(name)) {
          throw ParseError("duplicate sort alias '" + name + "'",
                           name_tok.line, name_tok.col);
        }
        const Token & eq = ts.next();
        if (eq.kind != TokKind::kEquals) {
          throw ParseError("expected '=' after sort alias", eq.line, eq.col);
        }
        aliases.emplace(name, parse_sort_field(ts, aliases));
      }
    } else if (sec.text == "vars") {
      if (saw_vars) {
        throw ParseError("duplicate vars section", sec.line, sec.col);
      }
      saw_vars = true;
      while (ts.peek().kind == TokKind::kAtom && !is_section_word(ts.peek())) {
        Token name_tok = ts.peek();
        std::string name = expect_name(ts);
        if (roles.count(name)) {
          throw ParseError("duplicate variable '" + name + "'", name_tok.line,
                           name_tok.col);
        }
        const Token & c1 = ts.next();
        if (c1.kind != TokKind::kColon) {
          throw ParseError("expected ':' after variable name", c1.line,
                           c1.col);
        }
        Sort sort = parse_sort_field(ts, aliases);
        const Token & c2 = ts.next();
        if (c2.kind != TokKind::kColon) {
          throw ParseError("expected ':' before roles", c2.line, c2.col);
        }
        unsigned r = 0;
        while (is_role_word(ts.peek())) {
          r |= role_from_name(ts.next().text);
        }
        vars.push_back(Variable{ name, sort });
        roles.emplace(name, r);
      }
    } else {  // init | trans
      bool is_init = sec.text == "init";
      if (!saw_vars) {
        throw ParseError("vars section must precede " + sec.text, sec.line,
                         sec.col);
      }
      if (is_init ? saw_init : saw_trans) {
        throw ParseError("duplicate " + sec.text + " section", sec.line,
                         sec.col);
      }
      (is_init ? saw_init : saw_trans) = true;

      std::map<std::string, Variable> symbols;
      for (const Variable & v : vars) {
        symbols.emplace(v.name, v);
        if (!is_init) {
          Variable p = TransitionSystem::prime(v);
          symbols.emplace(p.name, p);
        }
      }
      std::vector<Term> terms;
      while (!ts.at_eof() && !is_section_word(ts.peek())) {
        terms.push_back(smtlib::parse_term(ts, symbols));
      }
      if (terms.empty()) {
        throw ParseError("empty " + sec.text + " section", sec.line, sec.col);
      }
      Term merged = terms[0];
      for (size_t i = 1; i < terms.size(); ++i) {
        merged = mk_and(merged, terms[i]);
      }
      (is_init ? init : trans) = merged;
    }
  }

  if (!saw_vars) throw ParseError("missing vars section");
  if (!saw_init) throw ParseError("missing init section");
  if (!saw_trans) throw ParseError("missing trans section");
  return TransitionSystem(std::move(vars), init, trans, std::move(roles));
}

std::string print_sts(const TransitionSystem & ts)
{
  std::string out = "vars\n";
  for (const Variable & v : ts.vars()) {
    out += "  " + v.name + " : " + v.sort.str();
    out += " :";
    unsigned r = ts.roles_of(v.name);
    for (auto [flag, word] :
         { std::pair{ unsigned(kInputRole), "input" },
           std::pair{ unsigned(kOutputRole), "output" },
           std::pair{ unsigned(kConfigRole), "config" },
           std::pair{ unsigned(kStateRole), "state" } }) {
      if (r & flag) out += std::string(" ") + word;
    }
    out += "\n";
  }
  out += "init\n  " + to_string(ts.init()) + "\n";
  out += "trans\n  " + to_string(ts.trans()) + "\n";
  return out;
}

}  // namespace cfgsmith
