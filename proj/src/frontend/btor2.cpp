#include <cstdint>
#include <set>
#include <sstream>

#include "cfgsmith/errors.h"
#include "cfgsmith/frontend.h"

namespace cfgsmith {

namespace {

struct Btor2Parser
{
  std::map<uint64_t, Sort> sorts;
  std::map<uint64_t, Term> nodes;
  // id -> variable, for input/state lines only
  std::map<uint64_t, Variable> node_var;
  std::vector<Variable> vars;               // declaration order
  std::map<std::string, unsigned> roles;    // structural roles
  std::vector<uint64_t> output_ids;         // args of output lines
  std::vector<Term> init_conjuncts;
  std::vector<Term> next_conjuncts;
  std::set<uint64_t> next_defined;
  size_t lineno = 0;

  [[noreturn]] void fail(const std::string & msg)
  {
    throw ParseError(msg, lineno, 1);
  }

  uint64_t num(const std::string & s, const char * what)
  {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      fail(std::string("expected ") + what + ", got '" + s + "'");
    }
    try {
      return std::stoull(s);
    } catch (const std::exception &) {
      fail(std::string(what) + " out of range: '" + s + "'");
    }
  }

  Sort sort_of(uint64_t id)
  {
    auto it = sorts.find(id);
    if (it == sorts.end()) {
      fail("dangling sort id " + std::to_string(id));
    }
    return it->second;
  }

  Term node_of(uint64_t id)
  {
    auto it = nodes.find(id);
    if (it == nodes.end()) {
      fail("dangling node id " + std::to_string(id));
    }
    return it->second;
  }

  Term to_bool(const Term & t)
  {
    if (t.sort().is_bool()) return t;
    if (t.sort().width() != 1) {
      fail("expected a width-1 operand, got " + t.sort().str());
    }
    return mk_eq(t, bv_const(1, 1));
  }

  Term to_bv1(const Term & t)
  {
    if (!t.sort().is_bool()) return t;
    return mk_ite(t, bv_const(1, 1), bv_const(0, 1));
  }

  Variable declare(uint64_t id, Sort sort, const std::string & symbol,
                   unsigned role)
  {
    std::string name = symbol.empty() ? "n" + std::to_string(id) : symbol;
    if (roles.count(name)) fail("duplicate variable name '" + name + "'");
    Variable v{ name, sort };
    vars.push_back(v);
    roles.emplace(name, role);
    node_var.emplace(id, v);
    nodes.emplace(id, mk_var(v));
    return v;
  }

  void parse_line(const std::string & raw);
  TransitionSystem finish(const std::map<std::string, unsigned> & sidecar);
};

void Btor2Parser::parse_line(const std::string & raw)
{
  std::string text = raw;
  if (size_t sc = text.find(';'); sc != std::string::npos) {
    text.resize(sc);
  }
  std::istringstream ss(text);
  std::vector<std::string> f;
  for (std::string w; ss >> w;) f.push_back(w);
  if (f.empty()) return;

  uint64_t id = num(f[0], "node id");
  if (nodes.count(id) || sorts.count(id)) {
    fail("duplicate node id " + std::to_string(id));
  }
  if (f.size() < 2) fail("missing keyword");
  const std::string & kw = f[1];
  auto want = [&](size_t n) {
    if (f.size() != n) {
      fail("'" + kw + "' expects " + std::to_string(n - 2) + " arguments");
    }
  };
  auto wrap_sort_error = [&](auto && fn) -> Term {
    try {
      return fn();
    } catch (const SortError & e) {
      throw SortError(std::string(e.what()) + " at line "
                      + std::to_string(lineno));
    }
  };

  if (kw == "sort") {
    want(4);
    if (f[2] != "bitvec") {
      fail("unsupported sort '" + f[2] + "' (only bitvec)");
    }
    uint64_t w = num(f[3], "sort width");
    if (w == 0 || w > 64) fail("unsupported bitvec width " + f[3]);
    sorts.emplace(id, Sort::bitvec(unsigned(w)));
    return;
  }
  if (kw == "input" || kw == "state") {
    if (f.size() != 3 && f.size() != 4) {
      fail("'" + kw + "' expects a sort id and optional symbol");
    }
    Sort s = sort_of(num(f[2], "sort id"));
    unsigned role = kw == "input" ? kInputRole : kStateRole;
    declare(id, s, f.size() == 4 ? f[3] : "", role);
    return;
  }
  if (kw == "output") {
    if (f.size() != 3 && f.size() != 4) {
      fail("'output' expects a node id and optional symbol");
    }
    uint64_t target = num(f[2], "node id");
    node_of(target);  // existence check
    if (!node_var.count(target)) {
      fail("output of a non-variable node is not supported");
    }
    output_ids.push_back(target);
    roles[node_var.at(target).name] |= kOutputRole;
    return;
  }
  if (kw == "const" || kw == "constd" || kw == "consth") {
    want(4);
    Sort s = sort_of(num(f[2], "sort id"));
    int base = kw == "const" ? 2 : kw == "constd" ? 10 : 16;
    uint64_t v = 0;
    for (char c : f[3]) {
      int d = c >= '0' && c <= '9'   ? c - '0'
              : c >= 'a' && c <= 'f' ? c - 'a' + 10
              : c >= 'A' && c <= 'F' ? c - 'A' + 10
                                     : -1;
      if (d < 0 || d >= base) fail("bad digit in constant '" + f[3] + "'");
      uint64_t nv = v * base + uint64_t(d);
      if (v != 0 && nv / base != v) fail("constant does not fit in 64 bits");
      v = nv;
    }
    nodes.emplace(id, wrap_sort_error([&] {
      return bv_const(v, s.width());
    }));
    return;
  }
  if (kw == "zero" || kw == "one") {
    want(3);
    Sort s = sort_of(num(f[2], "sort id"));
    nodes.emplace(id, bv_const(kw == "one" ? 1 : 0, s.width()));
    return;
  }
  if (kw == "init" || kw == "next") {
    want(5);
    Sort s = sort_of(num(f[2], "sort id"));
    uint64_t sid = num(f[3], "state id");
    Term value = to_bv1(node_of(num(f[4], "node id")));
    if (!node_var.count(sid) || !(roles.at(node_var.at(sid).name) & kStateRole)) {
      fail("'" + kw + "' of a non-state node " + std::to_string(sid));
    }
    const Variable & v = node_var.at(sid);
    if (v.sort != s || value.sort() != s) {
      fail("width mismatch in '" + kw + "' for state '" + v.name + "'");
    }
    if (kw == "init") {
      init_conjuncts.push_back(mk_eq(mk_var(v), value));
    } else {
      if (!next_defined.insert(sid).second) {
        fail("second 'next' for state '" + v.name + "'");
      }
      next_conjuncts.push_back(
          mk_eq(mk_var(TransitionSystem::prime(v)), value));
    }
    nodes.emplace(id, value);  // btor2 allows referencing init/next nodes
    return;
  }

  // expression operators: <id> <op> <sortid> <args...>
  static const std::set<std::string> kOps{ "add",  "sub",     "mul", "eq",
                                           "ne",   "ite",     "and", "or",
                                           "not",  "implies", "ult", "ulte",
                                           "concat", "slice", "uext" };
  if (!kOps.count(kw)) {
    fail("unsupported keyword '" + kw + "'");
  }
  Sort s = sort_of(num(f[2], "sort id"));
  auto arg = [&](size_t i) { return node_of(num(f[2 + i], "node id")); };
  Term r = wrap_sort_error([&]() -> Term {
    if (kw == "add" || kw == "sub" || kw == "mul" || kw == "concat") {
      want(5);
      Term a = arg(1), b = arg(2);
      if (kw == "add") return mk_bvadd(a, b);
      if (kw == "sub") return mk_bvsub(a, b);
      if (kw == "mul") return mk_bvmul(a, b);
      return mk_concat(a, b);
    }
    if (kw == "eq" || kw == "ne" || kw == "ult" || kw == "ulte") {
      want(5);
      Term a = arg(1), b = arg(2);
      Term c = kw == "eq"   ? mk_eq(a, b)
               : kw == "ne" ? mk_not(mk_eq(a, b))
               : kw == "ult" ? mk_bvult(a, b)
                             : mk_bvule(a, b);
      return to_bv1(c);
    }
    if (kw == "and" || kw == "or" || kw == "implies") {
      want(5);
      Term a = to_bool(arg(1)), b = to_bool(arg(2));
      Term c = kw == "and" ? mk_and(a, b)
               : kw == "or" ? mk_or(a, b)
                            : mk_implies(a, b);
      return to_bv1(c);
    }
    if (kw == "not") {
      want(4);
      return to_bv1(mk_not(to_bool(arg(1))));
    }
    if (kw == "ite") {
      want(6);
      return mk_ite(to_bool(arg(1)), arg(2), arg(3));
    }
    if (kw == "slice") {
      want(6);
      Term a = arg(1);
      uint64_t hi = num(f[4], "slice upper"), lo = num(f[5], "slice lower");
      return mk_extract(a, unsigned(hi), unsigned(lo));
    }
    // uext
    want(5);
    Term a = arg(1);
    uint64_t ext = num(f[4], "extension width");
    return mk_zext(a, a.sort().width() + unsigned(ext));
  });
  if (r.sort() != s) {
    fail("width mismatch: '" + kw + "' produced " + r.sort().str()
         + " but line declares " + s.str());
  }
  nodes.emplace(id, r);
}

TransitionSystem Btor2Parser::finish(
    const std::map<std::string, unsigned> & sidecar)
{
  for (const auto & [name, r] : sidecar) {
    auto it = roles.find(name);
    if (it == roles.end()) {
      throw ModelError("role map names unknown variable '" + name + "'");
    }
    it->second = r;
  }
  for (uint64_t id : output_ids) {
    const std::string & name = node_var.at(id).name;
    if (!(roles.at(name) & kOutputRole)) {
      throw ModelError("missing output role for declared output '" + name
                       + "'");
    }
  }
  Term init = init_conjuncts.empty() ? mk_true()
                                     : mk_and_all(init_conjuncts);
  Term trans = next_conjuncts.empty() ? mk_true()
                                      : mk_and_all(next_conjuncts);
  return TransitionSystem(std::move(vars), init, trans, std::move(roles));
}

}  // namespace

TransitionSystem parse_btor2(const std::string & text,
                             const std::map<std::string, unsigned> & roles)
{
  Btor2Parser p;
  std::istringstream ss(text);
  for (std::string line; std::getline(ss, line);) {
    ++p.lineno;
    p.parse_line(line);
  }
  return p.finish(roles);
}

}  // namespace cfgsmith
