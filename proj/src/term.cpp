#include "cfgsmith/term.h"

#include <algorithm>
#include <cassert>
#include <unordered_map>
#include <unordered_set>

namespace cfgsmith {

struct Term::Node
{
  Op op;
  Sort sort;
  std::vector<Term> children;
  uint64_t value = 0;    // kConst
  std::string name;      // kVar
  unsigned hi = 0;       // kExtract
  unsigned lo = 0;       // kExtract
  size_t hash = 0;

  Node(Op op, Sort sort) : op(op), sort(sort) {}
};

namespace {

size_t hash_combine(size_t seed, size_t v)
{
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

size_t compute_hash(const Term::Node & n)
{
  size_t h = hash_combine(static_cast<size_t>(n.op),
                          n.sort.is_bool() ? 0 : n.sort.width() + 1);
  switch (n.op) {
    case Op::kConst: h = hash_combine(h, std::hash<uint64_t>{}(n.value)); break;
    case Op::kVar: h = hash_combine(h, std::hash<std::string>{}(n.name)); break;
    case Op::kExtract:
      h = hash_combine(h, n.hi);
      h = hash_combine(h, n.lo);
      break;
    default: break;
  }
  for (const Term & c : n.children) {
    h = hash_combine(h, c.hash());
  }
  return h;
}

}  // namespace

const char * op_name(Op op)
{
  switch (op) {
    case Op::kConst: return "const";
    case Op::kVar: return "var";
    case Op::kIte: return "ite";
    case Op::kAnd: return "and";
    case Op::kOr: return "or";
    case Op::kNot: return "not";
    case Op::kImplies: return "=>";
    case Op::kEq: return "=";
    case Op::kBvAdd: return "bvadd";
    case Op::kBvSub: return "bvsub";
    case Op::kBvMul: return "bvmul";
    case Op::kBvUlt: return "bvult";
    case Op::kBvUle: return "bvule";
    case Op::kConcat: return "concat";
    case Op::kExtract: return "extract";
  }
  return "?";
}

Op Term::op() const { return node_->op; }
const Sort & Term::sort() const { return node_->sort; }
std::span<const Term> Term::children() const { return node_->children; }
size_t Term::num_children() const { return node_->children.size(); }
const Term & Term::child(size_t i) const { return node_->children.at(i); }
uint64_t Term::value() const
{
  assert(node_->op == Op::kConst);
  return node_->value;
}
const std::string & Term::name() const
{
  assert(node_->op == Op::kVar);
  return node_->name;
}
unsigned Term::hi() const
{
  assert(node_->op == Op::kExtract);
  return node_->hi;
}
unsigned Term::lo() const
{
  assert(node_->op == Op::kExtract);
  return node_->lo;
}
Variable Term::variable() const { return Variable{ name(), sort() }; }
size_t Term::hash() const { return node_->hash; }

bool Term::operator==(const Term & o) const
{
  if (node_ == o.node_) return true;
  if (!node_ || !o.node_) return false;
  const Node & a = *node_;
  const Node & b = *o.node_;
  if (a.hash != b.hash || a.op != b.op || a.sort != b.sort) return false;
  switch (a.op) {
    case Op::kConst:
      if (a.value != b.value) return false;
      break;
    case Op::kVar:
      if (a.name != b.name) return false;
      break;
    case Op::kExtract:
      if (a.hi != b.hi || a.lo != b.lo) return false;
      break;
    default: break;
  }
  if (a.children.size() != b.children.size()) return false;
  for (size_t i = 0; i < a.children.size(); ++i) {
    if (!(a.children[i] == b.children[i])) return false;
  }
  return true;
}

size_t Term::dag_size() const
{
  std::unordered_set<const Node *> seen;
  std::vector<const Node *> stack{ node_.get() };
  while (!stack.empty()) {
    const Node * n = stack.back();
    stack.pop_back();
    if (!n || !seen.insert(n).second) continue;
    for (const Term & c : n->children) stack.push_back(c.raw());
  }
  return seen.size();
}

Term make_term(Op op, Sort sort, std::vector<Term> children, uint64_t value,
               std::string name, unsigned hi, unsigned lo)
{
  auto n = std::make_shared<Term::Node>(op, sort);
  n->children = std::move(children);
  n->value = value;
  n->name = std::move(name);
  n->hi = hi;
  n->lo = lo;
  n->hash = compute_hash(*n);
  return Term(std::move(n));
}

namespace {

Term node(Op op, Sort sort, std::vector<Term> children)
{
  return make_term(op, sort, std::move(children), 0, "", 0, 0);
}

void require_valid(const Term & t, const char * where)
{
  if (!t.valid()) throw SortError(std::string(where) + ": null term operand");
}

void require_bool(const Term & t, const char * where)
{
  require_valid(t, where);
  if (!t.sort().is_bool()) {
    throw SortError(std::string(where) + ": expected Bool operand, got "
                    + t.sort().str());
  }
}

void require_bv(const Term & t, const char * where)
{
  require_valid(t, where);
  if (!t.sort().is_bv()) {
    throw SortError(std::string(where)
                    + ": expected bit-vector operand, got " + t.sort().str());
  }
}

void require_same_sort(const Term & a, const Term & b, const char * where)
{
  require_valid(a, where);
  require_valid(b, where);
  if (a.sort() != b.sort()) {
    throw SortError(std::string(where) + ": operand sorts differ ("
                    + a.sort().str() + " vs " + b.sort().str() + ")");
  }
}

Term bv_binop(Op op, const Term & a, const Term & b, const char * where)
{
  require_bv(a, where);
  require_bv(b, where);
  require_same_sort(a, b, where);
  return node(op, a.sort(), { a, b });
}

Term bool_binop(Op op, const Term & a, const Term & b, const char * where)
{
  require_bool(a, where);
  require_bool(b, where);
  return node(op, Sort::boolean(), { a, b });
}

}  // namespace

Term bv_const(uint64_t value, unsigned width)
{
  Sort s = Sort::bitvec(width);
  if (value > s.mask()) {
    throw SortError("constant " + std::to_string(value)
                    + " does not fit in " + std::to_string(width) + " bits");
  }
  return make_term(Op::kConst, s, {}, value, "", 0, 0);
}

Term bool_const(bool b)
{
  return make_term(Op::kConst, Sort::boolean(), {}, b ? 1 : 0, "", 0, 0);
}

Term mk_true() { return bool_const(true); }
Term mk_false() { return bool_const(false); }

Term mk_var(const std::string & name, Sort sort)
{
  if (name.empty()) throw SortError("variable name must be nonempty");
  return make_term(Op::kVar, sort, {}, 0, name, 0, 0);
}

Term mk_var(const Variable & v) { return mk_var(v.name, v.sort); }

Term mk_ite(const Term & cond, const Term & then_t, const Term & else_t)
{
  require_bool(cond, "ite");
  require_same_sort(then_t, else_t, "ite");
  return node(Op::kIte, then_t.sort(), { cond, then_t, else_t });
}

Term mk_and(const Term & a, const Term & b)
{
  return bool_binop(Op::kAnd, a, b, "and");
}
Term mk_or(const Term & a, const Term & b)
{
  return bool_binop(Op::kOr, a, b, "or");
}
Term mk_implies(const Term & a, const Term & b)
{
  return bool_binop(Op::kImplies, a, b, "=>");
}

Term mk_not(const Term & a)
{
  require_bool(a, "not");
  return node(Op::kNot, Sort::boolean(), { a });
}

Term mk_eq(const Term & a, const Term & b)
{
  require_same_sort(a, b, "=");
  return node(Op::kEq, Sort::boolean(), { a, b });
}

Term mk_bvadd(const Term & a, const Term & b)
{
  return bv_binop(Op::kBvAdd, a, b, "bvadd");
}
Term mk_bvsub(const Term & a, const Term & b)
{
  return bv_binop(Op::kBvSub, a, b, "bvsub");
}
Term mk_bvmul(const Term & a, const Term & b)
{
  return bv_binop(Op::kBvMul, a, b, "bvmul");
}

Term mk_bvult(const Term & a, const Term & b)
{
  require_bv(a, "bvult");
  require_same_sort(a, b, "bvult");
  return node(Op::kBvUlt, Sort::boolean(), { a, b });
}

Term mk_bvule(const Term & a, const Term & b)
{
  require_bv(a, "bvule");
  require_same_sort(a, b, "bvule");
  return node(Op::kBvUle, Sort::boolean(), { a, b });
}

Term mk_concat(const Term & a, const Term & b)
{
  require_bv(a, "concat");
  require_bv(b, "concat");
  unsigned w = a.sort().width() + b.sort().width();
  if (w > Sort::kMaxWidth) {
    throw SortError("concat result width " + std::to_string(w)
                    + " exceeds the supported maximum");
  }
  return node(Op::kConcat, Sort::bitvec(w), { a, b });
}

Term mk_extract(const Term & t, unsigned hi, unsigned lo)
{
  require_bv(t, "extract");
  if (hi < lo || hi >= t.sort().width()) {
    throw SortError("extract [" + std::to_string(hi) + ":"
                    + std::to_string(lo) + "] out of range for "
                    + t.sort().str());
  }
  return make_term(Op::kExtract, Sort::bitvec(hi - lo + 1), { t }, 0, "", hi,
                   lo);
}

Term mk_and_all(std::span<const Term> terms)
{
  if (terms.empty()) return mk_true();
  Term acc = terms[0];
  for (size_t i = 1; i < terms.size(); ++i) acc = mk_and(acc, terms[i]);
  return acc;
}

Term mk_zext(const Term & t, unsigned width)
{
  require_bv(t, "zext");
  unsigned w = t.sort().width();
  if (w > width) {
    throw SortError("zext target width " + std::to_string(width)
                    + " below operand width " + std::to_string(w));
  }
  if (w == width) return t;
  return mk_concat(bv_const(0, width - w), t);
}

std::set<Variable> free_vars(const Term & t)
{
  std::set<Variable> out;
  std::unordered_set<const Term::Node *> seen;
  std::vector<Term> stack{ t };
  while (!stack.empty()) {
    Term cur = stack.back();
    stack.pop_back();
    if (!cur.valid() || !seen.insert(cur.raw()).second) continue;
    if (cur.op() == Op::kVar) {
      out.insert(cur.variable());
    } else {
      for (const Term & c : cur.children()) stack.push_back(c);
    }
  }
  return out;
}

namespace {

Term substitute_rec(const Term & t,
                    const std::map<std::string, Term> & by_name,
                    std::unordered_map<const Term::Node *, Term> & cache)
{
  auto it = cache.find(t.raw());
  if (it != cache.end()) return it->second;

  Term result;
  if (t.op() == Op::kVar) {
    auto rit = by_name.find(t.name());
    result = (rit != by_name.end()) ? rit->second : t;
  } else if (t.num_children() == 0) {
    result = t;
  } else {
    std::vector<Term> new_children;
    new_children.reserve(t.num_children());
    bool changed = false;
    for (const Term & c : t.children()) {
      Term nc = substitute_rec(c, by_name, cache);
      changed |= !(nc.raw() == c.raw());
      new_children.push_back(std::move(nc));
    }
    if (!changed) {
      result = t;
    } else if (t.op() == Op::kExtract) {
      result = mk_extract(new_children[0], t.hi(), t.lo());
    } else {
      result = make_term(t.op(), t.sort(), std::move(new_children), 0, "", 0,
                         0);
    }
  }
  cache.emplace(t.raw(), result);
  return result;
}

}  // namespace

Term substitute(const Term & t, const std::map<Variable, Term> & subst)
{
  std::map<std::string, Term> by_name;
  for (const auto & [v, repl] : subst) {
    if (!repl.valid() || repl.sort() != v.sort) {
      throw SortError("substitute: replacement for '" + v.name
                      + "' has sort "
                      + (repl.valid() ? repl.sort().str() : "<null>")
                      + ", expected " + v.sort.str());
    }
    by_name.emplace(v.name, repl);
  }
  std::unordered_map<const Term::Node *, Term> cache;
  return substitute_rec(t, by_name, cache);
}

std::vector<Term> conjuncts(const Term & t)
{
  std::vector<Term> out;
  std::vector<Term> stack{ t };
  while (!stack.empty()) {
    Term cur = stack.back();
    stack.pop_back();
    if (cur.valid() && cur.op() == Op::kAnd) {
      // push right first so left conjuncts come out first
      stack.push_back(cur.child(1));
      stack.push_back(cur.child(0));
    } else {
      out.push_back(cur);
    }
  }
  return out;
}

Variable timed(const Variable & v, size_t step)
{
  return Variable{ v.name + "@" + std::to_string(step), v.sort };
}

Term timed_term(const Variable & v, size_t step)
{
  return mk_var(timed(v, step));
}

std::optional<std::pair<std::string, size_t>> split_timed(
    const std::string & name)
{
  size_t at = name.rfind('@');
  if (at == std::string::npos || at == 0 || at + 1 >= name.size()) {
    return std::nullopt;
  }
  size_t step = 0;
  for (size_t i = at + 1; i < name.size(); ++i) {
    if (name[i] < '0' || name[i] > '9') return std::nullopt;
    step = step * 10 + static_cast<size_t>(name[i] - '0');
  }
  return std::make_pair(name.substr(0, at), step);
}

Term at_time(const Term & t, size_t step)
{
  std::map<Variable, Term> subst;
  for (const Variable & v : free_vars(t)) {
    if (!v.name.empty() && v.name.back() == '\'') {
      Variable base{ v.name.substr(0, v.name.size() - 1), v.sort };
      subst.emplace(v, timed_term(base, step + 1));
    } else {
      subst.emplace(v, timed_term(v, step));
    }
  }
  return substitute(t, subst);
}

namespace {

void to_string_rec(const Term & t, std::string & out)
{
  switch (t.op()) {
    case Op::kConst:
      if (t.sort().is_bool()) {
        out += t.value() ? "true" : "false";
      } else {
        out += "(_ bv" + std::to_string(t.value()) + " "
               + std::to_string(t.sort().width()) + ")";
      }
      return;
    case Op::kVar: out += t.name(); return;
    case Op::kExtract:
      out += "((_ extract " + std::to_string(t.hi()) + " "
             + std::to_string(t.lo()) + ") ";
      to_string_rec(t.child(0), out);
      out += ")";
      return;
    default: break;
  }
  out += "(";
  out += op_name(t.op());
  for (const Term & c : t.children()) {
    out += " ";
    to_string_rec(c, out);
  }
  out += ")";
}

}  // namespace

std::string to_string(const Term & t)
{
  if (!t.valid()) return "<null>";
  std::string out;
  to_string_rec(t, out);
  return out;
}

}  // namespace cfgsmith
