#include <set>

#include "cfgsmith/errors.h"
#include "cfgsmith/smt_backend.h"

namespace cfgsmith {

namespace {

bool is_simple_symbol(const std::string & name)
{
  if (name.empty()) return false;
  if (name[0] >= '0' && name[0] <= '9') return false;
  for (char c : name) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')
              || (c >= '0' && c <= '9') || c == '_' || c == '.' || c == '-';
    if (!ok) return false;
  }
  return true;
}

const char * smt2_op_name(Op op)
{
  switch (op) {
    case Op::kAnd: return "and";
    case Op::kOr: return "or";
    case Op::kNot: return "not";
    case Op::kImplies: return "=>";
    case Op::kEq: return "=";
    case Op::kIte: return "ite";
    case Op::kBvAdd: return "bvadd";
    case Op::kBvSub: return "bvsub";
    case Op::kBvMul: return "bvmul";
    case Op::kBvUlt: return "bvult";
    case Op::kBvUle: return "bvule";
    case Op::kConcat: return "concat";
    default: return nullptr;
  }
}

void render_const(const Term & t, std::string & out)
{
  if (t.sort().is_bool()) {
    out += t.value() ? "true" : "false";
    return;
  }
  unsigned w = t.sort().width();
  if (w % 4 == 0) {
    out += "#x";
    for (unsigned i = w; i > 0; i -= 4) {
      out += "0123456789abcdef"[(t.value() >> (i - 4)) & 0xf];
    }
  } else {
    out += "#b";
    for (unsigned i = w; i-- > 0;) {
      out += ((t.value() >> i) & 1) ? '1' : '0';
    }
  }
}

void render(const Term & t, std::string & out)
{
  switch (t.op()) {
    case Op::kVar:
      out += smt2_symbol(t.name());
      return;
    case Op::kConst:
      render_const(t, out);
      return;
    case Op::kExtract:
      out += "((_ extract " + std::to_string(t.hi()) + " "
             + std::to_string(t.lo()) + ") ";
      render(t.child(0), out);
      out += ")";
      return;
    default:
      break;
  }
  const char * name = smt2_op_name(t.op());
  if (name == nullptr) {
    throw ModelError("term has no SMT-LIB rendering");
  }
  out += "(";
  out += name;
  for (const Term & c : t.children()) {
    out += " ";
    render(c, out);
  }
  out += ")";
}

}  // namespace

std::string smt2_symbol(const std::string & name)
{
  return is_simple_symbol(name) ? name : "|" + name + "|";
}

std::string smt2_sort(const Sort & s)
{
  if (s.is_bool()) return "Bool";
  return "(_ BitVec " + std::to_string(s.width()) + ")";
}

std::string smt2_term(const Term & t)
{
  std::string out;
  render(t, out);
  return out;
}

std::string serialize_smt2(const Term & f)
{
  std::string out;
  std::set<Variable> fv = free_vars(f);
  for (const Variable & v : fv) {
    out += "(declare-const " + smt2_symbol(v.name) + " " + smt2_sort(v.sort)
           + ")\n";
  }
  for (const Term & c : conjuncts(f)) {
    out += "(assert " + smt2_term(c) + ")\n";
  }
  return out;
}

}  // namespace cfgsmith
