#include "cfgsmith/eval.h"

#include <unordered_map>

namespace cfgsmith {

namespace {

Value eval_rec(const Term & t, const Assignment & a,
               std::unordered_map<const Term::Node *, Value> & cache)
{
  auto it = cache.find(t.raw());
  if (it != cache.end()) return it->second;

  Value result{ Sort::boolean(), 0 };
  switch (t.op()) {
    case Op::kConst: result = { t.sort(), t.value() }; break;
    case Op::kVar: result = a.get(t.variable()); break;
    case Op::kIte: {
      bool c = eval_rec(t.child(0), a, cache).as_bool();
      result = eval_rec(t.child(c ? 1 : 2), a, cache);
      break;
    }
    case Op::kAnd: {
      bool l = eval_rec(t.child(0), a, cache).as_bool();
      bool r = eval_rec(t.child(1), a, cache).as_bool();
      result = Value::of_bool(l && r);
      break;
    }
    case Op::kOr: {
      bool l = eval_rec(t.child(0), a, cache).as_bool();
      bool r = eval_rec(t.child(1), a, cache).as_bool();
      result = Value::of_bool(l || r);
      break;
    }
    case Op::kNot:
      result = Value::of_bool(!eval_rec(t.child(0), a, cache).as_bool());
      break;
    case Op::kImplies: {
      bool l = eval_rec(t.child(0), a, cache).as_bool();
      bool r = eval_rec(t.child(1), a, cache).as_bool();
      result = Value::of_bool(!l || r);
      break;
    }
    case Op::kEq: {
      Value l = eval_rec(t.child(0), a, cache);
      Value r = eval_rec(t.child(1), a, cache);
      result = Value::of_bool(l.v == r.v);
      break;
    }
    case Op::kBvAdd:
    case Op::kBvSub:
    case Op::kBvMul: {
      uint64_t l = eval_rec(t.child(0), a, cache).v;
      uint64_t r = eval_rec(t.child(1), a, cache).v;
      uint64_t raw = t.op() == Op::kBvAdd   ? l + r
                     : t.op() == Op::kBvSub ? l - r
                                            : l * r;
      result = { t.sort(), raw & t.sort().mask() };
      break;
    }
    case Op::kBvUlt: {
      uint64_t l = eval_rec(t.child(0), a, cache).v;
      uint64_t r = eval_rec(t.child(1), a, cache).v;
      result = Value::of_bool(l < r);
      break;
    }
    case Op::kBvUle: {
      uint64_t l = eval_rec(t.child(0), a, cache).v;
      uint64_t r = eval_rec(t.child(1), a, cache).v;
      result = Value::of_bool(l <= r);
      break;
    }
    case Op::kConcat: {
      Value l = eval_rec(t.child(0), a, cache);
      Value r = eval_rec(t.child(1), a, cache);
      unsigned rw = t.child(1).sort().width();
      uint64_t raw = (rw == 64) ? r.v : ((l.v << rw) | r.v);
      result = { t.sort(), raw & t.sort().mask() };
      break;
    }
    case Op::kExtract: {
      uint64_t v = eval_rec(t.child(0), a, cache).v;
      result = { t.sort(), (v >> t.lo()) & t.sort().mask() };
      break;
    }
  }
  cache.emplace(t.raw(), result);
  return result;
}

}  // namespace

Value evaluate(const Term & t, const Assignment & a)
{
  if (!t.valid()) throw ModelError("evaluate: null term");
  std::unordered_map<const Term::Node *, Value> cache;
  return eval_rec(t, a, cache);
}

bool evaluate_bool(const Term & t, const Assignment & a)
{
  return evaluate(t, a).as_bool();
}

}  // namespace cfgsmith
