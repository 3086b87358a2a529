#include "minibv/bitblast.h"

#include "cfgsmith/errors.h"

namespace minibv {

using cfgsmith::ModelError;
using cfgsmith::Op;
using cfgsmith::Term;
using cfgsmith::Variable;

BitBlaster::BitBlaster(SatSolver & solver) : solver_(solver)
{
  true_lit_ = fresh();
  clause({ true_lit_ });
}

Lit BitBlaster::lit_and(Lit a, Lit b)
{
  if (a == b) return a;
  if (a == neg(b)) return neg(true_lit_);
  if (a == true_lit_) return b;
  if (b == true_lit_) return a;
  if (a == neg(true_lit_) || b == neg(true_lit_)) return neg(true_lit_);
  if (a > b) std::swap(a, b);
  auto key = std::make_tuple(0, a, b);
  if (auto it = gate_cache_.find(key); it != gate_cache_.end()) {
    return it->second;
  }
  Lit o = fresh();
  clause({ neg(a), neg(b), o });
  clause({ a, neg(o) });
  clause({ b, neg(o) });
  gate_cache_.emplace(key, o);
  return o;
}

Lit BitBlaster::lit_or(Lit a, Lit b) { return neg(lit_and(neg(a), neg(b))); }

Lit BitBlaster::lit_xor(Lit a, Lit b)
{
  if (a == b) return neg(true_lit_);
  if (a == neg(b)) return true_lit_;
  if (a == true_lit_) return neg(b);
  if (b == true_lit_) return neg(a);
  if (a == neg(true_lit_)) return b;
  if (b == neg(true_lit_)) return a;
  // normalize: positive lits, canonical order
  bool flip = false;
  if (sign_of(a)) {
    a = neg(a);
    flip = !flip;
  }
  if (sign_of(b)) {
    b = neg(b);
    flip = !flip;
  }
  if (a > b) std::swap(a, b);
  auto key = std::make_tuple(1, a, b);
  Lit o;
  if (auto it = gate_cache_.find(key); it != gate_cache_.end()) {
    o = it->second;
  } else {
    o = fresh();
    clause({ neg(a), neg(b), neg(o) });
    clause({ a, b, neg(o) });
    clause({ neg(a), b, o });
    clause({ a, neg(b), o });
    gate_cache_.emplace(key, o);
  }
  return flip ? neg(o) : o;
}

Lit BitBlaster::lit_mux(Lit c, Lit t, Lit e)
{
  if (c == true_lit_) return t;
  if (c == neg(true_lit_)) return e;
  if (t == e) return t;
  if (t == neg(e)) return lit_xor(c, e);
  Lit o = fresh();
  clause({ neg(c), neg(t), o });
  clause({ neg(c), t, neg(o) });
  clause({ c, neg(e), o });
  clause({ c, e, neg(o) });
  return o;
}

Lit BitBlaster::lit_maj(Lit a, Lit b, Lit c)
{
  if (a == b) return a;
  if (a == c) return a;
  if (b == c) return b;
  Lit o = fresh();
  clause({ neg(a), neg(b), o });
  clause({ neg(a), neg(c), o });
  clause({ neg(b), neg(c), o });
  clause({ a, b, neg(o) });
  clause({ a, c, neg(o) });
  clause({ b, c, neg(o) });
  return o;
}

Lit BitBlaster::lit_and_all(const std::vector<Lit> & ls)
{
  Lit acc = true_lit_;
  for (Lit l : ls) acc = lit_and(acc, l);
  return acc;
}

std::vector<Lit> & BitBlaster::var_bits(const Variable & v)
{
  auto it = vars_.find(v.name);
  if (it != vars_.end()) {
    size_t want = v.sort.is_bool() ? 1 : v.sort.width();
    if (it->second.size() != want) {
      throw ModelError("variable '" + v.name + "' blasted at two widths");
    }
    return it->second;
  }
  unsigned w = v.sort.is_bool() ? 1 : v.sort.width();
  std::vector<Lit> bits;
  for (unsigned i = 0; i < w; ++i) bits.push_back(fresh());
  return vars_.emplace(v.name, std::move(bits)).first->second;
}

std::vector<Lit> BitBlaster::add_bits(const std::vector<Lit> & a,
                                      const std::vector<Lit> & b, Lit carry_in)
{
  std::vector<Lit> out(a.size());
  Lit carry = carry_in;
  for (size_t i = 0; i < a.size(); ++i) {
    out[i] = lit_xor(lit_xor(a[i], b[i]), carry);
    if (i + 1 < a.size()) carry = lit_maj(a[i], b[i], carry);
  }
  return out;
}

const std::vector<Lit> & BitBlaster::blast(const Term & t)
{
  auto it = cache_.find(t.raw());
  if (it != cache_.end()) return it->second;
  std::vector<Lit> bits = blast_node(t);
  // Pin the term: the cache is keyed by node address, so a cached node
  // must never be freed (a later allocation could reuse its address).
  pinned_.push_back(t);
  return cache_.emplace(t.raw(), std::move(bits)).first->second;
}

std::vector<Lit> BitBlaster::blast_node(const Term & t)
{
  switch (t.op()) {
    case Op::kConst: {
      unsigned w = t.sort().is_bool() ? 1 : t.sort().width();
      std::vector<Lit> bits(w);
      for (unsigned i = 0; i < w; ++i) {
        bits[i] = lit_const((t.value() >> i) & 1);
      }
      return bits;
    }
    case Op::kVar: return var_bits(t.variable());
    case Op::kIte: {
      std::vector<Lit> c = blast(t.child(0));
      std::vector<Lit> a = blast(t.child(1));
      std::vector<Lit> b = blast(t.child(2));
      std::vector<Lit> out(a.size());
      for (size_t i = 0; i < a.size(); ++i) {
        out[i] = lit_mux(c[0], a[i], b[i]);
      }
      return out;
    }
    case Op::kAnd:
      return { lit_and(blast(t.child(0))[0], blast(t.child(1))[0]) };
    case Op::kOr:
      return { lit_or(blast(t.child(0))[0], blast(t.child(1))[0]) };
    case Op::kNot: return { lit_not(blast(t.child(0))[0]) };
    case Op::kImplies:
      return { lit_or(neg(blast(t.child(0))[0]), blast(t.child(1))[0]) };
    case Op::kEq: {
      std::vector<Lit> a = blast(t.child(0));
      std::vector<Lit> b = blast(t.child(1));
      std::vector<Lit> eqs(a.size());
      for (size_t i = 0; i < a.size(); ++i) eqs[i] = lit_xnor(a[i], b[i]);
      return { lit_and_all(eqs) };
    }
    case Op::kBvAdd:
      return add_bits(blast(t.child(0)), blast(t.child(1)),
                      lit_const(false));
    case Op::kBvSub: {
      std::vector<Lit> b = blast(t.child(1));
      for (Lit & l : b) l = neg(l);
      return add_bits(blast(t.child(0)), b, lit_const(true));
    }
    case Op::kBvMul: {
      std::vector<Lit> a = blast(t.child(0));
      std::vector<Lit> b = blast(t.child(1));
      size_t w = a.size();
      std::vector<Lit> acc(w, lit_const(false));
      for (size_t j = 0; j < w; ++j) {
        // acc += (b[j] ? a : 0) << j, truncated to w bits
        std::vector<Lit> pp(w, lit_const(false));
        for (size_t i = 0; j + i < w; ++i) {
          pp[j + i] = lit_and(a[i], b[j]);
        }
        acc = add_bits(acc, pp, lit_const(false));
      }
      return acc;
    }
    case Op::kBvUlt:
    case Op::kBvUle: {
      std::vector<Lit> a = blast(t.child(0));
      std::vector<Lit> b = blast(t.child(1));
      Lit lt = lit_const(t.op() == Op::kBvUle);  // result of empty suffix
      for (size_t i = 0; i < a.size(); ++i) {
        // scan LSB->MSB so the MSB comparison dominates
        lt = lit_mux(lit_xnor(a[i], b[i]), lt, lit_and(neg(a[i]), b[i]));
      }
      return { lt };
    }
    case Op::kConcat: {
      std::vector<Lit> hi = blast(t.child(0));
      std::vector<Lit> lo = blast(t.child(1));
      std::vector<Lit> out = lo;
      out.insert(out.end(), hi.begin(), hi.end());
      return out;
    }
    case Op::kExtract: {
      const std::vector<Lit> & a = blast(t.child(0));
      return std::vector<Lit>(a.begin() + t.lo(), a.begin() + t.hi() + 1);
    }
  }
  throw ModelError("bitblast: unhandled operator");
}

void BitBlaster::assert_true(const Term & t)
{
  if (t.op() == Op::kAnd) {
    assert_true(t.child(0));
    assert_true(t.child(1));
    return;
  }
  if (t.op() == Op::kConst) {
    if (t.value()) return;
    clause({ neg(true_lit_) });  // force unsat
    return;
  }
  // Assert common comparison shapes directly, without a Tseitin output
  // literal for the comparison itself.
  if (t.op() == Op::kEq) {
    std::vector<Lit> a = blast(t.child(0));
    std::vector<Lit> b = blast(t.child(1));
    for (size_t i = 0; i < a.size(); ++i) {
      clause({ neg(a[i]), b[i] });
      clause({ a[i], neg(b[i]) });
    }
    return;
  }
  if (t.op() == Op::kNot) {
    const Term & inner = t.child(0);
    if (inner.op() == Op::kEq && inner.child(0).sort().is_bool()) {
      Lit a = blast(inner.child(0))[0];
      Lit b = blast(inner.child(1))[0];
      clause({ a, b });
      clause({ neg(a), neg(b) });
      return;
    }
    clause({ neg(blast(inner)[0]) });
    return;
  }
  clause({ blast(t)[0] });
}

uint64_t BitBlaster::value_of(const Variable & v)
{
  auto it = vars_.find(v.name);
  if (it == vars_.end()) {
    // never blasted: unconstrained, any value works
    return 0;
  }
  uint64_t out = 0;
  for (size_t i = 0; i < it->second.size(); ++i) {
    Lit l = it->second[i];
    bool bit = solver_.model_value(var_of(l)) ^ sign_of(l);
    out |= uint64_t(bit) << i;
  }
  return out;
}

}  // namespace minibv
