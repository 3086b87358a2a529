#ifndef CFGSMITH_MINIBV_BITBLAST_H
#define CFGSMITH_MINIBV_BITBLAST_H

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "cfgsmith/term.h"
#include "minibv/sat.h"

namespace minibv {

// Tseitin bit-blaster from cfgsmith terms to CNF. Bit vectors are
// LSB-first; Bool terms are single bits. Variables share bits by name,
// so the same symbol across terms maps to one bit group.
class BitBlaster
{
 public:
  explicit BitBlaster(SatSolver & solver);

  // Asserts a Bool term at the top level, splitting conjunctions.
  void assert_true(const cfgsmith::Term & t);

  // Bits of t (blasting on demand).
  const std::vector<Lit> & blast(const cfgsmith::Term & t);

  // After a sat solve: concrete value of a declared variable.
  uint64_t value_of(const cfgsmith::Variable & v);

  Lit true_lit() const { return true_lit_; }

 private:
  Lit fresh() { return mk_lit(solver_.new_var()); }
  Lit lit_const(bool b) { return b ? true_lit_ : neg(true_lit_); }
  void clause(std::initializer_list<Lit> lits)
  {
    solver_.add_clause(std::vector<Lit>(lits));
  }

  Lit lit_not(Lit a) { return neg(a); }
  Lit lit_and(Lit a, Lit b);
  Lit lit_or(Lit a, Lit b);
  Lit lit_xor(Lit a, Lit b);
  Lit lit_xnor(Lit a, Lit b) { return neg(lit_xor(a, b)); }
  Lit lit_mux(Lit c, Lit t, Lit e);  // c ? t : e
  Lit lit_maj(Lit a, Lit b, Lit c);
  Lit lit_and_all(const std::vector<Lit> & ls);

  std::vector<Lit> & var_bits(const cfgsmith::Variable & v);
  std::vector<Lit> blast_node(const cfgsmith::Term & t);
  std::vector<Lit> add_bits(const std::vector<Lit> & a,
                            const std::vector<Lit> & b, Lit carry_in);

  SatSolver & solver_;
  Lit true_lit_;
  std::unordered_map<const cfgsmith::Term::Node *, std::vector<Lit>> cache_;
  std::vector<cfgsmith::Term> pinned_;  // keeps cached nodes alive
  std::map<std::string, std::vector<Lit>> vars_;
  // structural-hash gate cache keyed by (op, a, b)
  std::map<std::tuple<int, Lit, Lit>, Lit> gate_cache_;
};

}  // namespace minibv

#endif
