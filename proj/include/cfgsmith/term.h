#ifndef CFGSMITH_TERM_H
#define CFGSMITH_TERM_H

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cfgsmith/sort.h"

namespace cfgsmith {

enum class Op
{
  kConst,
  kVar,
  kIte,
  kAnd,
  kOr,
  kNot,
  kImplies,
  kEq,
  kBvAdd,
  kBvSub,
  kBvMul,
  kBvUlt,
  kBvUle,
  kConcat,
  kExtract
};

const char * op_name(Op op);

struct Variable
{
  std::string name;
  Sort sort;

  bool operator==(const Variable & o) const
  {
    return name == o.name && sort == o.sort;
  }
  bool operator!=(const Variable & o) const { return !(*this == o); }
  bool operator<(const Variable & o) const
  {
    if (name != o.name) return name < o.name;
    if (sort.kind() != o.sort.kind()) return sort.is_bool();
    return sort.is_bv() && o.sort.is_bv() && sort.width() < o.sort.width();
  }
};

// Immutable, structurally shared expression node. Terms are cheap to copy
// and safe to share across threads once built.
class Term
{
 public:
  Term() = default;  // null handle; valid() is false

  bool valid() const { return node_ != nullptr; }

  Op op() const;
  const Sort & sort() const;
  std::span<const Term> children() const;
  size_t num_children() const;
  const Term & child(size_t i) const;

  uint64_t value() const;            // kConst only
  const std::string & name() const;  // kVar only
  unsigned hi() const;               // kExtract only
  unsigned lo() const;               // kExtract only
  Variable variable() const;         // kVar only

  size_t hash() const;
  bool operator==(const Term & o) const;
  bool operator!=(const Term & o) const { return !(*this == o); }

  // Number of distinct nodes in the DAG.
  size_t dag_size() const;

  struct Node;
  const Node * raw() const { return node_.get(); }

 private:
  explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;

  friend Term make_term(Op, Sort, std::vector<Term>, uint64_t, std::string,
                        unsigned, unsigned);
};

// Constructors. Each checks well-sortedness and throws SortError on
// violation, so every reachable Term is well-sorted by construction.
Term bv_const(uint64_t value, unsigned width);
Term bool_const(bool b);
Term mk_true();
Term mk_false();
Term mk_var(const std::string & name, Sort sort);
Term mk_var(const Variable & v);
Term mk_ite(const Term & cond, const Term & then_t, const Term & else_t);
Term mk_and(const Term & a, const Term & b);
Term mk_or(const Term & a, const Term & b);
Term mk_not(const Term & a);
Term mk_implies(const Term & a, const Term & b);
Term mk_eq(const Term & a, const Term & b);
Term mk_bvadd(const Term & a, const Term & b);
Term mk_bvsub(const Term & a, const Term & b);
Term mk_bvmul(const Term & a, const Term & b);
Term mk_bvult(const Term & a, const Term & b);
Term mk_bvule(const Term & a, const Term & b);
Term mk_concat(const Term & a, const Term & b);
Term mk_extract(const Term & t, unsigned hi, unsigned lo);

// Conjunction of all terms; true for an empty list, left-folded otherwise.
Term mk_and_all(std::span<const Term> terms);

// Zero-extend a bit-vector term to `width` bits (no-op if already there).
Term mk_zext(const Term & t, unsigned width);

// All variables occurring in t. The logic has no binders, so every
// occurrence is free.
std::set<Variable> free_vars(const Term & t);

// Simultaneous substitution; throws SortError naming the offending
// variable if a replacement's sort differs.
Term substitute(const Term & t, const std::map<Variable, Term> & subst);

// Splits a top-level conjunction into its conjuncts (in order).
std::vector<Term> conjuncts(const Term & t);

// Timed-variable naming: v at step i renders as "name@i".
Variable timed(const Variable & v, size_t step);
Term timed_term(const Variable & v, size_t step);

// Inverse of timed(); nullopt if the name carries no "@i" suffix.
std::optional<std::pair<std::string, size_t>> split_timed(
    const std::string & name);

// Renames every variable to its step-i copy.
Term at_time(const Term & t, size_t step);

// Debug rendering (SMT-LIB style, not byte-stable; see Smt2Writer for
// the stable serializer).
std::string to_string(const Term & t);

}  // namespace cfgsmith

template <>
struct std::hash<cfgsmith::Term>
{
  size_t operator()(const cfgsmith::Term & t) const { return t.hash(); }
};

#endif
