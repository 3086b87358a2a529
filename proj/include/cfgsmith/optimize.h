#ifndef CFGSMITH_OPTIMIZE_H
#define CFGSMITH_OPTIMIZE_H

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cfgsmith/assignment.h"
#include "cfgsmith/smt_backend.h"
#include "cfgsmith/term.h"

namespace cfgsmith {

// One objective over a shared formula: drive the unsigned value of a
// bit-vector term down (or up). "Better" always means strictly better
// in the unsigned order.
struct Objective
{
  enum class Direction
  {
    kMin,
    kMax,
  };

  Term term;
  Direction direction = Direction::kMin;
  std::string name;  // report label only

  static Objective min(Term t, std::string name = "")
  {
    return { std::move(t), Direction::kMin, std::move(name) };
  }
  static Objective max(Term t, std::string name = "")
  {
    return { std::move(t), Direction::kMax, std::move(name) };
  }
};

// Ordered objectives over one formula, solved lexicographically: later
// objectives only break ties among solutions optimal for earlier ones.
struct LexObjective
{
  std::vector<Objective> objectives;  // nonempty
};

struct ObjectiveValue
{
  std::string name;
  uint64_t value = 0;
  // True when the solver certified optimality (formula ∧ strictly-better
  // shown unsat, or an exhausted bound scan). False for a best-so-far
  // value cut short by a timeout or an unknown answer.
  bool optimal = false;
};

struct OptimizeResult
{
  SatResult::Status status = SatResult::Status::kUnknown;
  // One entry per objective that produced a value, in objective order.
  // A timeout truncates the list at the interrupted objective.
  std::vector<ObjectiveValue> values;
  // Present iff status == kSat; satisfies the formula and achieves every
  // value listed above.
  std::optional<Assignment> model;
  bool timed_out = false;

  bool is_sat() const { return status == SatResult::Status::kSat; }
};

// Minimizes/maximizes obj over phi by branch and bound: repeatedly ask
// for a model, then constrain the term to beat the incumbent, until
// unsat certifies the incumbent optimal. Runs against the session's
// current assertion stack and restores the entry depth on return. A
// solver timeout yields the best value so far flagged non-optimal (the
// session is dead afterwards); with no incumbent the status is kUnknown.
OptimizeResult branch_and_bound(SolverSession & session, const Term & phi,
                                const Objective & obj);

// Solves the objectives in order; each optimum is fixed with an equality
// before the next objective runs, so the final model is lexicographically
// optimal. Timeout/unknown stops the sequence with the values found so
// far (the last one flagged non-optimal when uncertified).
OptimizeResult solve_lex(SolverSession & session, const Term & phi,
                         const LexObjective & lex);

// Iterative widening for a dim-style MOP: mop1's first objective is the
// sum to bound, the rest break ties in order. Scans bounds B = 0,1,2,...
// asserting sum = B until sat (an initial unbounded model caps the
// scan), then lex-solves the remaining objectives under that bound.
// Agrees with solve_lex(mop1); all objectives must be minimizations.
OptimizeResult solve_dim_widening(SolverSession & session, const Term & phi,
                                  const LexObjective & mop1);

// One-shot variants: fresh session per call.
OptimizeResult branch_and_bound(const SolverConfig & config, const Term & phi,
                                const Objective & obj);
OptimizeResult solve_lex(const SolverConfig & config, const Term & phi,
                         const LexObjective & lex);
OptimizeResult solve_dim_widening(const SolverConfig & config,
                                  const Term & phi, const LexObjective & mop1);

// ---------------------------------------------------------------------
// MOP_H construction for affine generator groups
// ---------------------------------------------------------------------

// The configuration variables of one affine sequence generator, plus
// the roles that decide its place in the objective order.
struct GeneratorGroup
{
  std::string name;
  bool write = false;      // write generators are minimized before reads
  bool addressor = false;  // only addressor offsets are minimized
  Variable dim{ "", Sort::boolean() };  // placeholder until filled in
  std::vector<Variable> ranges;         // one per loop level
  std::vector<Variable> strides;        // same length as ranges
  Variable offset{ "", Sort::boolean() };
};

// Builds the full lexicographic objective for a set of generator groups:
//   1. sum of all dim variables,
//   2. each write generator's dim, then each read generator's dim,
//   3. sum over generators of the product of its first `dim` range
//      variables (unused entries masked to 1 with ite on dim),
//   4. sum of all stride variables,
//   5. sum of addressor offsets (absent when no group is an addressor).
// All objectives minimize. Sums and products are computed at widened
// widths (operand width + ceil(log2 n)) so they cannot wrap. Throws
// ModelError on an empty list or a malformed group.
LexObjective build_objectives(const std::vector<GeneratorGroup> & groups);

// Parsed objective file. Either a plain ordered list of objectives, or
// the `moph` form with generator-group bindings (groups kept for
// reporting).
struct ObjectiveSpec
{
  LexObjective lex;
  bool moph = false;
  std::vector<GeneratorGroup> groups;
};

// Objective file syntax ('#' comments, blank lines ignored):
//   min <term>            one objective per line, SMT-LIB term syntax
//   max <term>
// or `moph` on the first line followed by one line per group:
//   group <name> <write|read> <addressor|accessor> dim <var>
//     ranges <var>... strides <var>... offset <var>   (all on one line)
// Symbols resolve against `symbols`; unknown names raise ParseError.
ObjectiveSpec parse_objectives(const std::string & text,
                               const std::map<std::string, Variable> & symbols);

// The `moph` objective-file text for a set of groups; parse_objectives
// reads it back to an equivalent ObjectiveSpec.
std::string moph_text(const std::vector<GeneratorGroup> & groups);

// The same groups with every variable renamed to its step-`step` timed
// copy, for optimizing over an unrolled configuration formula.
std::vector<GeneratorGroup> groups_at_time(
    const std::vector<GeneratorGroup> & groups, size_t step);

}  // namespace cfgsmith

#endif
