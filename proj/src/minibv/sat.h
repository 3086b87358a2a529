#ifndef CFGSMITH_MINIBV_SAT_H
#define CFGSMITH_MINIBV_SAT_H

#include <cstdint>
#include <vector>

namespace minibv {

// Literal: variable index v (0-based) with sign; encoded as 2v (positive)
// or 2v+1 (negated).
using Lit = uint32_t;

inline Lit mk_lit(uint32_t var, bool neg = false) { return 2 * var + neg; }
inline Lit neg(Lit l) { return l ^ 1u; }
inline uint32_t var_of(Lit l) { return l >> 1; }
inline bool sign_of(Lit l) { return l & 1u; }

// Conflict-driven clause-learning SAT solver: two-watched literals,
// activity-ordered decisions, phase saving, 1UIP learning, Luby
// restarts, learnt-clause reduction. Deterministic.
class SatSolver
{
 public:
  uint32_t new_var();
  uint32_t num_vars() const { return uint32_t(assign_.size()); }

  // Returns false if the clause set is already unsatisfiable. Clauses
  // may contain duplicates; tautologies are dropped.
  bool add_clause(std::vector<Lit> lits);

  // Solves the current clause set. conflict_budget < 0 means no limit;
  // with a budget, may return kUnknown.
  enum class Result
  {
    kSat,
    kUnsat,
    kUnknown
  };
  Result solve(int64_t conflict_budget = -1);

  // Model access after kSat.
  bool model_value(uint32_t var) const { return model_[var]; }

  uint64_t conflicts() const { return conflicts_; }
  uint64_t decisions() const { return decisions_; }
  uint64_t propagations() const { return propagations_; }

 private:
  enum : uint8_t
  {
    kTrue = 0,
    kFalse = 1,
    kUndef = 2
  };
  static constexpr uint32_t kNoClause = ~0u;

  struct Clause
  {
    std::vector<Lit> lits;
    double activity = 0;
    bool learnt = false;
  };

  struct Watcher
  {
    uint32_t clause;
    Lit blocker;
  };

  uint8_t value(Lit l) const
  {
    uint8_t v = assign_[var_of(l)];
    return v == kUndef ? kUndef : v ^ uint8_t(sign_of(l));
  }

  void enqueue(Lit l, uint32_t reason);
  uint32_t propagate();  // returns conflicting clause or kNoClause
  void analyze(uint32_t confl, std::vector<Lit> & learnt, uint32_t & bt_level);
  bool lit_redundant(Lit l, uint32_t abstract_levels);
  void backtrack(uint32_t level);
  void attach(uint32_t ci);
  void bump_var(uint32_t v);
  void bump_clause(Clause & c);
  void decay_var_activity() { var_inc_ /= 0.95; }
  Lit pick_branch();
  void reduce_learnts();
  void rebuild_order_heap();

  // order heap (max-heap on activity_)
  void heap_insert(uint32_t v);
  void heap_sift_up(size_t i);
  void heap_sift_down(size_t i);
  uint32_t heap_pop();
  bool heap_less(uint32_t a, uint32_t b) const
  {
    return activity_[a] < activity_[b] || (activity_[a] == activity_[b] && a > b);
  }

  std::vector<Clause> clauses_;
  std::vector<std::vector<Watcher>> watches_;  // indexed by Lit
  std::vector<uint8_t> assign_;                // per var
  std::vector<uint8_t> model_;
  std::vector<uint32_t> level_;
  std::vector<uint32_t> reason_;
  std::vector<Lit> trail_;
  std::vector<uint32_t> trail_lim_;
  size_t qhead_ = 0;

  std::vector<double> activity_;
  double var_inc_ = 1.0;
  std::vector<uint8_t> phase_;
  std::vector<uint32_t> heap_;       // heap of vars
  std::vector<uint32_t> heap_pos_;   // var -> index in heap_ or ~0u
  std::vector<uint8_t> seen_;
  std::vector<Lit> analyze_stack_;
  std::vector<Lit> analyze_clear_;

  bool ok_ = true;
  uint64_t conflicts_ = 0;
  uint64_t decisions_ = 0;
  uint64_t propagations_ = 0;
  uint64_t learnt_count_ = 0;
  double clause_inc_ = 1.0;
};

}  // namespace minibv

#endif
