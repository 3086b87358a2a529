#include "minibv/sat.h"

#include <algorithm>
#include <cmath>

namespace minibv {

namespace {

// Luby sequence: 1 1 2 1 1 2 4 1 1 2 1 1 2 4 8 ...
uint64_t luby(uint64_t i)
{
  uint64_t k = 1;
  while ((uint64_t(1) << k) - 1 < i + 1) ++k;
  while ((uint64_t(1) << k) - 1 != i + 1) {
    i -= (uint64_t(1) << (k - 1)) - 1;
    k = 1;
    while ((uint64_t(1) << k) - 1 < i + 1) ++k;
  }
  return uint64_t(1) << (k - 1);
}

}  // namespace

uint32_t SatSolver::new_var()
{
  uint32_t v = uint32_t(assign_.size());
  assign_.push_back(kUndef);
  model_.push_back(0);
  level_.push_back(0);
  reason_.push_back(kNoClause);
  activity_.push_back(0.0);
  phase_.push_back(1);  // default phase: false (phase_ stores sign)
  heap_pos_.push_back(~0u);
  seen_.push_back(0);
  watches_.emplace_back();
  watches_.emplace_back();
  heap_insert(v);
  return v;
}

bool SatSolver::add_clause(std::vector<Lit> lits)
{
  if (!ok_) return false;
  // simplify: sort, dedupe, drop false lits, detect tautology/sat
  std::sort(lits.begin(), lits.end());
  lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
  std::vector<Lit> out;
  for (size_t i = 0; i < lits.size(); ++i) {
    if (i + 1 < lits.size() && lits[i + 1] == neg(lits[i])) return true;
    uint8_t v = value(lits[i]);
    if (v == kTrue && level_[var_of(lits[i])] == 0) return true;
    if (v == kFalse && level_[var_of(lits[i])] == 0) continue;
    out.push_back(lits[i]);
  }
  if (out.empty()) {
    ok_ = false;
    return false;
  }
  if (out.size() == 1) {
    if (value(out[0]) == kFalse) {
      ok_ = false;
      return false;
    }
    if (value(out[0]) == kUndef) {
      enqueue(out[0], kNoClause);
      if (propagate() != kNoClause) {
        ok_ = false;
        return false;
      }
    }
    return true;
  }
  uint32_t ci = uint32_t(clauses_.size());
  clauses_.push_back(Clause{ std::move(out), 0.0, false });
  attach(ci);
  return true;
}

void SatSolver::attach(uint32_t ci)
{
  const Clause & c = clauses_[ci];
  watches_[neg(c.lits[0])].push_back({ ci, c.lits[1] });
  watches_[neg(c.lits[1])].push_back({ ci, c.lits[0] });
}

void SatSolver::enqueue(Lit l, uint32_t reason)
{
  uint32_t v = var_of(l);
  assign_[v] = uint8_t(sign_of(l));  // kTrue==0 when sign matches
  level_[v] = uint32_t(trail_lim_.size());
  reason_[v] = reason;
  trail_.push_back(l);
}

uint32_t SatSolver::propagate()
{
  while (qhead_ < trail_.size()) {
    Lit p = trail_[qhead_++];
    ++propagations_;
    std::vector<Watcher> & ws = watches_[p];
    size_t keep = 0;
    uint32_t confl = kNoClause;
    for (size_t i = 0; i < ws.size(); ++i) {
      Watcher w = ws[i];
      if (confl != kNoClause) {
        ws[keep++] = w;
        continue;
      }
      if (value(w.blocker) == kTrue) {
        ws[keep++] = w;
        continue;
      }
      Clause & c = clauses_[w.clause];
      Lit false_lit = neg(p);
      if (c.lits[0] == false_lit) std::swap(c.lits[0], c.lits[1]);
      Lit first = c.lits[0];
      if (first != w.blocker && value(first) == kTrue) {
        ws[keep++] = { w.clause, first };
        continue;
      }
      bool moved = false;
      for (size_t j = 2; j < c.lits.size(); ++j) {
        if (value(c.lits[j]) != kFalse) {
          std::swap(c.lits[1], c.lits[j]);
          watches_[neg(c.lits[1])].push_back({ w.clause, first });
          moved = true;
          break;
        }
      }
      if (moved) continue;
      // unit or conflict
      ws[keep++] = { w.clause, first };
      if (value(first) == kFalse) {
        confl = w.clause;
        qhead_ = trail_.size();
      } else {
        enqueue(first, w.clause);
      }
    }
    ws.resize(keep);
    if (confl != kNoClause) return confl;
  }
  return kNoClause;
}

void SatSolver::bump_var(uint32_t v)
{
  activity_[v] += var_inc_;
  if (activity_[v] > 1e100) {
    for (double & a : activity_) a *= 1e-100;
    var_inc_ *= 1e-100;
  }
  if (heap_pos_[v] != ~0u) heap_sift_up(heap_pos_[v]);
}

void SatSolver::bump_clause(Clause & c)
{
  c.activity += clause_inc_;
  if (c.activity > 1e20) {
    for (Clause & cl : clauses_) {
      if (cl.learnt) cl.activity *= 1e-20;
    }
    clause_inc_ *= 1e-20;
  }
}

void SatSolver::analyze(uint32_t confl, std::vector<Lit> & learnt,
                        uint32_t & bt_level)
{
  learnt.clear();
  learnt.push_back(0);  // slot for the asserting literal
  uint32_t cur_level = uint32_t(trail_lim_.size());
  int counter = 0;
  Lit p = 0;
  bool have_p = false;
  size_t idx = trail_.size();

  for (;;) {
    Clause & c = clauses_[confl];
    if (c.learnt) bump_clause(c);
    size_t start = have_p ? 1 : 0;
    for (size_t i = start; i < c.lits.size(); ++i) {
      Lit q = c.lits[i];
      uint32_t v = var_of(q);
      if (seen_[v] || level_[v] == 0) continue;
      seen_[v] = 1;
      bump_var(v);
      if (level_[v] == cur_level) {
        ++counter;
      } else {
        learnt.push_back(q);
      }
    }
    // pick next literal to resolve on
    do {
      p = trail_[--idx];
    } while (!seen_[var_of(p)]);
    have_p = true;
    seen_[var_of(p)] = 0;
    --counter;
    if (counter == 0) break;
    confl = reason_[var_of(p)];
    // move p to front convention: reason clause c has c.lits[0] == p
    Clause & rc = clauses_[confl];
    if (rc.lits[0] != p) {
      for (size_t i = 1; i < rc.lits.size(); ++i) {
        if (rc.lits[i] == p) {
          std::swap(rc.lits[0], rc.lits[i]);
          break;
        }
      }
    }
  }
  learnt[0] = neg(p);

  // minimize: drop literals implied by the rest
  uint32_t abstract_levels = 0;
  for (size_t i = 1; i < learnt.size(); ++i) {
    abstract_levels |= 1u << (level_[var_of(learnt[i])] & 31);
  }
  analyze_clear_.assign(learnt.begin() + 1, learnt.end());
  size_t keep = 1;
  for (size_t i = 1; i < learnt.size(); ++i) {
    uint32_t v = var_of(learnt[i]);
    if (reason_[v] == kNoClause || !lit_redundant(learnt[i], abstract_levels)) {
      learnt[keep++] = learnt[i];
    }
  }
  learnt.resize(keep);
  for (Lit l : analyze_clear_) seen_[var_of(l)] = 0;
  for (size_t i = 1; i < learnt.size(); ++i) seen_[var_of(learnt[i])] = 0;

  // compute backtrack level = max level among learnt[1..]
  bt_level = 0;
  size_t max_i = 1;
  for (size_t i = 1; i < learnt.size(); ++i) {
    if (level_[var_of(learnt[i])] > bt_level) {
      bt_level = level_[var_of(learnt[i])];
      max_i = i;
    }
  }
  if (learnt.size() > 1) std::swap(learnt[1], learnt[max_i]);
}

// Self-subsumption check: a literal is redundant if every path of its
// implication ancestry ends in literals already in the learnt clause.
bool SatSolver::lit_redundant(Lit l, uint32_t abstract_levels)
{
  analyze_stack_.clear();
  analyze_stack_.push_back(l);
  size_t top = analyze_clear_.size();
  while (!analyze_stack_.empty()) {
    Lit q = analyze_stack_.back();
    analyze_stack_.pop_back();
    const Clause & c = clauses_[reason_[var_of(q)]];
    for (size_t i = 0; i < c.lits.size(); ++i) {
      Lit r = c.lits[i];
      uint32_t v = var_of(r);
      if (v == var_of(q) || seen_[v] || level_[v] == 0) continue;
      if (reason_[v] == kNoClause
          || !((1u << (level_[v] & 31)) & abstract_levels)) {
        // cannot be resolved away: undo marks made in this call
        for (size_t j = top; j < analyze_clear_.size(); ++j) {
          seen_[var_of(analyze_clear_[j])] = 0;
        }
        analyze_clear_.resize(top);
        return false;
      }
      seen_[v] = 1;
      analyze_clear_.push_back(r);
      analyze_stack_.push_back(r);
    }
  }
  return true;
}

void SatSolver::backtrack(uint32_t target)
{
  if (trail_lim_.size() <= target) return;
  size_t lim = trail_lim_[target];
  for (size_t i = trail_.size(); i-- > lim;) {
    uint32_t v = var_of(trail_[i]);
    phase_[v] = uint8_t(sign_of(trail_[i]));
    assign_[v] = kUndef;
    reason_[v] = kNoClause;
    if (heap_pos_[v] == ~0u) heap_insert(v);
  }
  trail_.resize(lim);
  trail_lim_.resize(target);
  qhead_ = lim;
}

void SatSolver::heap_insert(uint32_t v)
{
  heap_pos_[v] = heap_.size();
  heap_.push_back(v);
  heap_sift_up(heap_.size() - 1);
}

void SatSolver::heap_sift_up(size_t i)
{
  uint32_t v = heap_[i];
  while (i > 0) {
    size_t parent = (i - 1) / 2;
    if (!heap_less(heap_[parent], v)) break;
    heap_[i] = heap_[parent];
    heap_pos_[heap_[i]] = uint32_t(i);
    i = parent;
  }
  heap_[i] = v;
  heap_pos_[v] = uint32_t(i);
}

void SatSolver::heap_sift_down(size_t i)
{
  uint32_t v = heap_[i];
  for (;;) {
    size_t l = 2 * i + 1, r = 2 * i + 2, best = i;
    heap_[i] = v;  // tentative, so heap_less compares correctly
    if (l < heap_.size() && heap_less(heap_[best], heap_[l])) best = l;
    if (r < heap_.size() && heap_less(heap_[best], heap_[r])) best = r;
    if (best == i) break;
    heap_[i] = heap_[best];
    heap_pos_[heap_[i]] = uint32_t(i);
    i = best;
  }
  heap_[i] = v;
  heap_pos_[v] = uint32_t(i);
}

uint32_t SatSolver::heap_pop()
{
  uint32_t top = heap_[0];
  heap_pos_[top] = ~0u;
  heap_[0] = heap_.back();
  heap_pos_[heap_[0]] = 0;
  heap_.pop_back();
  if (!heap_.empty()) heap_sift_down(0);
  return top;
}

void SatSolver::rebuild_order_heap()
{
  heap_.clear();
  for (uint32_t v = 0; v < num_vars(); ++v) {
    heap_pos_[v] = ~0u;
    if (assign_[v] == kUndef) heap_insert(v);
  }
}

Lit SatSolver::pick_branch()
{
  while (!heap_.empty()) {
    uint32_t v = heap_pop();
    if (assign_[v] == kUndef) return mk_lit(v, phase_[v]);
  }
  return ~0u;  // all assigned
}

void SatSolver::reduce_learnts()
{
  // Collect learnt clause indices sorted by activity, remove the lazier
  // half (keeping binary and reason clauses).
  std::vector<uint32_t> learnts;
  for (uint32_t i = 0; i < clauses_.size(); ++i) {
    if (clauses_[i].learnt && clauses_[i].lits.size() > 2) learnts.push_back(i);
  }
  if (learnts.size() < 100) return;
  std::sort(learnts.begin(), learnts.end(), [&](uint32_t a, uint32_t b) {
    return clauses_[a].activity < clauses_[b].activity;
  });
  std::vector<uint8_t> is_reason(clauses_.size(), 0);
  for (Lit l : trail_) {
    if (reason_[var_of(l)] != kNoClause) is_reason[reason_[var_of(l)]] = 1;
  }
  std::vector<uint8_t> drop(clauses_.size(), 0);
  size_t removed = 0;
  for (size_t i = 0; i < learnts.size() / 2; ++i) {
    if (is_reason[learnts[i]]) continue;
    drop[learnts[i]] = 1;
    ++removed;
  }
  if (removed == 0) return;
  // rebuild clause list and watches with stable remapping
  std::vector<uint32_t> remap(clauses_.size(), kNoClause);
  std::vector<Clause> kept;
  kept.reserve(clauses_.size() - removed);
  for (uint32_t i = 0; i < clauses_.size(); ++i) {
    if (drop[i]) continue;
    remap[i] = uint32_t(kept.size());
    kept.push_back(std::move(clauses_[i]));
  }
  clauses_ = std::move(kept);
  for (auto & ws : watches_) ws.clear();
  for (uint32_t i = 0; i < clauses_.size(); ++i) attach(i);
  for (uint32_t v = 0; v < num_vars(); ++v) {
    if (reason_[v] != kNoClause) reason_[v] = remap[reason_[v]];
  }
  learnt_count_ = clauses_.size();
}

SatSolver::Result SatSolver::solve(int64_t conflict_budget)
{
  if (!ok_) return Result::kUnsat;
  if (propagate() != kNoClause) {
    ok_ = false;
    return Result::kUnsat;
  }
  rebuild_order_heap();

  uint64_t restart_count = 0;
  uint64_t restart_limit = 100 * luby(restart_count);
  uint64_t conflicts_this_restart = 0;
  uint64_t reduce_limit = 4000;
  std::vector<Lit> learnt;

  for (;;) {
    uint32_t confl = propagate();
    if (confl != kNoClause) {
      ++conflicts_;
      ++conflicts_this_restart;
      if (trail_lim_.empty()) {
        ok_ = false;
        return Result::kUnsat;
      }
      uint32_t bt_level;
      analyze(confl, learnt, bt_level);
      backtrack(bt_level);
      if (learnt.size() == 1) {
        enqueue(learnt[0], kNoClause);
      } else {
        uint32_t ci = uint32_t(clauses_.size());
        clauses_.push_back(Clause{ learnt, clause_inc_, true });
        ++learnt_count_;
        attach(ci);
        enqueue(learnt[0], ci);
      }
      decay_var_activity();
      clause_inc_ /= 0.999;
      if (conflict_budget >= 0 && int64_t(conflicts_) > conflict_budget) {
        backtrack(0);
        return Result::kUnknown;
      }
    } else {
      if (conflicts_this_restart >= restart_limit) {
        backtrack(0);
        ++restart_count;
        restart_limit = 100 * luby(restart_count);
        conflicts_this_restart = 0;
        continue;
      }
      if (learnt_count_ > reduce_limit) {
        reduce_learnts();
        reduce_limit = reduce_limit * 3 / 2;
      }
      Lit next = pick_branch();
      if (next == ~0u) {
        // model found
        for (uint32_t v = 0; v < num_vars(); ++v) {
          model_[v] = assign_[v] == kTrue;
        }
        backtrack(0);
        return Result::kSat;
      }
      ++decisions_;
      trail_lim_.push_back(uint32_t(trail_.size()));
      enqueue(next, kNoClause);
    }
  }
}

}  // namespace minibv
