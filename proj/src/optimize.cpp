#include "cfgsmith/optimize.h"

#include <algorithm>
#include <set>
#include <sstream>

#include "cfgsmith/errors.h"
#include "cfgsmith/eval.h"
#include "cfgsmith/smtlib.h"

namespace cfgsmith {

namespace {

void check_objective(const Objective & obj)
{
  if (!obj.term.valid()) throw ModelError("objective has no term");
  if (!obj.term.sort().is_bv()) {
    throw SortError("objective term must be a bit-vector, got "
                    + obj.term.sort().str());
  }
}

void check_formula(const Term & phi)
{
  if (!phi.valid() || !phi.sort().is_bool()) {
    throw SortError("optimization formula must be Bool");
  }
}

// Strictly better than the incumbent in the unsigned order.
Term improve_on(const Objective & obj, uint64_t incumbent)
{
  Term c = bv_const(incumbent, obj.term.sort().width());
  return obj.direction == Objective::Direction::kMin ? mk_bvult(obj.term, c)
                                                     : mk_bvult(c, obj.term);
}

std::vector<Variable> query_vars(const Term & phi,
                                 const LexObjective & lex)
{
  std::set<Variable> vars = free_vars(phi);
  for (const Objective & obj : lex.objectives) {
    std::set<Variable> fv = free_vars(obj.term);
    vars.insert(fv.begin(), fv.end());
  }
  return { vars.begin(), vars.end() };
}

struct TightenOutcome
{
  SatResult::Status status = SatResult::Status::kUnknown;
  std::optional<uint64_t> value;
  std::optional<Assignment> model;
  bool optimal = false;
  bool timed_out = false;
};

// Bound-tightening loop for one objective against whatever is already on
// the assertion stack. Runs in its own scope and pops it on the way out,
// except after a timeout (the solver process is gone then).
TightenOutcome tighten(SolverSession & session, const Objective & obj,
                       const std::vector<Variable> & query)
{
  TightenOutcome out;
  bool refuted = false;  // loop ended on unsat
  session.push();
  try {
    for (;;) {
      SatResult r = session.check_sat(query);
      if (r.status == SatResult::Status::kUnknown) break;
      if (r.is_unsat()) {
        refuted = true;
        break;
      }
      uint64_t v = evaluate(obj.term, *r.model).v;
      out.value = v;
      out.model = std::move(r.model);
      out.status = SatResult::Status::kSat;
      session.assert_term(improve_on(obj, v));
    }
  } catch (const SolverTimeoutError &) {
    out.timed_out = true;
    return out;
  }
  session.pop();
  if (out.value) {
    out.optimal = refuted;  // unsat past an incumbent certifies it
  } else if (refuted) {
    out.status = SatResult::Status::kUnsat;
  }
  return out;
}

}  // namespace

OptimizeResult branch_and_bound(SolverSession & session, const Term & phi,
                                const Objective & obj)
{
  check_formula(phi);
  check_objective(obj);
  std::vector<Variable> query = query_vars(phi, { { obj } });

  session.push();
  session.assert_term(phi);
  TightenOutcome t = tighten(session, obj, query);
  if (!t.timed_out) session.pop();

  OptimizeResult out;
  out.timed_out = t.timed_out;
  if (t.value) {
    out.status = SatResult::Status::kSat;
    out.values.push_back({ obj.name, *t.value, t.optimal });
    out.model = std::move(t.model);
  } else if (t.timed_out || t.status == SatResult::Status::kUnknown) {
    out.status = SatResult::Status::kUnknown;
  } else {
    out.status = SatResult::Status::kUnsat;
  }
  return out;
}

OptimizeResult solve_lex(SolverSession & session, const Term & phi,
                         const LexObjective & lex)
{
  check_formula(phi);
  if (lex.objectives.empty()) {
    throw ModelError("lexicographic objective list is empty");
  }
  for (const Objective & obj : lex.objectives) check_objective(obj);
  std::vector<Variable> query = query_vars(phi, lex);

  OptimizeResult out;
  session.push();
  session.assert_term(phi);
  for (const Objective & obj : lex.objectives) {
    TightenOutcome t = tighten(session, obj, query);
    if (t.value) {
      out.values.push_back({ obj.name, *t.value, t.optimal });
      out.model = std::move(t.model);
      out.status = SatResult::Status::kSat;
    }
    if (t.timed_out) {
      out.timed_out = true;
      if (!out.model) out.status = SatResult::Status::kUnknown;
      return out;  // session dead, nothing left to pop
    }
    if (!t.value) {
      // unsat here means phi itself is (the equalities only restate
      // values an earlier model achieved)
      if (out.values.empty()) out.status = t.status;
      session.pop();
      return out;
    }
    if (!t.optimal) {
      // an unknown mid-loop: fixing an uncertified value would silently
      // break the lexicographic order, so stop with a partial result
      session.pop();
      return out;
    }
    session.assert_term(mk_eq(
        obj.term, bv_const(*t.value, obj.term.sort().width())));
  }
  session.pop();
  return out;
}

OptimizeResult solve_dim_widening(SolverSession & session, const Term & phi,
                                  const LexObjective & mop1)
{
  check_formula(phi);
  if (mop1.objectives.empty()) {
    throw ModelError("widening needs at least the sum objective");
  }
  for (const Objective & obj : mop1.objectives) {
    check_objective(obj);
    if (obj.direction != Objective::Direction::kMin) {
      throw ModelError("widening only supports minimization objectives");
    }
  }
  const Objective & sum = mop1.objectives.front();
  unsigned sum_width = sum.term.sort().width();
  std::vector<Variable> query = query_vars(phi, mop1);

  OptimizeResult out;
  session.push();
  try {
    session.assert_term(phi);
    SatResult r0 = session.check_sat(query);
    if (!r0.is_sat()) {
      out.status = r0.status;
      session.pop();
      return out;
    }
    // the unbounded model caps the scan: the least feasible bound is at
    // most the sum it achieves
    uint64_t cap = evaluate(sum.term, *r0.model).v;
    out.model = std::move(r0.model);
    out.status = SatResult::Status::kSat;

    for (uint64_t bound = 0;; ++bound) {
      session.push();
      session.assert_term(mk_eq(sum.term, bv_const(bound, sum_width)));
      SatResult r = session.check_sat(query);
      if (r.status == SatResult::Status::kUnknown) {
        // cannot rule this bound out; report the capping model unranked
        out.values.push_back({ sum.name, cap, false });
        session.pop();
        session.pop();
        return out;
      }
      if (r.is_unsat()) {
        session.pop();
        continue;  // bound == cap is sat by construction, so this ends
      }
      // least bound found; every smaller one was refuted
      out.values.push_back({ sum.name, bound, true });
      out.model = std::move(r.model);
      for (size_t i = 1; i < mop1.objectives.size(); ++i) {
        const Objective & obj = mop1.objectives[i];
        TightenOutcome t = tighten(session, obj, query);
        if (t.value) {
          out.values.push_back({ obj.name, *t.value, t.optimal });
          out.model = std::move(t.model);
        }
        if (t.timed_out) {
          out.timed_out = true;
          return out;
        }
        if (!t.value || !t.optimal) {
          session.pop();
          session.pop();
          return out;
        }
        session.assert_term(mk_eq(
            obj.term, bv_const(*t.value, obj.term.sort().width())));
      }
      session.pop();
      break;
    }
  } catch (const SolverTimeoutError &) {
    out.timed_out = true;
    if (!out.model) out.status = SatResult::Status::kUnknown;
    return out;
  }
  session.pop();
  return out;
}

OptimizeResult branch_and_bound(const SolverConfig & config, const Term & phi,
                                const Objective & obj)
{
  SolverSession session(config);
  return branch_and_bound(session, phi, obj);
}

OptimizeResult solve_lex(const SolverConfig & config, const Term & phi,
                         const LexObjective & lex)
{
  SolverSession session(config);
  return solve_lex(session, phi, lex);
}

OptimizeResult solve_dim_widening(const SolverConfig & config,
                                  const Term & phi, const LexObjective & mop1)
{
  SolverSession session(config);
  return solve_dim_widening(session, phi, mop1);
}

// ---------------------------------------------------------------------
// MOP_H construction
// ---------------------------------------------------------------------

namespace {

unsigned ceil_log2(uint64_t n)
{
  unsigned bits = 0;
  while ((uint64_t(1) << bits) < n) ++bits;
  return bits;
}

// Sum at a width where n addends of the operand widths cannot wrap.
Term sum_extended(const std::vector<Term> & addends)
{
  if (addends.empty()) return bv_const(0, 1);
  unsigned max_width = 0;
  for (const Term & t : addends) {
    max_width = std::max(max_width, t.sort().width());
  }
  unsigned width = max_width + ceil_log2(addends.size());
  Term sum = mk_zext(addends[0], width);
  for (size_t i = 1; i < addends.size(); ++i) {
    sum = mk_bvadd(sum, mk_zext(addends[i], width));
  }
  return sum;
}

void check_group(const GeneratorGroup & g)
{
  if (g.ranges.empty() || g.ranges.size() != g.strides.size()) {
    throw ModelError("generator group '" + g.name
                     + "' needs matching nonempty ranges and strides");
  }
  if (!g.dim.sort.is_bv() || !g.offset.sort.is_bv()) {
    throw ModelError("generator group '" + g.name
                     + "' has a non-bit-vector dim or offset");
  }
  for (const Variable & v : g.ranges) {
    if (!v.sort.is_bv()) {
      throw ModelError("range variable '" + v.name + "' is not a bit-vector");
    }
  }
  for (const Variable & v : g.strides) {
    if (!v.sort.is_bv()) {
      throw ModelError("stride variable '" + v.name
                       + "' is not a bit-vector");
    }
  }
}

// Product of the first `dim` ranges; entries past dim contribute 1. The
// result width fits the worst-case full product, so it cannot wrap.
Term masked_range_product(const GeneratorGroup & g)
{
  unsigned max_width = 0;
  for (const Variable & v : g.ranges) {
    max_width = std::max(max_width, v.sort.width());
  }
  unsigned width = std::max<unsigned>(
      1, max_width * static_cast<unsigned>(g.ranges.size()));
  Term product = bv_const(1, width);
  Term one = bv_const(1, width);
  for (size_t j = 0; j < g.ranges.size(); ++j) {
    Term factor = one;
    if (j <= g.dim.sort.mask()) {
      Term active = mk_bvult(bv_const(j, g.dim.sort.width()),
                             mk_var(g.dim));
      factor = mk_ite(active, mk_zext(mk_var(g.ranges[j]), width), one);
    }
    product = mk_bvmul(product, factor);
  }
  return product;
}

}  // namespace

LexObjective build_objectives(const std::vector<GeneratorGroup> & groups)
{
  if (groups.empty()) {
    throw ModelError("MOP_H needs at least one generator group");
  }
  for (const GeneratorGroup & g : groups) check_group(g);

  LexObjective lex;

  std::vector<Term> dims;
  for (const GeneratorGroup & g : groups) dims.push_back(mk_var(g.dim));
  lex.objectives.push_back(Objective::min(sum_extended(dims), "sum-dims"));

  for (const GeneratorGroup & g : groups) {
    if (g.write) {
      lex.objectives.push_back(
          Objective::min(mk_var(g.dim), "dim-" + g.name));
    }
  }
  for (const GeneratorGroup & g : groups) {
    if (!g.write) {
      lex.objectives.push_back(
          Objective::min(mk_var(g.dim), "dim-" + g.name));
    }
  }

  std::vector<Term> products;
  for (const GeneratorGroup & g : groups) {
    products.push_back(masked_range_product(g));
  }
  lex.objectives.push_back(
      Objective::min(sum_extended(products), "sum-range-products"));

  std::vector<Term> strides;
  for (const GeneratorGroup & g : groups) {
    for (const Variable & v : g.strides) strides.push_back(mk_var(v));
  }
  lex.objectives.push_back(
      Objective::min(sum_extended(strides), "sum-strides"));

  std::vector<Term> offsets;
  for (const GeneratorGroup & g : groups) {
    if (g.addressor) offsets.push_back(mk_var(g.offset));
  }
  if (!offsets.empty()) {
    lex.objectives.push_back(
        Objective::min(sum_extended(offsets), "sum-addressor-offsets"));
  }
  return lex;
}

// ---------------------------------------------------------------------
// Objective files
// ---------------------------------------------------------------------

namespace {

std::vector<std::string> split_ws(const std::string & line)
{
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

Variable lookup_var(const std::string & name,
                    const std::map<std::string, Variable> & symbols,
                    size_t lineno)
{
  auto it = symbols.find(name);
  if (it == symbols.end()) {
    throw ParseError("unknown variable '" + name + "'", lineno, 1);
  }
  return it->second;
}

GeneratorGroup parse_group_line(const std::vector<std::string> & toks,
                                const std::map<std::string, Variable> & symbols,
                                size_t lineno)
{
  if (toks.size() < 4) {
    throw ParseError("group line needs a name, direction and role", lineno,
                     1);
  }
  GeneratorGroup g;
  g.name = toks[1];
  if (toks[2] == "write") {
    g.write = true;
  } else if (toks[2] != "read") {
    throw ParseError("group direction must be write or read, got '" + toks[2]
                         + "'",
                     lineno, 1);
  }
  if (toks[3] == "addressor") {
    g.addressor = true;
  } else if (toks[3] != "accessor") {
    throw ParseError("group role must be addressor or accessor, got '"
                         + toks[3] + "'",
                     lineno, 1);
  }

  bool saw_dim = false;
  bool saw_offset = false;
  size_t i = 4;
  while (i < toks.size()) {
    const std::string & kw = toks[i++];
    if (kw == "dim") {
      if (i >= toks.size()) throw ParseError("dim needs a variable", lineno, 1);
      g.dim = lookup_var(toks[i++], symbols, lineno);
      saw_dim = true;
    } else if (kw == "offset") {
      if (i >= toks.size()) {
        throw ParseError("offset needs a variable", lineno, 1);
      }
      g.offset = lookup_var(toks[i++], symbols, lineno);
      saw_offset = true;
    } else if (kw == "ranges" || kw == "strides") {
      std::vector<Variable> & dst = kw == "ranges" ? g.ranges : g.strides;
      while (i < toks.size() && toks[i] != "dim" && toks[i] != "ranges"
             && toks[i] != "strides" && toks[i] != "offset") {
        dst.push_back(lookup_var(toks[i++], symbols, lineno));
      }
      if (dst.empty()) {
        throw ParseError(kw + " needs at least one variable", lineno, 1);
      }
    } else {
      throw ParseError("unknown group keyword '" + kw + "'", lineno, 1);
    }
  }
  if (!saw_dim || !saw_offset || g.ranges.empty() || g.strides.empty()) {
    throw ParseError("group '" + g.name
                         + "' needs dim, ranges, strides and offset",
                     lineno, 1);
  }
  return g;
}

}  // namespace

ObjectiveSpec parse_objectives(const std::string & text,
                               const std::map<std::string, Variable> & symbols)
{
  ObjectiveSpec spec;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  bool first_content = true;
  size_t count = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::string body = line.substr(start);

    if (first_content && body == "moph") {
      spec.moph = true;
      first_content = false;
      continue;
    }
    first_content = false;

    if (spec.moph) {
      std::vector<std::string> toks = split_ws(body);
      if (toks.empty() || toks[0] != "group") {
        throw ParseError("expected a group line after moph", lineno, 1);
      }
      spec.groups.push_back(parse_group_line(toks, symbols, lineno));
      continue;
    }

    size_t sp = body.find_first_of(" \t");
    std::string kw = body.substr(0, sp);
    if (kw != "min" && kw != "max") {
      throw ParseError("expected min, max or moph, got '" + kw + "'", lineno,
                       1);
    }
    if (sp == std::string::npos) {
      throw ParseError(kw + " needs a term", lineno, 1);
    }
    Term t;
    try {
      t = smtlib::parse_term(body.substr(sp + 1), symbols);
    } catch (const ParseError & e) {
      throw ParseError(std::string(e.what()) + " (objective on line "
                       + std::to_string(lineno) + ")");
    }
    ++count;
    std::string name = "obj" + std::to_string(count);
    spec.lex.objectives.push_back(kw == "min" ? Objective::min(t, name)
                                              : Objective::max(t, name));
  }

  if (spec.moph) {
    if (spec.groups.empty()) throw ParseError("moph file defines no groups");
    try {
      spec.lex = build_objectives(spec.groups);
    } catch (const ModelError & e) {
      throw ParseError(e.what());
    }
  } else if (spec.lex.objectives.empty()) {
    throw ParseError("objective file lists no objectives");
  }
  for (const Objective & obj : spec.lex.objectives) {
    if (!obj.term.sort().is_bv()) {
      throw ParseError("objective '" + obj.name + "' is not a bit-vector");
    }
  }
  return spec;
}

std::string moph_text(const std::vector<GeneratorGroup> & groups)
{
  if (groups.empty()) {
    throw ModelError("MOP_H needs at least one generator group");
  }
  for (const GeneratorGroup & g : groups) check_group(g);
  std::ostringstream os;
  os << "moph\n";
  for (const GeneratorGroup & g : groups) {
    os << "group " << g.name << ' ' << (g.write ? "write" : "read") << ' '
       << (g.addressor ? "addressor" : "accessor");
    os << " dim " << g.dim.name;
    os << " ranges";
    for (const Variable & v : g.ranges) os << ' ' << v.name;
    os << " strides";
    for (const Variable & v : g.strides) os << ' ' << v.name;
    os << " offset " << g.offset.name << "\n";
  }
  return os.str();
}

std::vector<GeneratorGroup> groups_at_time(
    const std::vector<GeneratorGroup> & groups, size_t step)
{
  std::vector<GeneratorGroup> out = groups;
  for (GeneratorGroup & g : out) {
    g.dim = timed(g.dim, step);
    for (Variable & v : g.ranges) v = timed(v, step);
    for (Variable & v : g.strides) v = timed(v, step);
    g.offset = timed(g.offset, step);
  }
  return out;
}

}  // namespace cfgsmith
