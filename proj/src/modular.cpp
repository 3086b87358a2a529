#include <algorithm>
#include <set>
#include <sstream>

#include "cfgsmith/errors.h"
#include "cfgsmith/modular.h"

namespace cfgsmith {

namespace {

// Any name occurring in two systems must mean the same variable.
void check_name_alignment(const TransitionSystem & a,
                          const TransitionSystem & b)
{
  for (const Variable & v : a.vars()) {
    if (b.has_var(v.name) && !(b.var(v.name).sort == v.sort)) {
      throw ModelError("variable '" + v.name
                       + "' has different sorts in two parts");
    }
  }
}

Term pin_value(const Variable & v, const Value & val)
{
  Term rhs = v.sort.is_bool() ? bool_const(val.v != 0)
                              : bv_const(val.v, v.sort.width());
  return mk_eq(mk_var(v), rhs);
}

ConditionVerdict check_validity(const Term & antecedent,
                                const Term & consequent,
                                const SolverConfig & solver)
{
  Term query = mk_and(antecedent, mk_not(consequent));
  std::set<Variable> fv = free_vars(query);
  std::vector<Variable> vars(fv.begin(), fv.end());
  SatResult r = check_sat_formula(solver, query, vars);
  ConditionVerdict verdict;
  switch (r.status) {
    case SatResult::Status::kUnsat:
      verdict.status = ConditionVerdict::Status::kPass;
      break;
    case SatResult::Status::kSat:
      verdict.status = ConditionVerdict::Status::kFail;
      verdict.countermodel = r.model;
      break;
    case SatResult::Status::kUnknown:
      verdict.status = ConditionVerdict::Status::kInconclusive;
      break;
  }
  return verdict;
}

const char * verdict_word(const ConditionVerdict & v)
{
  switch (v.status) {
    case ConditionVerdict::Status::kPass: return "pass";
    case ConditionVerdict::Status::kFail: return "fail";
    default: return "inconclusive";
  }
}

std::set<std::string> base_names(const TransitionSystem & ts)
{
  std::set<std::string> out;
  for (const Variable & v : ts.vars()) out.insert(v.name);
  return out;
}

// kInterfaceOnly is only amalgamation-sound when every variable common
// to two parts is pinned by the abduct.
void check_interface_covers(const std::vector<ConfigProblem> & parts,
                            const std::vector<std::string> & shared_names)
{
  std::set<std::string> shared(shared_names.begin(), shared_names.end());
  for (size_t i = 0; i < parts.size(); ++i) {
    std::set<std::string> vi = base_names(parts[i].system);
    for (size_t j = i + 1; j < parts.size(); ++j) {
      for (const std::string & name : base_names(parts[j].system)) {
        if (vi.count(name) && !shared.count(name)) {
          throw ModelError("interface strategy does not cover shared "
                           "variable '"
                           + name + "'");
        }
      }
    }
  }
}

}  // namespace

Decomposition::Decomposition(ConfigProblem parent_, ConfigProblem part1_,
                             ConfigProblem part2_,
                             std::vector<std::string> shared_names_)
    : parent(std::move(parent_)),
      part1(std::move(part1_)),
      part2(std::move(part2_)),
      shared_names(std::move(shared_names_))
{
  if (part1.k != parent.k || part2.k != parent.k) {
    throw ModelError("decomposition parts must use the parent's k");
  }
  for (const std::string & name : shared_names) {
    if (!part1.system.has_var(name) || !part2.system.has_var(name)) {
      throw ModelError("shared variable '" + name
                       + "' is not present in both parts");
    }
  }
  check_name_alignment(part1.system, part2.system);
  check_name_alignment(part1.system, parent.system);
  check_name_alignment(part2.system, parent.system);
}

std::string DecompositionReport::str() const
{
  std::ostringstream os;
  os << "transitions:  " << verdict_word(transitions) << "\n"
     << "inits:        " << verdict_word(inits) << "\n"
     << "properties:   " << verdict_word(properties) << "\n"
     << "config-cover: " << verdict_word(config_cover) << "\n";
  return os.str();
}

DecompositionReport check_decomposition(const Decomposition & d,
                                        const SolverConfig & solver)
{
  return check_decomposition(d.parent, { d.part1, d.part2 }, solver);
}

DecompositionReport check_decomposition(
    const ConfigProblem & parent, const std::vector<ConfigProblem> & parts,
    const SolverConfig & solver)
{
  if (parts.empty()) {
    throw ModelError("check_decomposition needs at least one part");
  }
  for (size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].k != parent.k) {
      throw ModelError("decomposition parts must use the parent's k");
    }
    check_name_alignment(parts[i].system, parent.system);
    for (size_t j = i + 1; j < parts.size(); ++j) {
      check_name_alignment(parts[i].system, parts[j].system);
    }
  }

  std::vector<Term> trans, inits, props;
  for (const ConfigProblem & p : parts) {
    trans.push_back(p.system.trans());
    inits.push_back(p.system.init());
    props.push_back(pbe_property(p.property, p.v_in, p.v_out, p.k));
  }

  DecompositionReport report;
  report.transitions =
      check_validity(mk_and_all(trans), parent.system.trans(), solver);
  report.inits =
      check_validity(mk_and_all(inits), parent.system.init(), solver);
  report.properties = check_validity(
      mk_and_all(props),
      pbe_property(parent.property, parent.v_in, parent.v_out, parent.k),
      solver);

  std::set<std::string> part_conf;
  for (const ConfigProblem & p : parts) {
    for (const Variable & v : p.v_conf) part_conf.insert(v.name);
  }
  report.config_cover.status = ConditionVerdict::Status::kPass;
  for (const Variable & v : parent.v_conf) {
    if (!part_conf.count(v.name)) {
      report.config_cover.status = ConditionVerdict::Status::kFail;
    }
  }
  return report;
}

Term get_abduct(const Term & phi, const Assignment & model,
                const AbductStrategy & strategy)
{
  std::set<Variable> fv = free_vars(phi);
  std::set<std::string> shared(strategy.shared_names.begin(),
                               strategy.shared_names.end());

  std::vector<Term> pins;
  for (const Variable & v : fv) {
    if (strategy.kind == AbductStrategy::Kind::kInterfaceOnly) {
      std::string base = v.name;
      if (auto split = split_timed(v.name)) base = split->first;
      if (!shared.count(v.name) && !shared.count(base)) continue;
    }
    std::optional<Value> val = model.find(v.name);
    if (!val) {
      throw ModelError("abduct model is missing '" + v.name + "'");
    }
    pins.push_back(pin_value(v, *val));
  }
  return pins.empty() ? bool_const(true) : mk_and_all(pins);
}

ModularResult solve_chain(const ConfigProblem & parent,
                          const std::vector<ConfigProblem> & parts,
                          const AbductStrategy & strategy,
                          const SolverConfig & solver)
{
  if (parts.empty()) {
    throw ModelError("solve_chain needs at least one part");
  }
  for (size_t i = 0; i < parts.size(); ++i) {
    check_name_alignment(parts[i].system, parent.system);
    for (size_t j = i + 1; j < parts.size(); ++j) {
      check_name_alignment(parts[i].system, parts[j].system);
    }
  }
  if (strategy.kind == AbductStrategy::Kind::kInterfaceOnly) {
    check_interface_covers(parts, strategy.shared_names);
  }

  std::vector<Assignment> models;
  Term psi = bool_const(true);
  for (size_t i = 0; i < parts.size(); ++i) {
    Term phi = build_config_formula(parts[i]);
    if (i > 0) phi = mk_and(phi, psi);
    std::set<Variable> fv = free_vars(phi);
    std::vector<Variable> query(fv.begin(), fv.end());
    SatResult r = check_sat_formula(solver, phi, query);
    if (r.status == SatResult::Status::kUnknown) {
      return { SatResult::Status::kUnknown, std::nullopt, false, i + 1 };
    }
    if (r.is_unsat()) {
      return { SatResult::Status::kUnsat, std::nullopt, true, i + 1 };
    }
    models.push_back(*r.model);
    if (i + 1 < parts.size()) {
      psi = get_abduct(phi, *r.model, strategy);
      if (strategy.kind == AbductStrategy::Kind::kInterfaceOnly) {
        // checked obligation: the abduct keeps this part satisfiable
        if (!check_sat_formula(solver, mk_and(phi, psi)).is_sat()) {
          throw ModelError("interface abduct broke its own stage");
        }
      }
    }
  }

  Configuration config;
  for (const Variable & v : parent.v_conf) {
    std::string name0 = timed(v, 0).name;
    bool found = false;
    for (size_t i = models.size(); i-- > 0 && !found;) {
      if (std::optional<Value> val = models[i].find(name0)) {
        config.set(v, *val);
        found = true;
      }
    }
    if (!found) {
      throw ModelError("no part model assigns config variable '" + v.name
                       + "'");
    }
  }
  return { SatResult::Status::kSat, config, false, 0 };
}

ModularResult solve_modular(const Decomposition & d,
                            const AbductStrategy & strategy,
                            const SolverConfig & solver)
{
  AbductStrategy effective = strategy;
  if (effective.kind == AbductStrategy::Kind::kInterfaceOnly
      && effective.shared_names.empty()) {
    effective.shared_names = d.shared_names;
  }
  return solve_chain(d.parent, { d.part1, d.part2 }, effective, solver);
}

bool recheck_monolithic(const ConfigProblem & parent,
                        const Configuration & config,
                        const SolverConfig & solver)
{
  Term phi = build_config_formula(parent);
  for (const Variable & v : parent.v_conf) {
    std::optional<Value> val = config.find(v.name);
    if (!val) {
      throw ModelError("configuration is missing '" + v.name + "'");
    }
    phi = mk_and(phi, pin_value(timed(v, 0), *val));
  }
  return check_sat_formula(solver, phi).is_sat();
}

Trace restrict_trace(const Trace & trace, const TransitionSystem & part)
{
  auto keep = [&](const TraceStep & step, unsigned role) {
    TraceStep out;
    for (const auto & [name, val] : step.values) {
      if (part.has_var(name) && (part.roles_of(name) & role)) {
        out.values.emplace(name, val);
      }
    }
    return out;
  };
  Trace out;
  for (const TraceStep & s : trace.inputs) {
    out.inputs.push_back(keep(s, kInputRole));
  }
  for (const TraceStep & s : trace.outputs) {
    out.outputs.push_back(keep(s, kOutputRole));
  }
  return out;
}

DecompositionSpec parse_decomposition_spec(const std::string & text)
{
  DecompositionSpec spec;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  bool have_strategy = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (size_t hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream ls(line);
    std::string keyword;
    if (!(ls >> keyword)) continue;
    if (keyword == "parent") {
      if (!spec.parent_path.empty()) {
        throw ParseError("duplicate 'parent' line", lineno, 1);
      }
      if (!(ls >> spec.parent_path)) {
        throw ParseError("'parent' needs a path", lineno, 1);
      }
    } else if (keyword == "part") {
      std::string path;
      if (!(ls >> path)) {
        throw ParseError("'part' needs a path", lineno, 1);
      }
      spec.part_paths.push_back(path);
    } else if (keyword == "shared") {
      std::string name;
      while (ls >> name) spec.shared_names.push_back(name);
    } else if (keyword == "strategy") {
      std::string word;
      if (!(ls >> word)) {
        throw ParseError("'strategy' needs a name", lineno, 1);
      }
      if (word == "all-free-vars") {
        spec.strategy = AbductStrategy::Kind::kAllFreeVars;
      } else if (word == "interface-only") {
        spec.strategy = AbductStrategy::Kind::kInterfaceOnly;
      } else {
        throw ParseError("unknown strategy '" + word + "'", lineno, 1);
      }
      have_strategy = true;
    } else {
      throw ParseError("unknown keyword '" + keyword + "'", lineno, 1);
    }
    std::string rest;
    if (ls >> rest) {
      throw ParseError("trailing text '" + rest + "'", lineno, 1);
    }
  }
  (void)have_strategy;
  if (spec.parent_path.empty()) {
    throw ParseError("decomposition file has no 'parent' line");
  }
  if (spec.part_paths.size() < 2) {
    throw ParseError("decomposition file needs at least two 'part' lines");
  }
  return spec;
}

}  // namespace cfgsmith
