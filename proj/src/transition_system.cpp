#include "cfgsmith/transition_system.h"

#include <algorithm>

#include "cfgsmith/eval.h"

namespace cfgsmith {

unsigned role_from_name(const std::string & name)
{
  if (name == "input") return kInputRole;
  if (name == "output") return kOutputRole;
  if (name == "config") return kConfigRole;
  if (name == "state") return kStateRole;
  throw ModelError("unknown role '" + name + "'");
}

std::string roles_to_string(unsigned roles)
{
  std::string out;
  auto add = [&out](const char * s) {
    if (!out.empty()) out += " ";
    out += s;
  };
  if (roles & kInputRole) add("input");
  if (roles & kOutputRole) add("output");
  if (roles & kConfigRole) add("config");
  if (roles & kStateRole) add("state");
  return out;
}

namespace {

bool is_identifier(const std::string & name)
{
  if (name.empty()) return false;
  auto head = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  };
  auto rest = [&head](char c) {
    return head(c) || (c >= '0' && c <= '9') || c == '.' || c == '-';
  };
  if (!head(name[0])) return false;
  return std::all_of(name.begin() + 1, name.end(), rest);
}

}  // namespace

TransitionSystem::TransitionSystem(std::vector<Variable> vars, Term init,
                                   Term trans,
                                   std::map<std::string, unsigned> roles)
    : vars_(std::move(vars)),
      init_(std::move(init)),
      trans_(std::move(trans)),
      roles_(std::move(roles))
{
  for (size_t i = 0; i < vars_.size(); ++i) {
    const Variable & v = vars_[i];
    if (!is_identifier(v.name)) {
      throw ModelError("variable name '" + v.name
                       + "' is not a plain identifier (no '@' or '\\'' "
                         "allowed in system variables)");
    }
    if (!index_.emplace(v.name, i).second) {
      throw ModelError("duplicate variable '" + v.name + "'");
    }
  }
  for (const auto & [name, flags] : roles_) {
    (void)flags;
    if (!index_.count(name)) {
      throw ModelError("role refers to undeclared variable '" + name + "'");
    }
  }
  if (!init_.valid() || !init_.sort().is_bool()) {
    throw SortError("init formula must be Bool");
  }
  if (!trans_.valid() || !trans_.sort().is_bool()) {
    throw SortError("trans formula must be Bool");
  }
  if (config_vars().empty()) {
    throw ModelError("system declares no configuration variable");
  }

  for (const Variable & v : free_vars(init_)) {
    if (!index_.count(v.name)) {
      throw ModelError("init mentions undeclared variable '" + v.name + "'");
    }
    if (var(v.name).sort != v.sort) {
      throw SortError("init uses '" + v.name + "' at sort " + v.sort.str()
                      + ", declared " + var(v.name).sort.str());
    }
    if (roles_of(v.name) & kInputRole) {
      throw ModelError("input variables do not appear in I(V): '" + v.name
                       + "'");
    }
  }
  for (const Variable & v : free_vars(trans_)) {
    std::string base = is_primed_name(v.name) ? unprime_name(v.name) : v.name;
    if (!index_.count(base)) {
      throw ModelError("trans mentions undeclared variable '" + v.name + "'");
    }
    if (var(base).sort != v.sort) {
      throw SortError("trans uses '" + v.name + "' at sort " + v.sort.str()
                      + ", declared " + var(base).sort.str());
    }
    if (is_primed_name(v.name) && (roles_of(base) & kInputRole)) {
      throw ModelError("primed input variable '" + v.name
                       + "' must not appear in T");
    }
  }
}

bool TransitionSystem::has_var(const std::string & name) const
{
  return index_.count(name);
}

const Variable & TransitionSystem::var(const std::string & name) const
{
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw ModelError("no variable named '" + name + "'");
  }
  return vars_[it->second];
}

unsigned TransitionSystem::roles_of(const std::string & name) const
{
  auto it = roles_.find(name);
  return it == roles_.end() ? 0 : it->second;
}

std::vector<Variable> TransitionSystem::vars_with_role(unsigned role) const
{
  std::vector<Variable> out;
  for (const Variable & v : vars_) {
    if (roles_of(v.name) & role) out.push_back(v);
  }
  return out;
}

std::vector<Variable> TransitionSystem::input_vars() const
{
  return vars_with_role(kInputRole);
}
std::vector<Variable> TransitionSystem::output_vars() const
{
  return vars_with_role(kOutputRole);
}
std::vector<Variable> TransitionSystem::config_vars() const
{
  return vars_with_role(kConfigRole);
}

Variable TransitionSystem::prime(const Variable & v)
{
  return Variable{ v.name + "'", v.sort };
}

bool TransitionSystem::is_primed_name(const std::string & name)
{
  return !name.empty() && name.back() == '\'';
}

std::string TransitionSystem::unprime_name(const std::string & name)
{
  return name.substr(0, name.size() - 1);
}

std::map<Variable, Term> next_functions(const TransitionSystem & ts)
{
  std::map<Variable, Term> next;
  for (const Term & c : conjuncts(ts.trans())) {
    if (c.op() == Op::kConst && c.value() != 0) continue;  // trivial conjunct
    bool functional = c.op() == Op::kEq && c.child(0).op() == Op::kVar
                      && TransitionSystem::is_primed_name(c.child(0).name());
    if (functional) {
      Variable base{ TransitionSystem::unprime_name(c.child(0).name()),
                     c.child(0).sort() };
      // the right side may not mention primed variables
      for (const Variable & v : free_vars(c.child(1))) {
        if (TransitionSystem::is_primed_name(v.name)) functional = false;
      }
      if (functional && next.count(base)) {
        throw ModelError("transition is not functional: '" + base.name
                         + "'' is defined twice");
      }
      if (functional) {
        next.emplace(base, c.child(1));
        continue;
      }
    }
    // any other conjunct mentioning a primed variable breaks functional form
    for (const Variable & v : free_vars(c)) {
      if (TransitionSystem::is_primed_name(v.name)) {
        throw ModelError(
            "transition is not functional: primed variable '" + v.name
            + "' occurs outside a defining equation");
      }
    }
    throw ModelError("transition is not functional: conjunct '"
                     + to_string(c) + "' defines no primed variable");
  }
  return next;
}

std::vector<Assignment> simulate(const TransitionSystem & ts,
                                 const Assignment & init_state,
                                 const std::vector<Assignment> & inputs,
                                 const Assignment & config)
{
  std::map<Variable, Term> next = next_functions(ts);

  Assignment state = init_state.merged_with(config);
  for (const Variable & v : ts.vars()) {
    unsigned roles = ts.roles_of(v.name);
    if ((roles & kInputRole)) continue;
    if (!state.contains(v)) {
      throw UnboundVariableError("initial state misses variable '" + v.name
                                 + "'");
    }
    if (!(roles & (kInputRole | kConfigRole)) && !next.count(v)) {
      throw ModelError("transition is not functional: no next equation for '"
                       + v.name + "'");
    }
  }
  if (!evaluate_bool(ts.init(), state)) {
    throw ModelError("initial state violates I(V)");
  }

  std::vector<Assignment> states;
  states.reserve(inputs.size() + 1);
  for (size_t i = 0; i < inputs.size(); ++i) {
    Assignment env = state.merged_with(inputs[i]);
    states.push_back(env);
    Assignment succ;
    for (const Variable & v : ts.vars()) {
      unsigned roles = ts.roles_of(v.name);
      if (roles & kInputRole) continue;
      auto it = next.find(v);
      if (it != next.end()) {
        Value nv = evaluate(it->second, env);
        if ((roles & kConfigRole) && nv != state.get(v)) {
          throw ModelError("config variable '" + v.name
                           + "' is not constant under T");
        }
        succ.set(v, nv);
      } else {
        succ.set(v, state.get(v));  // config variable held constant
      }
    }
    state = succ;
  }
  states.push_back(state);
  return states;
}

}  // namespace cfgsmith
