#ifndef CFGSMITH_TRANSITION_SYSTEM_H
#define CFGSMITH_TRANSITION_SYSTEM_H

#include <map>
#include <string>
#include <vector>

#include "cfgsmith/assignment.h"
#include "cfgsmith/term.h"

namespace cfgsmith {

// Role flags for a state variable. A variable may carry several; plain
// internal state carries kStateRole (or nothing at all).
enum RoleFlags : unsigned
{
  kInputRole = 1u << 0,
  kOutputRole = 1u << 1,
  kConfigRole = 1u << 2,
  kStateRole = 1u << 3,
};

unsigned role_from_name(const std::string & name);  // throws ModelError
std::string roles_to_string(unsigned roles);

// ⟨V, I, T⟩ with role metadata. The primed copy of a state variable v is
// the variable named "v'" of the same sort; primed variables are never
// members of V.
class TransitionSystem
{
 public:
  // Validates every structural invariant and throws ModelError/SortError
  // on violation:
  //   - variable names are plain identifiers (no '@', no '\''), unique;
  //   - init and trans are Bool;
  //   - free(init) ⊆ V and input variables do not occur in init;
  //   - free(trans) ⊆ V ∪ V' and primed inputs do not occur in trans;
  //   - at least one config variable.
  TransitionSystem(std::vector<Variable> vars, Term init, Term trans,
                   std::map<std::string, unsigned> roles);

  const std::vector<Variable> & vars() const { return vars_; }
  const Term & init() const { return init_; }
  const Term & trans() const { return trans_; }
  const std::map<std::string, unsigned> & roles() const { return roles_; }

  bool has_var(const std::string & name) const;
  const Variable & var(const std::string & name) const;
  unsigned roles_of(const std::string & name) const;

  std::vector<Variable> vars_with_role(unsigned role) const;
  std::vector<Variable> input_vars() const;
  std::vector<Variable> output_vars() const;
  std::vector<Variable> config_vars() const;

  static Variable prime(const Variable & v);
  static bool is_primed_name(const std::string & name);
  static std::string unprime_name(const std::string & name);

 private:
  std::vector<Variable> vars_;
  Term init_;
  Term trans_;
  std::map<std::string, unsigned> roles_;
  std::map<std::string, size_t> index_;
};

// Deterministic replay of a functional-form system.
//
// Requires trans to be a conjunction in which every primed variable
// occurs exactly once, as the left-hand side of an equation v' = f(V).
// Every non-input, non-config variable must have such an equation.
// init_state covers the non-input variables (config values may live in
// either init_state or config); configuration variables are held
// constant across all steps.
//
// Returns states s_0..s_k for k = inputs.size(). States s_0..s_{k-1}
// include that step's input values; s_k has no input bindings.
std::vector<Assignment> simulate(const TransitionSystem & ts,
                                 const Assignment & init_state,
                                 const std::vector<Assignment> & inputs,
                                 const Assignment & config);

// The per-variable next-state functions of a functional system, keyed by
// the unprimed variable. Throws ModelError if trans is not functional.
std::map<Variable, Term> next_functions(const TransitionSystem & ts);

}  // namespace cfgsmith

#endif
