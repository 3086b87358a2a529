#ifndef CFGSMITH_UNROLL_H
#define CFGSMITH_UNROLL_H

#include <optional>
#include <vector>

#include "cfgsmith/frontend.h"
#include "cfgsmith/transition_system.h"

namespace cfgsmith {

// ⟨S, k, V_in, V_out, V_conf, P⟩. The variable subsets default to the
// role-tagged sets of the system but may be narrowed.
struct ConfigProblem
{
  TransitionSystem system;
  size_t k;
  std::vector<Variable> v_in;
  std::vector<Variable> v_out;
  std::vector<Variable> v_conf;
  Trace property;

  // Takes the subsets from the system's roles; validates k ≥ 1, v_conf
  // nonempty, and trace length == k.
  ConfigProblem(TransitionSystem system, size_t k, Trace property);
};

// Assignment over v_conf (untimed names).
using Configuration = Assignment;

// I(V@0) ∧ ⋀_{i<k} T(V@i, V@(i+1)); k = 0 gives I(V@0) alone.
Term unroll(const TransitionSystem & ts, size_t k);

// ⋀_{v ∈ v_conf} ⋀_{i<k} v@(i+1) = v@i, variables outermost, steps
// ascending.
Term conf_constancy(const std::vector<Variable> & v_conf, size_t k);

// One equality per concrete trace entry: inputs at steps 0..k-1 then
// outputs at steps 0..k; don't-cares contribute nothing.
Term pbe_property(const Trace & trace, const std::vector<Variable> & v_in,
                  const std::vector<Variable> & v_out, size_t k);

// Eq. 1: unroll ∧ conf ∧ P, then each invariant instantiated at every
// step 0..k. Conjunct order is fixed: init, transitions ascending,
// constancy, property, invariants (per invariant, steps ascending).
Term build_config_formula(const ConfigProblem & cp,
                          const std::vector<Term> & invariants = {});

// Reads v@0 for each config variable out of a model over timed names.
Configuration extract_configuration(const Assignment & model,
                                    const ConfigProblem & cp);

// Replays cp's trace inputs through the simulator under config and
// checks every constrained output value. Returns false (and fills
// *mismatch if given) on the first violated entry. Initial state: the
// model's step-0 values for non-input variables.
bool check_configuration(const ConfigProblem & cp, const Assignment & model,
                         const Configuration & config,
                         std::string * mismatch = nullptr);

}  // namespace cfgsmith

#endif
