#ifndef CFGSMITH_FRONTEND_H
#define CFGSMITH_FRONTEND_H

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cfgsmith/transition_system.h"

namespace cfgsmith {

// One step of an example trace: variable name -> concrete value, or
// nullopt for an explicit don't-care. Variables absent from the map are
// don't-cares as well.
struct TraceStep
{
  std::map<std::string, std::optional<uint64_t>> values;
};

// Input/output example over k transitions: inputs for steps 0..k-1,
// outputs for steps 0..k.
struct Trace
{
  std::vector<TraceStep> inputs;
  std::vector<TraceStep> outputs;

  size_t k() const { return inputs.size(); }
};

// Native STS document -> TransitionSystem. Sections: optional `sorts`
// (alias = sort), `vars` (one `name : sort : roles...` per line), `init`
// and `trans` (one or more SMT-LIB terms, conjoined in order). Primed
// occurrences ("v'") are permitted in trans only.
TransitionSystem parse_sts(const std::string & text);

// Renders a system in the native format such that
// parse_sts(print_sts(ts)) is structurally identical to ts.
std::string print_sts(const TransitionSystem & ts);

// JSON trace: {"inputs": [k objects], "outputs": [k+1 objects]}, values
// decimal integers, booleans, or null for don't-care.
Trace parse_trace(const std::string & text);

// Parse and validate against a system in one go.
Trace parse_trace(const std::string & text, const TransitionSystem & ts);

// Checks: named variables exist with role input (inputs) / output
// (outputs); values fit the variable's sort.
void validate_trace(const Trace & trace, const TransitionSystem & ts);

std::string print_trace(const Trace & trace);

// JSON sidecar: {"name": ["input"|"output"|"config"|"state", ...], ...}.
std::map<std::string, unsigned> parse_role_map(const std::string & text);

// Btor2 subset -> TransitionSystem. Supported keywords: sort bitvec,
// input, state, output, const, constd, consth, zero, one, init, next,
// add, sub, mul, eq, ne, ite, and, or, not, implies, ult, ulte, concat,
// slice, uext. The sidecar roles override the structural roles implied
// by input/state/output lines (Btor2 has no config notion).
TransitionSystem parse_btor2(const std::string & text,
                             const std::map<std::string, unsigned> & roles);

}  // namespace cfgsmith

#endif
