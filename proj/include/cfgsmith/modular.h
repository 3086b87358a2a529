#ifndef CFGSMITH_MODULAR_H
#define CFGSMITH_MODULAR_H

#include <optional>
#include <string>
#include <vector>

#include "cfgsmith/smt_backend.h"
#include "cfgsmith/unroll.h"

namespace cfgsmith {

// How an abduct summarizes a solved sub-problem for the next one.
struct AbductStrategy
{
  enum class Kind
  {
    // Pin every free variable of the solved formula to its model value.
    // Always entails the formula.
    kAllFreeVars,
    // Pin only the listed interface variables. Sound for the combined
    // system when every variable common to both parts is listed.
    kInterfaceOnly,
  };

  Kind kind = Kind::kAllFreeVars;
  // kInterfaceOnly: names to pin. A name matches a timed variable "v@i"
  // either exactly or by its base "v" (which pins every step). Names
  // absent from the formula contribute nothing.
  std::vector<std::string> shared_names;

  static AbductStrategy all_free_vars() { return { Kind::kAllFreeVars, {} }; }
  static AbductStrategy interface_only(std::vector<std::string> names)
  {
    return { Kind::kInterfaceOnly, std::move(names) };
  }
};

// A two-part split of a configuration problem. The constructor checks
// basic shape: both parts use the parent's k, the shared variables exist
// in both parts, and no name common to two of the three systems carries
// two different sorts. Condition (iv) — config cover — is a verdict of
// check_decomposition, not a construction error.
struct Decomposition
{
  ConfigProblem parent;
  ConfigProblem part1;
  ConfigProblem part2;
  std::vector<std::string> shared_names;

  Decomposition(ConfigProblem parent, ConfigProblem part1, ConfigProblem part2,
                std::vector<std::string> shared_names);
};

struct ConditionVerdict
{
  enum class Status
  {
    kPass,
    kFail,
    kInconclusive,
  };

  Status status = Status::kInconclusive;
  std::optional<Assignment> countermodel;  // present on kFail when available

  bool passed() const { return status == Status::kPass; }
};

// One verdict per decomposition condition:
//   transitions:  T1 ∧ T2 ⟹ T      (validity via solver)
//   inits:        I1 ∧ I2 ⟹ I      (validity via solver)
//   properties:   P1 ∧ P2 ⟹ P      (validity via solver)
//   config_cover: V_conf ⊆ V1_conf ∪ V2_conf   (syntactic)
struct DecompositionReport
{
  ConditionVerdict transitions;
  ConditionVerdict inits;
  ConditionVerdict properties;
  ConditionVerdict config_cover;

  bool all_pass() const
  {
    return transitions.passed() && inits.passed() && properties.passed()
           && config_cover.passed();
  }
  std::string str() const;
};

DecompositionReport check_decomposition(const Decomposition & d,
                                        const SolverConfig & solver);

// The same conditions over an ordered chain of parts: ⋀i Ti ⟹ T,
// ⋀i Ii ⟹ I, ⋀i Pi ⟹ P, and config cover over the union of the
// parts' config sets.
DecompositionReport check_decomposition(
    const ConfigProblem & parent, const std::vector<ConfigProblem> & parts,
    const SolverConfig & solver);

// Conjunction pinning model values of φ's free variables, either all of
// them or the interface subset. Throws ModelError when the model misses
// a needed variable.
Term get_abduct(const Term & phi, const Assignment & model,
                const AbductStrategy & strategy);

struct ModularResult
{
  SatResult::Status status = SatResult::Status::kUnknown;
  std::optional<Configuration> configuration;  // present iff status is sat
  // kUnsat from a stage does not prove the parent unconfigurable.
  bool inconclusive_unsat = false;
  size_t failed_stage = 0;  // 1-based stage that answered unsat/unknown

  bool is_sat() const { return status == SatResult::Status::kSat; }
};

// Alg. SolveModular: solve part 1, abduct its model, conjoin to part 2,
// solve, and assemble the configuration over the parent's config
// variables (later parts win; earlier models fill the rest).
ModularResult solve_modular(const Decomposition & d,
                            const AbductStrategy & strategy,
                            const SolverConfig & solver);

// Left fold of the same step over an ordered chain of parts.
ModularResult solve_chain(const ConfigProblem & parent,
                          const std::vector<ConfigProblem> & parts,
                          const AbductStrategy & strategy,
                          const SolverConfig & solver);

// Pins config into the parent's monolithic formula and solves: the
// soundness check behind every modular sat answer.
bool recheck_monolithic(const ConfigProblem & parent,
                        const Configuration & config,
                        const SolverConfig & solver);

// Projects a parent trace onto one part: keeps input entries for the
// part's input variables and output entries for its output variables;
// everything else becomes don't-care.
Trace restrict_trace(const Trace & trace, const TransitionSystem & part);

// Parsed form of a decomposition file:
//   parent <path>
//   part <path>          (two or more, in chain order)
//   shared <name>...
//   strategy all-free-vars | interface-only
// '#' starts a comment. Paths are taken verbatim (resolved by the
// caller against the file's directory).
struct DecompositionSpec
{
  std::string parent_path;
  std::vector<std::string> part_paths;
  std::vector<std::string> shared_names;
  AbductStrategy::Kind strategy = AbductStrategy::Kind::kAllFreeVars;
};

DecompositionSpec parse_decomposition_spec(const std::string & text);

}  // namespace cfgsmith

#endif
