#include "cfgsmith/unroll.h"

#include "cfgsmith/errors.h"
#include "cfgsmith/eval.h"

namespace cfgsmith {

ConfigProblem::ConfigProblem(TransitionSystem system_, size_t k_,
                             Trace property_)
    : system(std::move(system_)), k(k_), property(std::move(property_))
{
  if (k < 1) {
    throw ModelError("configuration problem needs k >= 1, got "
                     + std::to_string(k));
  }
  v_in = system.input_vars();
  v_out = system.output_vars();
  v_conf = system.config_vars();
  if (v_conf.empty()) {
    throw ModelError("configuration problem needs a nonempty V_conf");
  }
  if (property.inputs.size() != k || property.outputs.size() != k + 1) {
    throw ModelError("trace covers " + std::to_string(property.inputs.size())
                     + " transitions but k = " + std::to_string(k));
  }
  validate_trace(property, system);
}

Term unroll(const TransitionSystem & ts, size_t k)
{
  Term phi = at_time(ts.init(), 0);
  for (size_t i = 0; i < k; ++i) {
    phi = mk_and(phi, at_time(ts.trans(), i));
  }
  return phi;
}

Term conf_constancy(const std::vector<Variable> & v_conf, size_t k)
{
  std::vector<Term> eqs;
  for (const Variable & v : v_conf) {
    for (size_t i = 0; i < k; ++i) {
      eqs.push_back(mk_eq(timed_term(v, i + 1), timed_term(v, i)));
    }
  }
  return mk_and_all(eqs);
}

namespace {

void append_step_conjuncts(std::vector<Term> & out, const TraceStep & step,
                           const std::vector<Variable> & allowed, size_t i,
                           const char * side)
{
  for (const auto & [name, val] : step.values) {
    bool known = false;
    for (const Variable & v : allowed) known |= v.name == name;
    if (!known) {
      throw ModelError("trace constrains '" + name + "' which is not in "
                       + side);
    }
  }
  for (const Variable & v : allowed) {
    auto it = step.values.find(v.name);
    if (it == step.values.end() || !it->second.has_value()) continue;
    uint64_t c = *it->second;
    Term lhs = timed_term(v, i);
    Term rhs = v.sort.is_bool() ? bool_const(c != 0) : bv_const(c, v.sort.width());
    out.push_back(mk_eq(lhs, rhs));
  }
}

}  // namespace

Term pbe_property(const Trace & trace, const std::vector<Variable> & v_in,
                  const std::vector<Variable> & v_out, size_t k)
{
  if (trace.inputs.size() != k || trace.outputs.size() != k + 1) {
    throw ModelError("trace covers " + std::to_string(trace.inputs.size())
                     + " transitions but k = " + std::to_string(k));
  }
  std::vector<Term> eqs;
  for (size_t i = 0; i < k; ++i) {
    append_step_conjuncts(eqs, trace.inputs[i], v_in, i, "V_in");
  }
  for (size_t i = 0; i <= k; ++i) {
    append_step_conjuncts(eqs, trace.outputs[i], v_out, i, "V_out");
  }
  return mk_and_all(eqs);
}

Term build_config_formula(const ConfigProblem & cp,
                          const std::vector<Term> & invariants)
{
  Term phi = unroll(cp.system, cp.k);
  phi = mk_and(phi, conf_constancy(cp.v_conf, cp.k));
  phi = mk_and(phi, pbe_property(cp.property, cp.v_in, cp.v_out, cp.k));
  for (const Term & inv : invariants) {
    for (const Variable & v : free_vars(inv)) {
      if (!cp.system.has_var(v.name) || cp.system.var(v.name).sort != v.sort) {
        throw ModelError("invariant mentions '" + v.name
                         + "' which is not a system variable");
      }
    }
    for (size_t i = 0; i <= cp.k; ++i) {
      phi = mk_and(phi, at_time(inv, i));
    }
  }
  return phi;
}

Configuration extract_configuration(const Assignment & model,
                                    const ConfigProblem & cp)
{
  Configuration out;
  for (const Variable & v : cp.v_conf) {
    out.set(v, model.get(timed(v, 0)));
  }
  return out;
}

bool check_configuration(const ConfigProblem & cp, const Assignment & model,
                         const Configuration & config, std::string * mismatch)
{
  const TransitionSystem & ts = cp.system;
  Assignment init_state;
  for (const Variable & v : ts.vars()) {
    if (ts.roles_of(v.name) & kInputRole) continue;
    init_state.set(v, model.get(timed(v, 0)));
  }
  std::vector<Assignment> inputs;
  for (size_t i = 0; i < cp.k; ++i) {
    Assignment step;
    for (const Variable & v : cp.v_in) {
      auto it = cp.property.inputs[i].values.find(v.name);
      if (it != cp.property.inputs[i].values.end() && it->second.has_value()) {
        uint64_t c = *it->second;
        step.set(v, v.sort.is_bool() ? Value::of_bool(c != 0)
                                     : Value::of_bv(c, v.sort.width()));
      } else {
        step.set(v, model.get(timed(v, i)));
      }
    }
    inputs.push_back(std::move(step));
  }

  std::vector<Assignment> states = simulate(ts, init_state, inputs, config);
  for (size_t i = 0; i <= cp.k; ++i) {
    for (const Variable & v : cp.v_out) {
      auto it = cp.property.outputs[i].values.find(v.name);
      if (it == cp.property.outputs[i].values.end()
          || !it->second.has_value()) {
        continue;
      }
      Value got = states[i].get(v);
      uint64_t want = *it->second;
      if (got.v != want) {
        if (mismatch) {
          *mismatch = v.name + "@" + std::to_string(i) + ": trace wants "
                      + std::to_string(want) + ", replay gives "
                      + std::to_string(got.v);
        }
        return false;
      }
    }
  }
  return true;
}

}  // namespace cfgsmith
