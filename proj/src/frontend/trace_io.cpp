#include "json.hpp"

#include "cfgsmith/errors.h"
#include "cfgsmith/frontend.h"

namespace cfgsmith {

namespace {

using nlohmann::json;

TraceStep parse_step(const json & j, const char * section, size_t idx)
{
  auto where = [&] {
    return std::string(section) + "[" + std::to_string(idx) + "]";
  };
  if (!j.is_object()) {
    throw ParseError("trace step " + where() + " is not an object");
  }
  TraceStep step;
  for (const auto & [name, val] : j.items()) {
    if (val.is_null()) {
      step.values.emplace(name, std::nullopt);
    } else if (val.is_boolean()) {
      step.values.emplace(name, val.get<bool>() ? 1u : 0u);
    } else if (val.is_number_unsigned()) {
      step.values.emplace(name, val.get<uint64_t>());
    } else {
      throw ParseError("value of '" + name + "' in " + where()
                       + " must be a non-negative integer, boolean, or null");
    }
  }
  return step;
}

}  // namespace

Trace parse_trace(const std::string & text)
{
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error & e) {
    throw ParseError(std::string("trace is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("inputs") || !j.contains("outputs")) {
    throw ParseError("trace must be an object with 'inputs' and 'outputs'");
  }
  const json & in = j.at("inputs");
  const json & out = j.at("outputs");
  if (!in.is_array() || !out.is_array()) {
    throw ParseError("'inputs' and 'outputs' must be arrays");
  }
  Trace tr;
  for (size_t i = 0; i < in.size(); ++i) {
    tr.inputs.push_back(parse_step(in[i], "inputs", i));
  }
  for (size_t i = 0; i < out.size(); ++i) {
    tr.outputs.push_back(parse_step(out[i], "outputs", i));
  }
  if (tr.outputs.size() != tr.inputs.size() + 1) {
    throw ParseError("trace has " + std::to_string(tr.inputs.size())
                     + " input steps but " + std::to_string(tr.outputs.size())
                     + " output steps; expected k inputs and k+1 outputs");
  }
  return tr;
}

void validate_trace(const Trace & trace, const TransitionSystem & ts)
{
  auto check = [&](const TraceStep & step, unsigned role,
                   const char * role_name) {
    for (const auto & [name, val] : step.values) {
      if (!ts.has_var(name)) {
        throw ModelError("trace names unknown variable '" + name + "'");
      }
      if (!(ts.roles_of(name) & role)) {
        throw ModelError("trace variable '" + name + "' does not have role "
                         + role_name);
      }
      if (val.has_value()) {
        const Sort & s = ts.var(name).sort;
        uint64_t limit = s.is_bool() ? 1 : s.mask();
        if (*val > limit) {
          throw ModelError("trace value " + std::to_string(*val) + " for '"
                           + name + "' exceeds sort " + s.str());
        }
      }
    }
  };
  for (const TraceStep & s : trace.inputs) check(s, kInputRole, "input");
  for (const TraceStep & s : trace.outputs) check(s, kOutputRole, "output");
}

Trace parse_trace(const std::string & text, const TransitionSystem & ts)
{
  Trace tr = parse_trace(text);
  validate_trace(tr, ts);
  return tr;
}

std::string print_trace(const Trace & trace)
{
  auto render = [](const std::vector<TraceStep> & steps) {
    json arr = json::array();
    for (const TraceStep & s : steps) {
      json o = json::object();
      for (const auto & [name, val] : s.values) {
        if (val.has_value()) {
          o[name] = *val;
        } else {
          o[name] = nullptr;
        }
      }
      arr.push_back(std::move(o));
    }
    return arr;
  };
  json j;
  j["inputs"] = render(trace.inputs);
  j["outputs"] = render(trace.outputs);
  return j.dump(2) + "\n";
}

std::map<std::string, unsigned> parse_role_map(const std::string & text)
{
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error & e) {
    throw ParseError(std::string("role map is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw ParseError("role map must be a JSON object");
  }
  std::map<std::string, unsigned> out;
  for (const auto & [name, arr] : j.items()) {
    if (!arr.is_array()) {
      throw ParseError("roles of '" + name + "' must be an array of strings");
    }
    unsigned r = 0;
    for (const auto & e : arr) {
      if (!e.is_string()) {
        throw ParseError("roles of '" + name + "' must be strings");
      }
      r |= role_from_name(e.get<std::string>());
    }
    out.emplace(name, r);
  }
  return out;
}

}  // namespace cfgsmith
