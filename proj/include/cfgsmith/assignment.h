#ifndef CFGSMITH_ASSIGNMENT_H
#define CFGSMITH_ASSIGNMENT_H

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "cfgsmith/term.h"

namespace cfgsmith {

// A concrete, sorted value: false/true for Bool, an unsigned integer
// below 2^width for bit-vectors.
struct Value
{
  Sort sort;
  uint64_t v;

  static Value of_bool(bool b) { return { Sort::boolean(), b ? 1u : 0u }; }
  static Value of_bv(uint64_t v, unsigned width)
  {
    Sort s = Sort::bitvec(width);
    if (v > s.mask()) {
      throw ModelError("value " + std::to_string(v) + " does not fit in "
                       + std::to_string(width) + " bits");
    }
    return { s, v };
  }

  bool as_bool() const
  {
    if (!sort.is_bool()) throw ModelError("as_bool() on bit-vector value");
    return v != 0;
  }

  bool operator==(const Value & o) const { return sort == o.sort && v == o.v; }
  bool operator!=(const Value & o) const { return !(*this == o); }

  std::string str() const
  {
    return sort.is_bool() ? (v ? "true" : "false") : std::to_string(v);
  }
};

// Total map from variables to values over its declared domain. Lookups
// check the requesting variable's sort against the stored binding.
class Assignment
{
 public:
  Assignment() = default;

  void set(const Variable & var, Value val)
  {
    if (val.sort != var.sort) {
      throw ModelError("assignment for '" + var.name + "' has sort "
                       + val.sort.str() + ", expected " + var.sort.str());
    }
    map_.insert_or_assign(var.name, val);
  }

  void set_bool(const Variable & var, bool b) { set(var, Value::of_bool(b)); }
  void set_bv(const Variable & var, uint64_t v)
  {
    set(var, Value::of_bv(v, var.sort.width()));
  }

  bool contains(const std::string & name) const { return map_.count(name); }
  bool contains(const Variable & var) const { return map_.count(var.name); }

  Value get(const Variable & var) const
  {
    auto it = map_.find(var.name);
    if (it == map_.end()) {
      throw UnboundVariableError("no binding for variable '" + var.name
                                 + "'");
    }
    if (it->second.sort != var.sort) {
      throw ModelError("binding for '" + var.name + "' has sort "
                       + it->second.sort.str() + ", expected "
                       + var.sort.str());
    }
    return it->second;
  }

  std::optional<Value> find(const std::string & name) const
  {
    auto it = map_.find(name);
    if (it == map_.end()) return std::nullopt;
    return it->second;
  }

  // Bindings of other override bindings of *this on collision.
  Assignment merged_with(const Assignment & other) const
  {
    Assignment out = *this;
    for (const auto & [k, v] : other.map_) out.map_.insert_or_assign(k, v);
    return out;
  }

  size_t size() const { return map_.size(); }
  bool empty() const { return map_.empty(); }
  auto begin() const { return map_.begin(); }
  auto end() const { return map_.end(); }

  bool operator==(const Assignment & o) const { return map_ == o.map_; }

 private:
  std::map<std::string, Value> map_;
};

}  // namespace cfgsmith

#endif
