#ifndef CFGSMITH_EVAL_H
#define CFGSMITH_EVAL_H

#include "cfgsmith/assignment.h"
#include "cfgsmith/term.h"

namespace cfgsmith {

// Concrete semantics: fixed-width unsigned arithmetic, wrapping modulo
// 2^width. Throws UnboundVariableError if a free variable of t has no
// binding in a.
Value evaluate(const Term & t, const Assignment & a);

// Convenience for Bool terms.
bool evaluate_bool(const Term & t, const Assignment & a);

}  // namespace cfgsmith

#endif
