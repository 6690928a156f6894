#pragma once

#include "hwpc/frontend/ast.hpp"

namespace hwpc {

// Schedule-independent reference executor. Runs a validated function graph
// directly on a concrete frame with exact fixed-point semantics: big-integer
// arithmetic inside each operator, truncated to the declared width at every
// operator boundary (hardware wrap). Every mapped design must reproduce its
// output bit for bit.
Value eval(const Program& prog, const UserFunction& fn, const Value& input);

// Single-operator semantics, used directly by property tests and by the
// simulator's pointwise kernels.
Value eval_operator(const Program& prog, const OpRef& op, const Value& input);

// Pointwise kernel application (op must be a scalar kernel).
Value eval_scalar_kernel(const OpRef& op, const Value& input);

} // namespace hwpc
