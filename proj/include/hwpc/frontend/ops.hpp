#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hwpc/frontend/ast.hpp"

namespace hwpc {

// Static-parameter schema and hardware properties of a library operator.
struct OpInfo {
    enum class ParamKind { Int, Op, Type };
    std::string name;
    std::vector<ParamKind> params;
    bool scalar_kernel = false; // applicable pointwise to scalar/tuple values
    bool zero_latency = false;  // pure wiring (shifts, projections, muxes)
    bool variadic_input = false;
};

// nullptr when the name is not a library operator (it may still be a user
// function).
const OpInfo* find_op(const std::string& name);

// Output type of `op` applied to an input of type `in`, following each
// operator's typing rule. Resolves user-function references through `prog`.
// Throws CompileError on any mismatch.
DataType type_apply(const Program& prog, const OpRef& op, const DataType& in, SourceLoc loc = {});

// Validates one function graph: acyclicity, single input, argument arities,
// and edge typing (filling in node types as it goes). Returns all problems
// found; an empty list means the graph is fully typed and well-formed.
std::vector<Diagnostic> validate_graph(const Program& prog, UserFunction& fn);

// Validates every function in the program; throws CompileError if any
// diagnostics are produced. Convenience for tools.
void type_check(Program& prog);

} // namespace hwpc
