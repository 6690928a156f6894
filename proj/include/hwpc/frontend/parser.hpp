#pragma once

#include <string>

#include "hwpc/frontend/ast.hpp"

namespace hwpc {

// Parses pipeline source text into a typed program. One file may define many
// functions; 'main' designates the top level. Functions must be defined
// before use. Throws CompileError with line/column on any problem.
//
// Grammar sketch:
//   func NAME(PARAM: TYPE) { NAME = EXPR ... return EXPR }
//   EXPR  := NAME | OP '(' EXPR {',' EXPR} ')' | Const '<' TYPE '>' '(' LITERAL ')'
//   OP    := NAME [ '<' (INT | OP | TYPE) {',' ...} '>' ]
//   TYPE  := u8 | i16 | u8@-2 | bool | bits4 | (TYPE,...) | TYPE[w] | TYPE[w,h] | TYPE[<=w,h]
// Multi-argument applications are sugar for an implicit Concat.
Program parse_pipeline(const std::string& source);

// Parses just a type, e.g. for CLI tools. Throws CompileError.
DataType parse_type(const std::string& text);

// Prints a program back to DSL text; parse(print(parse(s))) is a fixed point.
std::string print_pipeline(const Program& prog);

} // namespace hwpc
