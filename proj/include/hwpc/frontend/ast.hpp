#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "hwpc/data_type.hpp"
#include "hwpc/value.hpp"

namespace hwpc {

struct SourceLoc {
    int line = 0, col = 0;
    std::string str() const { return std::to_string(line) + ":" + std::to_string(col); }
};

// Compile error with source position, thrown by the parser and builders.
class CompileError : public std::runtime_error {
public:
    CompileError(std::string msg, SourceLoc loc = {})
        : std::runtime_error(loc.line ? loc.str() + ": " + msg : msg), loc_(loc) {}
    SourceLoc loc() const { return loc_; }

private:
    SourceLoc loc_;
};

struct OpRef;
using StaticParam = std::variant<std::int64_t, DataType, OpRef>;

// A reference to a library operator or user function, with all static
// parameters bound to constants (the language is monomorphic).
struct OpRef {
    std::string name;
    std::vector<StaticParam> params;

    std::int64_t int_param(size_t i) const;
    const OpRef& op_param(size_t i) const;
    const DataType& type_param(size_t i) const;
    std::string render() const;
    bool operator==(const OpRef& o) const;
};

// One node of a pipeline graph. Arguments are node handles of the owning
// function; types are filled in by validation.
struct FNode {
    enum class Kind { Input, Const, Apply, Concat };
    Kind kind = Kind::Input;
    DataType type;
    OpRef op;       // Apply only
    Value constant; // Const only
    std::vector<int> args;
    SourceLoc loc;
};

struct Diagnostic {
    std::string message;
    SourceLoc loc;
};

struct UserFunction {
    std::string name;
    DataType input_type;
    std::vector<FNode> nodes;
    int input_node = -1;
    int output_node = -1;

    int add(FNode n) {
        nodes.push_back(std::move(n));
        return (int)nodes.size() - 1;
    }
};

struct Program {
    std::vector<UserFunction> funcs;

    const UserFunction* find(const std::string& name) const {
        for (const auto& f : funcs)
            if (f.name == name) return &f;
        return nullptr;
    }
    const UserFunction& top() const {
        const UserFunction* f = find("main");
        if (!f) throw CompileError("no 'main' function defined");
        return *f;
    }
};

} // namespace hwpc
