#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "hwpc/data_type.hpp"

namespace hwpc {

using BigInt = boost::multiprecision::cpp_int;

// A concrete value of some DataType. Scalars are exact big integers so the
// reference semantics can never overflow differently from hardware; every
// operator boundary truncates back to the declared width (wrap modulo 2^bits,
// two's complement for signed).
//
// Arrays are row-major. Sparse arrays hold surviving elements together with
// their strictly increasing scan-order positions.
class Value {
public:
    struct Sparse {
        std::vector<Value> elems;
        std::vector<std::int64_t> positions; // row-major linear indices
    };

    Value() = default;
    static Value scalar(DataType t, BigInt v); // wraps v to the declared width
    static Value array(DataType arrayType, std::vector<Value> elems);
    static Value tuple(DataType tupleType, std::vector<Value> elems);
    static Value sparse(DataType sparseType, Sparse payload);

    // Zero of any type (arrays/tuples filled recursively, sparse empty).
    static Value zero(const DataType& t);

    bool valid() const { return type_.valid(); }
    const DataType& type() const { return type_; }

    const BigInt& scalar_int() const { return std::get<BigInt>(payload_); }
    bool scalar_bool() const { return std::get<BigInt>(payload_) != 0; }
    const std::vector<Value>& elems() const { return std::get<std::vector<Value>>(payload_); }
    const Sparse& sparse_payload() const { return std::get<Sparse>(payload_); }

    // Array element access, row-major.
    const Value& at(std::int64_t x, std::int64_t y) const;

    bool operator==(const Value& o) const;
    bool operator!=(const Value& o) const { return !(*this == o); }

    std::string render() const; // compact literal form for diagnostics

private:
    DataType type_;
    std::variant<std::monostate, BigInt, std::vector<Value>, Sparse> payload_;
};

// Wrap an arbitrary integer into the representable range of a scalar type:
// [0, 2^bits) unsigned, [-2^(bits-1), 2^(bits-1)) two's complement signed.
BigInt wrap_to_width(const BigInt& v, const DataType& t);

// Signed/unsigned interpretation helpers used by scalar kernels.
BigInt logical_rshift(const BigInt& v, int n, const DataType& t);

} // namespace hwpc
