#include "hwpc/value.hpp"

#include <stdexcept>

namespace hwpc {

static void require(bool cond, const std::string& msg) {
    if (!cond) throw std::logic_error(msg);
}

BigInt wrap_to_width(const BigInt& v, const DataType& t) {
    const int bits = t.kind() == DataType::Kind::Bool ? 1 : t.scalar_bits();
    const BigInt modulus = BigInt(1) << bits;
    BigInt r = v % modulus;
    if (r < 0) r += modulus;
    if (t.is_signed() && r >= (BigInt(1) << (bits - 1))) r -= modulus;
    return r;
}

BigInt logical_rshift(const BigInt& v, int n, const DataType& t) {
    if (!t.is_signed()) return v >> n;
    // arithmetic shift for signed: floor division by 2^n
    BigInt r = v >> n; // cpp_int >> is arithmetic (floor) for negatives
    return r;
}

Value Value::scalar(DataType t, BigInt v) {
    require(t.is_scalar(), "scalar value needs scalar type, got " + t.render());
    Value out;
    out.type_ = t;
    out.payload_ = wrap_to_width(v, t);
    return out;
}

Value Value::array(DataType arrayType, std::vector<Value> elems) {
    require(arrayType.is_array(), "array value needs array type");
    require((std::int64_t)elems.size() == arrayType.width() * arrayType.height(),
            "array payload size mismatch for " + arrayType.render());
    for (const auto& e : elems)
        require(e.type() == arrayType.elem(), "array element type mismatch");
    Value out;
    out.type_ = std::move(arrayType);
    out.payload_ = std::move(elems);
    return out;
}

Value Value::tuple(DataType tupleType, std::vector<Value> elems) {
    require(tupleType.is_tuple(), "tuple value needs tuple type");
    require(elems.size() == tupleType.members().size(), "tuple payload arity mismatch");
    for (size_t i = 0; i < elems.size(); ++i)
        require(elems[i].type() == tupleType.members()[i], "tuple member type mismatch");
    Value out;
    out.type_ = std::move(tupleType);
    out.payload_ = std::move(elems);
    return out;
}

Value Value::sparse(DataType sparseType, Sparse payload) {
    require(sparseType.is_sparse(), "sparse value needs sparse type");
    const std::int64_t cap = sparseType.width() * sparseType.height();
    require((std::int64_t)payload.elems.size() <= cap, "sparse count exceeds bound");
    require(payload.elems.size() == payload.positions.size(), "sparse positions/elements mismatch");
    std::int64_t prev = -1;
    for (size_t i = 0; i < payload.elems.size(); ++i) {
        require(payload.elems[i].type() == sparseType.elem(), "sparse element type mismatch");
        require(payload.positions[i] > prev && payload.positions[i] < cap,
                "sparse positions must be strictly increasing scan-order indices");
        prev = payload.positions[i];
    }
    Value out;
    out.type_ = std::move(sparseType);
    out.payload_ = std::move(payload);
    return out;
}

Value Value::zero(const DataType& t) {
    switch (t.kind()) {
    case DataType::Kind::UintFP:
    case DataType::Kind::IntFP:
    case DataType::Kind::Bits:
    case DataType::Kind::Bool:
        return scalar(t, 0);
    case DataType::Kind::Array2d: {
        std::vector<Value> elems(t.width() * t.height(), zero(t.elem()));
        return array(t, std::move(elems));
    }
    case DataType::Kind::Tuple: {
        std::vector<Value> elems;
        for (const auto& m : t.members()) elems.push_back(zero(m));
        return tuple(t, std::move(elems));
    }
    case DataType::Kind::SparseArray2d:
        return sparse(t, {});
    }
    return {};
}

const Value& Value::at(std::int64_t x, std::int64_t y) const {
    require(type_.is_array(), "element access on non-array");
    require(x >= 0 && x < type_.width() && y >= 0 && y < type_.height(), "array index out of range");
    return elems()[y * type_.width() + x];
}

bool Value::operator==(const Value& o) const {
    if (!(type_ == o.type_)) return false;
    if (payload_.index() != o.payload_.index()) return false;
    if (std::holds_alternative<BigInt>(payload_)) return scalar_int() == o.scalar_int();
    if (std::holds_alternative<std::vector<Value>>(payload_)) return elems() == o.elems();
    if (std::holds_alternative<Sparse>(payload_)) {
        const auto &a = sparse_payload(), &b = o.sparse_payload();
        return a.positions == b.positions && a.elems == b.elems;
    }
    return true;
}

std::string Value::render() const {
    if (!valid()) return "<empty>";
    switch (type_.kind()) {
    case DataType::Kind::UintFP:
    case DataType::Kind::IntFP:
    case DataType::Kind::Bits:
        return scalar_int().str();
    case DataType::Kind::Bool:
        return scalar_bool() ? "true" : "false";
    case DataType::Kind::Array2d: {
        std::string s = "[";
        const auto& es = elems();
        for (size_t i = 0; i < es.size(); ++i) {
            if (i) s += ",";
            if (i >= 16) { s += "..."; break; }
            s += es[i].render();
        }
        return s + "]";
    }
    case DataType::Kind::Tuple: {
        std::string s = "(";
        const auto& es = elems();
        for (size_t i = 0; i < es.size(); ++i) {
            if (i) s += ",";
            s += es[i].render();
        }
        return s + ")";
    }
    case DataType::Kind::SparseArray2d: {
        const auto& sp = sparse_payload();
        std::string s = "{n=" + std::to_string(sp.elems.size());
        for (size_t i = 0; i < sp.elems.size() && i < 8; ++i)
            s += ", @" + std::to_string(sp.positions[i]) + ":" + sp.elems[i].render();
        return s + "}";
    }
    }
    return "?";
}

} // namespace hwpc
