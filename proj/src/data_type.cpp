#include "hwpc/data_type.hpp"

#include <cassert>
#include <stdexcept>

namespace hwpc {

static void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

DataType DataType::uint_fp(int bits, int exp) {
    require(bits >= 1, "uint bit width must be positive");
    auto n = std::make_shared<Node>();
    n->kind = Kind::UintFP;
    n->bits = bits;
    n->exp = exp;
    return DataType(std::move(n));
}

DataType DataType::int_fp(int bits, int exp) {
    require(bits >= 1, "int bit width must be positive");
    auto n = std::make_shared<Node>();
    n->kind = Kind::IntFP;
    n->bits = bits;
    n->exp = exp;
    return DataType(std::move(n));
}

DataType DataType::bits(int nbits) {
    require(nbits >= 1, "bits width must be positive");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Bits;
    n->bits = nbits;
    return DataType(std::move(n));
}

DataType DataType::boolean() {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Bool;
    n->bits = 1;
    return DataType(std::move(n));
}

DataType DataType::array2d(DataType elem, std::int64_t w, std::int64_t h) {
    require(elem.valid(), "array element type required");
    require(w >= 1 && h >= 1, "array dimensions must be positive");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Array2d;
    n->w = w;
    n->h = h;
    n->elems.push_back(std::move(elem));
    return DataType(std::move(n));
}

DataType DataType::tuple(std::vector<DataType> elems) {
    require(!elems.empty(), "tuple needs at least one member");
    for (const auto& e : elems) require(e.valid(), "tuple member type required");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Tuple;
    n->elems = std::move(elems);
    return DataType(std::move(n));
}

DataType DataType::sparse_array2d(DataType elem, std::int64_t max_w, std::int64_t max_h) {
    require(elem.valid(), "sparse array element type required");
    require(max_w >= 1 && max_h >= 1, "sparse array bounds must be positive");
    auto n = std::make_shared<Node>();
    n->kind = Kind::SparseArray2d;
    n->w = max_w;
    n->h = max_h;
    n->elems.push_back(std::move(elem));
    return DataType(std::move(n));
}

bool DataType::is_scalar() const {
    switch (kind()) {
    case Kind::UintFP:
    case Kind::IntFP:
    case Kind::Bits:
    case Kind::Bool:
        return true;
    default:
        return false;
    }
}

int count_field_bits(std::int64_t n) {
    int b = 1;
    while ((std::int64_t(1) << b) < n + 1) ++b;
    return b;
}

std::int64_t DataType::bit_width() const {
    switch (kind()) {
    case Kind::UintFP:
    case Kind::IntFP:
    case Kind::Bits:
        return node_->bits;
    case Kind::Bool:
        return 1;
    case Kind::Array2d:
        return node_->w * node_->h * elem().bit_width();
    case Kind::Tuple: {
        std::int64_t sum = 0;
        for (const auto& e : node_->elems) sum += e.bit_width();
        return sum;
    }
    case Kind::SparseArray2d:
        return node_->w * node_->h * elem().bit_width() + count_field_bits(node_->w * node_->h);
    }
    return 0;
}

std::string DataType::render() const {
    switch (kind()) {
    case Kind::UintFP:
    case Kind::IntFP: {
        std::string s = (kind() == Kind::UintFP ? "u" : "i") + std::to_string(node_->bits);
        if (node_->exp != 0) s += "@" + std::to_string(node_->exp);
        return s;
    }
    case Kind::Bits:
        return "bits" + std::to_string(node_->bits);
    case Kind::Bool:
        return "bool";
    case Kind::Array2d:
        if (node_->h == 1)
            return elem().render() + "[" + std::to_string(node_->w) + "]";
        return elem().render() + "[" + std::to_string(node_->w) + "," + std::to_string(node_->h) + "]";
    case Kind::Tuple: {
        std::string s = "(";
        for (size_t i = 0; i < node_->elems.size(); ++i) {
            if (i) s += ",";
            s += node_->elems[i].render();
        }
        return s + ")";
    }
    case Kind::SparseArray2d:
        return elem().render() + "[<=" + std::to_string(node_->w) + "," + std::to_string(node_->h) + "]";
    }
    return "?";
}

bool DataType::operator==(const DataType& o) const {
    if (node_ == o.node_) return true;
    if (!node_ || !o.node_) return false;
    if (node_->kind != o.node_->kind) return false;
    switch (node_->kind) {
    case Kind::UintFP:
    case Kind::IntFP:
        return node_->bits == o.node_->bits && node_->exp == o.node_->exp;
    case Kind::Bits:
        return node_->bits == o.node_->bits;
    case Kind::Bool:
        return true;
    case Kind::Array2d:
    case Kind::SparseArray2d:
        return node_->w == o.node_->w && node_->h == o.node_->h && elem() == o.elem();
    case Kind::Tuple:
        if (node_->elems.size() != o.node_->elems.size()) return false;
        for (size_t i = 0; i < node_->elems.size(); ++i)
            if (!(node_->elems[i] == o.node_->elems[i])) return false;
        return true;
    }
    return false;
}

} // namespace hwpc
