#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace hwpc {

// Value-layout types carried on every wire: fixed-point scalars, booleans,
// raw bit vectors, nested 2-D arrays, tuples, and bounded sparse arrays.
// Immutable, value-semantic handles; structural equality.
//
// Fixed-point scalars are (bits, exp): the stored integer scaled by 2^exp.
// Arithmetic operates on the integer part; exponents are compile-time
// metadata that typing rules check for agreement.
class DataType {
public:
    enum class Kind { UintFP, IntFP, Bits, Bool, Array2d, Tuple, SparseArray2d };

    DataType() = default; // empty handle; valid() == false

    static DataType uint_fp(int bits, int exp = 0);
    static DataType int_fp(int bits, int exp = 0);
    static DataType bits(int n);
    static DataType boolean();
    static DataType array2d(DataType elem, std::int64_t w, std::int64_t h);
    static DataType array1d(DataType elem, std::int64_t w) { return array2d(std::move(elem), w, 1); }
    static DataType tuple(std::vector<DataType> elems);
    static DataType sparse_array2d(DataType elem, std::int64_t max_w, std::int64_t max_h);

    bool valid() const { return node_ != nullptr; }
    Kind kind() const { return node_->kind; }

    bool is_scalar() const;
    bool is_signed() const { return kind() == Kind::IntFP; }
    bool is_array() const { return kind() == Kind::Array2d; }
    bool is_tuple() const { return kind() == Kind::Tuple; }
    bool is_sparse() const { return kind() == Kind::SparseArray2d; }

    int scalar_bits() const { return node_->bits; }
    int exponent() const { return node_->exp; }
    std::int64_t width() const { return node_->w; }   // Array2d / SparseArray2d max
    std::int64_t height() const { return node_->h; }
    const DataType& elem() const { return node_->elems[0]; }
    const std::vector<DataType>& members() const { return node_->elems; }

    // Exact serialized width in bits. Sparse arrays serialize as
    // maxW*maxH elements plus a count field of ceil(log2(maxW*maxH+1)) bits.
    std::int64_t bit_width() const;

    // Canonical textual rendering, e.g. "u8", "i16@-2", "(u8,u8)[8,8]",
    // "u8[<=16,16]". Used in diagnostics and the netlist.
    std::string render() const;

    bool operator==(const DataType& o) const;
    bool operator!=(const DataType& o) const { return !(*this == o); }

private:
    struct Node {
        Kind kind;
        int bits = 0;
        int exp = 0;
        std::int64_t w = 0, h = 0;
        std::vector<DataType> elems;
    };
    explicit DataType(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

// Number of bits needed to count 0..n inclusive.
int count_field_bits(std::int64_t n);

} // namespace hwpc
