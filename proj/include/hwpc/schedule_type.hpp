#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "hwpc/data_type.hpp"
#include "hwpc/rational.hpp"

namespace hwpc {

// A schedule type is a data type plus vectorization/sequentialization
// structure: how many elements a wire carries per transaction and how the
// full array is walked over time.
//
//   Scalar(T)            one transaction carrying a single T
//   Vec(T, vw,vh; w,h)   (w,h) array walked in (vw,vh) chunks, row-major
//   Seq(S; w,h)          w*h repetitions of S, row-major
//   VecSparse            Vec over a bounded sparse array ("<= w,h")
//
// Vector widths must divide the array size, and Vec cannot nest inside Vec
// (a Seq level is used instead). Rendered as e.g. "u8[2,1;8,8}".
class ScheduleType {
public:
    enum class Kind { Scalar, Vec, Seq, VecSparse };

    ScheduleType() = default;

    static ScheduleType scalar(DataType t);
    static ScheduleType vec(DataType elem, std::int64_t vw, std::int64_t vh,
                            std::int64_t w, std::int64_t h);
    static ScheduleType seq(ScheduleType inner, std::int64_t w, std::int64_t h);
    static ScheduleType vec_sparse(DataType elem, std::int64_t max_w, std::int64_t max_h);

    bool valid() const { return node_ != nullptr; }
    Kind kind() const { return node_->kind; }
    bool is_sparse() const { return kind() == Kind::VecSparse; }

    const DataType& elem() const { return node_->elem; }       // Scalar/Vec/VecSparse
    const ScheduleType& inner() const { return *node_->inner; } // Seq
    std::int64_t vec_w() const { return node_->vw; }
    std::int64_t vec_h() const { return node_->vh; }
    std::int64_t array_w() const { return node_->w; }
    std::int64_t array_h() const { return node_->h; }

    // Elements moved per transaction at this level (vw*vh for Vec; for Seq,
    // the inner type's value).
    std::int64_t elements_per_transaction() const;

    // Transactions needed for one full frame. For sparse streams this is the
    // worst case (all elements survive) plus the end-of-frame count token.
    std::int64_t total_transactions() const;

    // The data type carried by a single transaction. Vec payloads are always
    // Array2d(elem, vw, vh), including the 1x1 case.
    DataType token_type() const;

    // The data type of a fully assembled frame.
    DataType frame_type() const;

    std::string render() const;

    bool operator==(const ScheduleType& o) const;
    bool operator!=(const ScheduleType& o) const { return !(*this == o); }

private:
    struct Node {
        Kind kind;
        DataType elem;
        std::shared_ptr<const ScheduleType> inner;
        std::int64_t vw = 1, vh = 1, w = 1, h = 1;
    };
    explicit ScheduleType(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

// Throughput requirement at a site, in array elements per cycle. The
// pipeline-level schedule parameter T scaled by the site's SDF rate.
struct ThroughputReq {
    Rat elems_per_cycle;
};

// Picks the cheapest valid vectorization of a 2-D array meeting a required
// throughput: the smallest (vw,vh) with vw | w, vh | h and vw*vh >= req,
// filling width first. Requirements below one element per cycle return a
// 1x1 vector; the deficit is carried as rate R by the caller. Requirements
// above w*h (fully parallel) are unsatisfiable.
ScheduleType optimize_schedule_type(const DataType& base, const ThroughputReq& req);

// True when a (vw,vh) pair satisfying req exists.
bool schedule_satisfiable(const DataType& base, const ThroughputReq& req);

} // namespace hwpc
