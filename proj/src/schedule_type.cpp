#include "hwpc/schedule_type.hpp"

#include <stdexcept>

namespace hwpc {

static void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

ScheduleType ScheduleType::scalar(DataType t) {
    require(t.valid(), "scalar schedule needs a data type");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Scalar;
    n->elem = std::move(t);
    return ScheduleType(std::move(n));
}

ScheduleType ScheduleType::vec(DataType elem, std::int64_t vw, std::int64_t vh,
                               std::int64_t w, std::int64_t h) {
    require(elem.valid(), "vec schedule needs an element type");
    require(vw >= 1 && vh >= 1 && w >= 1 && h >= 1, "vec dimensions must be positive");
    require(w % vw == 0 && h % vh == 0, "vector width must divide the array size");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Vec;
    n->elem = std::move(elem);
    n->vw = vw;
    n->vh = vh;
    n->w = w;
    n->h = h;
    return ScheduleType(std::move(n));
}

ScheduleType ScheduleType::seq(ScheduleType inner, std::int64_t w, std::int64_t h) {
    require(inner.valid(), "seq schedule needs an inner schedule");
    require(w >= 1 && h >= 1, "seq dimensions must be positive");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Seq;
    n->inner = std::make_shared<const ScheduleType>(std::move(inner));
    n->w = w;
    n->h = h;
    return ScheduleType(std::move(n));
}

ScheduleType ScheduleType::vec_sparse(DataType elem, std::int64_t max_w, std::int64_t max_h) {
    require(elem.valid(), "sparse vec schedule needs an element type");
    require(max_w >= 1 && max_h >= 1, "sparse bounds must be positive");
    auto n = std::make_shared<Node>();
    n->kind = Kind::VecSparse;
    n->elem = std::move(elem);
    n->w = max_w;
    n->h = max_h;
    return ScheduleType(std::move(n));
}

std::int64_t ScheduleType::elements_per_transaction() const {
    switch (kind()) {
    case Kind::Scalar: return 1;
    case Kind::Vec: return node_->vw * node_->vh;
    case Kind::Seq: return inner().elements_per_transaction();
    case Kind::VecSparse: return 1;
    }
    return 1;
}

std::int64_t ScheduleType::total_transactions() const {
    switch (kind()) {
    case Kind::Scalar: return 1;
    case Kind::Vec: return (node_->w / node_->vw) * (node_->h / node_->vh);
    case Kind::Seq: return node_->w * node_->h * inner().total_transactions();
    case Kind::VecSparse: return node_->w * node_->h + 1; // worst case + end-of-frame
    }
    return 1;
}

DataType ScheduleType::token_type() const {
    switch (kind()) {
    case Kind::Scalar: return node_->elem;
    case Kind::Vec: return DataType::array2d(node_->elem, node_->vw, node_->vh);
    case Kind::Seq: return inner().token_type();
    case Kind::VecSparse:
        // element plus its linear scan-order position
        return DataType::tuple({node_->elem, DataType::uint_fp(count_field_bits(node_->w * node_->h - 1))});
    }
    return {};
}

DataType ScheduleType::frame_type() const {
    switch (kind()) {
    case Kind::Scalar: return node_->elem;
    case Kind::Vec: return DataType::array2d(node_->elem, node_->w, node_->h);
    case Kind::Seq: return DataType::array2d(inner().frame_type(), node_->w, node_->h);
    case Kind::VecSparse: return DataType::sparse_array2d(node_->elem, node_->w, node_->h);
    }
    return {};
}

std::string ScheduleType::render() const {
    switch (kind()) {
    case Kind::Scalar:
        return node_->elem.render();
    case Kind::Vec:
        return node_->elem.render() + "[" + std::to_string(node_->vw) + "," + std::to_string(node_->vh) +
               ";" + std::to_string(node_->w) + "," + std::to_string(node_->h) + "}";
    case Kind::Seq:
        return inner().render() + "{" + std::to_string(node_->w) + "," + std::to_string(node_->h) + "}";
    case Kind::VecSparse:
        return node_->elem.render() + "[1,1;<=" + std::to_string(node_->w) + "," + std::to_string(node_->h) + "}";
    }
    return "?";
}

bool ScheduleType::operator==(const ScheduleType& o) const {
    if (node_ == o.node_) return true;
    if (!node_ || !o.node_) return false;
    if (node_->kind != o.node_->kind) return false;
    switch (node_->kind) {
    case Kind::Scalar:
        return node_->elem == o.node_->elem;
    case Kind::Vec:
        return node_->elem == o.node_->elem && node_->vw == o.node_->vw && node_->vh == o.node_->vh &&
               node_->w == o.node_->w && node_->h == o.node_->h;
    case Kind::Seq:
        return node_->w == o.node_->w && node_->h == o.node_->h && inner() == o.inner();
    case Kind::VecSparse:
        return node_->elem == o.node_->elem && node_->w == o.node_->w && node_->h == o.node_->h;
    }
    return false;
}

static std::int64_t smallest_divisor_at_least(std::int64_t n, std::int64_t lo) {
    for (std::int64_t d = lo; d <= n; ++d)
        if (n % d == 0) return d;
    return n;
}

bool schedule_satisfiable(const DataType& base, const ThroughputReq& req) {
    if (!base.is_array()) return false;
    if (req.elems_per_cycle <= Rat(0)) return false;
    return req.elems_per_cycle <= Rat(base.width() * base.height());
}

ScheduleType optimize_schedule_type(const DataType& base, const ThroughputReq& req) {
    if (!base.is_array())
        throw std::invalid_argument("optimize_schedule_type: base must be a 2-D array, got " + base.render());
    if (req.elems_per_cycle <= Rat(0))
        throw std::invalid_argument("optimize_schedule_type: throughput requirement must be positive");
    const std::int64_t w = base.width(), h = base.height();
    const Rat need = req.elems_per_cycle;
    if (need > Rat(w * h))
        throw std::invalid_argument("requested throughput " + to_string(need) +
                                    " exceeds fully-parallel maximum " + std::to_string(w * h) +
                                    " for " + base.render());
    std::int64_t vw = 1, vh = 1;
    if (need > Rat(1)) {
        const std::int64_t need_i = rat_ceil(need);
        if (need_i <= w) {
            vw = smallest_divisor_at_least(w, need_i);
        } else {
            vw = w;
            vh = smallest_divisor_at_least(h, rat_ceil(need / w));
        }
    }
    return ScheduleType::vec(base.elem(), vw, vh, w, h);
}

} // namespace hwpc
