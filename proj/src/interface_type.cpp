#include "hwpc/interface_type.hpp"

#include <optional>
#include <stdexcept>

namespace hwpc {

static void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

InterfaceType InterfaceType::static_(ScheduleType s, std::int64_t every_n) {
    require(s.valid(), "static interface needs a schedule type");
    require(every_n >= 1, "everyN must be positive");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Static;
    n->sched = std::move(s);
    n->every_n = every_n;
    return InterfaceType(std::move(n));
}

InterfaceType InterfaceType::stream(ScheduleType s) {
    require(s.valid(), "stream interface needs a schedule type");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Stream;
    n->sched = std::move(s);
    return InterfaceType(std::move(n));
}

InterfaceType InterfaceType::tuple_of_streams(std::vector<InterfaceType> members) {
    require(!members.empty(), "tuple of streams needs members");
    for (const auto& m : members) require(m.is_stream_like(), "tuple-of-streams members must be stream-like");
    auto n = std::make_shared<Node>();
    n->kind = Kind::TupleOfStreams;
    n->members = std::move(members);
    return InterfaceType(std::move(n));
}

InterfaceType InterfaceType::array_of_streams(InterfaceType elem, std::int64_t w, std::int64_t h) {
    require(elem.is_stream_like(), "array-of-streams element must be stream-like");
    require(w >= 1 && h >= 1, "array-of-streams dimensions must be positive");
    auto n = std::make_shared<Node>();
    n->kind = Kind::ArrayOfStreams;
    n->members.push_back(std::move(elem));
    n->w = w;
    n->h = h;
    return InterfaceType(std::move(n));
}

std::string InterfaceType::render() const {
    switch (kind()) {
    case Kind::Static:
        if (node_->every_n == 1) return "Static(" + node_->sched.render() + ")";
        return "Static(" + node_->sched.render() + ")@" + std::to_string(node_->every_n);
    case Kind::Stream:
        return "Stream(" + node_->sched.render() + ")";
    case Kind::TupleOfStreams: {
        std::string s = "(";
        for (size_t i = 0; i < node_->members.size(); ++i) {
            if (i) s += ",";
            s += node_->members[i].render();
        }
        return s + ")";
    }
    case Kind::ArrayOfStreams:
        return node_->members[0].render() + "[" + std::to_string(node_->w) + "," + std::to_string(node_->h) + "]";
    }
    return "?";
}

bool InterfaceType::operator==(const InterfaceType& o) const {
    if (node_ == o.node_) return true;
    if (!node_ || !o.node_) return false;
    if (node_->kind != o.node_->kind) return false;
    switch (node_->kind) {
    case Kind::Static:
        return node_->every_n == o.node_->every_n && node_->sched == o.node_->sched;
    case Kind::Stream:
        return node_->sched == o.node_->sched;
    case Kind::TupleOfStreams:
        if (node_->members.size() != o.node_->members.size()) return false;
        for (size_t i = 0; i < node_->members.size(); ++i)
            if (!(node_->members[i] == o.node_->members[i])) return false;
        return true;
    case Kind::ArrayOfStreams:
        return node_->w == o.node_->w && node_->h == o.node_->h && node_->members[0] == o.node_->members[0];
    }
    return false;
}

Rat RatedInterface::throughput() const {
    if (!iface.valid()) return Rat(0);
    if (iface.kind() == InterfaceType::Kind::Static || iface.kind() == InterfaceType::Kind::Stream)
        return rate * Rat(iface.sched().elements_per_transaction());
    // bundles: members run in lockstep; report per-member element rate
    return RatedInterface{iface.members()[0], rate}.throughput();
}

namespace {

// Flattened view of a vec-like schedule: element type, frame dims, vector width.
struct VecView {
    DataType elem;
    std::int64_t w, h, v;
};

std::optional<VecView> vec_view(const ScheduleType& s) {
    switch (s.kind()) {
    case ScheduleType::Kind::Scalar:
        return VecView{s.elem(), 1, 1, 1};
    case ScheduleType::Kind::Vec:
        return VecView{s.elem(), s.array_w(), s.array_h(), s.vec_w() * s.vec_h()};
    default:
        return std::nullopt; // no conversions through Seq or sparse levels
    }
}

// Schedule of the stream-of-tuples a FanIn of these members would produce.
std::optional<ScheduleType> fanin_result(const std::vector<InterfaceType>& members) {
    std::vector<DataType> elems;
    std::optional<VecView> first;
    for (const auto& m : members) {
        if (m.kind() != InterfaceType::Kind::Stream && m.kind() != InterfaceType::Kind::Static)
            return std::nullopt;
        auto v = vec_view(m.sched());
        if (!v) return std::nullopt;
        if (!first)
            first = v;
        else if (v->w != first->w || v->h != first->h || v->v != first->v)
            return std::nullopt;
        elems.push_back(v->elem);
    }
    if (!first) return std::nullopt;
    if (first->w == 1 && first->h == 1)
        return ScheduleType::scalar(DataType::tuple(elems));
    // members share (vw,vh); rebuild from any member's vec shape
    const auto& ms = members[0].sched();
    return ScheduleType::vec(DataType::tuple(elems), ms.vec_w(), ms.vec_h(), ms.array_w(), ms.array_h());
}

} // namespace

bool can_substitute(const RatedInterface& provided, const RatedInterface& required) {
    if (!provided.iface.valid() || !required.iface.valid()) return false;
    if (provided.iface == required.iface && provided.rate == required.rate) return true;

    const bool p_static = provided.iface.is_static();
    const bool r_static = required.iface.is_static();
    // Back-pressure tolerance cannot be removed.
    if (r_static && !p_static) return false;

    using K = InterfaceType::Kind;
    const K pk = provided.iface.kind();
    const K rk = required.iface.kind();

    // Static -> Stream promotion at identical schedule and rate.
    if (pk == K::Static && rk == K::Stream && provided.iface.sched() == required.iface.sched() &&
        provided.rate == required.rate)
        return true;

    // Serialize / deserialize: same element type and frame, widths traded
    // against rate. Streams accept surplus throughput; statics need an exact
    // match since there is no back-pressure to absorb the excess.
    if ((pk == K::Static || pk == K::Stream) && (rk == K::Static || rk == K::Stream)) {
        auto pv = vec_view(provided.iface.sched());
        auto rv = vec_view(required.iface.sched());
        if (pv && rv && pv->elem == rv->elem && pv->w == rv->w && pv->h == rv->h) {
            if (r_static) return provided.throughput() == required.throughput();
            return provided.throughput() >= required.throughput();
        }
        return false;
    }

    // Fan-in: a tuple of streams can drive a site wanting one stream of tuples.
    if (pk == K::TupleOfStreams && rk == K::Stream) {
        auto merged = fanin_result(provided.iface.members());
        if (merged && can_substitute({InterfaceType::stream(*merged), provided.rate}, required)) return true;
        return false;
    }
    // Fan-out: a stream of tuples can drive a site wanting a tuple of streams.
    if (pk == K::Stream && rk == K::TupleOfStreams) {
        auto merged = fanin_result(required.iface.members());
        if (merged && can_substitute(provided, {InterfaceType::stream(*merged), required.rate})) return true;
        return false;
    }
    if (pk == K::TupleOfStreams && rk == K::TupleOfStreams) {
        const auto& pm = provided.iface.members();
        const auto& rm = required.iface.members();
        if (pm.size() != rm.size()) return false;
        for (size_t i = 0; i < pm.size(); ++i)
            if (!can_substitute({pm[i], provided.rate}, {rm[i], required.rate})) return false;
        return true;
    }
    return false;
}

} // namespace hwpc
