#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hwpc/rational.hpp"
#include "hwpc/schedule_type.hpp"

namespace hwpc {

// Signaling contract of a port.
//
//   Static(S, everyN)   a valid transaction exactly once every everyN cycles,
//                       no back-pressure
//   Stream(S)           ready-valid handshake; transactions may be delayed
//                       and back-pressured arbitrarily
//   TupleOfStreams      independent member streams bundled as one value
//   ArrayOfStreams      w*h homogeneous member streams
class InterfaceType {
public:
    enum class Kind { Static, Stream, TupleOfStreams, ArrayOfStreams };

    InterfaceType() = default;

    static InterfaceType static_(ScheduleType s, std::int64_t every_n = 1);
    static InterfaceType stream(ScheduleType s);
    static InterfaceType tuple_of_streams(std::vector<InterfaceType> members);
    static InterfaceType array_of_streams(InterfaceType elem, std::int64_t w, std::int64_t h);

    bool valid() const { return node_ != nullptr; }
    Kind kind() const { return node_->kind; }
    bool is_static() const { return kind() == Kind::Static; }
    bool is_stream_like() const { return kind() != Kind::Static; }

    const ScheduleType& sched() const { return node_->sched; }
    std::int64_t every_n() const { return node_->every_n; }
    const std::vector<InterfaceType>& members() const { return node_->members; }
    std::int64_t width() const { return node_->w; }
    std::int64_t height() const { return node_->h; }

    std::string render() const;

    bool operator==(const InterfaceType& o) const;
    bool operator!=(const InterfaceType& o) const { return !(*this == o); }

private:
    struct Node {
        Kind kind;
        ScheduleType sched;
        std::int64_t every_n = 1;
        std::vector<InterfaceType> members;
        std::int64_t w = 0, h = 0;
    };
    explicit InterfaceType(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

// An interface together with the rate it runs at: what a port actually
// offers or needs.
struct RatedInterface {
    InterfaceType iface;
    Rat rate{1};

    // Elements per cycle this interface moves.
    Rat throughput() const;
};

// "Meets or exceeds": true when `provided` can drive a site requiring
// `required`, either exactly or through the fixed conversion set
// (static-to-stream promotion, serialize/deserialize width-rate tradeoffs,
// fan-in/fan-out between stream bundles and streams of tuples).
bool can_substitute(const RatedInterface& provided, const RatedInterface& required);

} // namespace hwpc
