#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hwpc/frontend/ast.hpp"
#include "hwpc/interface_type.hpp"
#include "hwpc/rational.hpp"
#include "hwpc/schedule_type.hpp"
#include "hwpc/value.hpp"

namespace hwpc {

// Hardware generators the mapper can instantiate. Every instance carries the
// full configuration needed to re-simulate it from a netlist.
enum class Gen {
    Source,         // feeds the pipeline input frame
    Sink,           // collects the output frame
    Constant,       // emits a fixed token pattern on schedule
    Pointwise,      // kernel chain applied per payload element
    ZipSync,        // synchronizes n streams, then applies a kernel chain
    FanOut,         // broadcasts one stream to n consumers
    LineBuffer,     // image stream to stencil-window stream
    Regrid,         // pad / crop / downsample: scan-order position remapping
    Serialize,      // one wide token to `factor` narrow tokens
    Deserialize,    // `factor` narrow tokens to one wide token
    ReduceTree,     // fully-parallel reduction of each payload element
    ReduceVec,      // chunk-serial reduction across `chunks_per_group` tokens
    Filter,         // dense (value,bool) stream to sparse element stream
    SparsePointwise,// kernel chain over sparse element tokens
    StaticToStream, // interface promotion register
};

const char* gen_name(Gen g);
Gen gen_from_name(const std::string& name);

// One-size configuration record; generators read the fields they need.
struct GenConfig {
    std::vector<OpRef> chain;      // pointwise kernels, applied in order per element
    OpRef reduce_fn;               // ReduceTree / ReduceVec
    std::int64_t group_elems = 0;  // elements combined per reduction result
    std::int64_t chunks_per_group = 1;
    // line buffer geometry (window offsets are signed, out-of-bounds taps are zero)
    std::int64_t img_w = 0, img_h = 0;
    std::int64_t win_l = 0, win_r = 0, win_b = 0, win_t = 0;
    // regrid: output scan position -> input scan position, -1 for zero fill
    std::int64_t in_w = 0, in_h = 0, out_w = 0, out_h = 0;
    std::string regrid_kind;                  // "pad" | "crop" | "downsample"
    std::vector<std::int64_t> regrid_params;  // l,r,b,t or sx,sy
    std::int64_t factor = 1;                  // serialize / deserialize / fan-out width
    std::vector<Value> pattern;               // constant token cycle
    DataType elem_type;                       // element carried by this instance
};

struct PortSpec {
    ScheduleType sched;
    bool is_stream = true;
    Rat rate{1};

    RatedInterface rated(std::int64_t every_n = 1) const {
        return {is_stream ? InterfaceType::stream(sched) : InterfaceType::static_(sched, every_n), rate};
    }
};

// A mapped IR node: a generator instance with schedule annotations.
struct ModuleInstance {
    Gen gen = Gen::Pointwise;
    std::string name;
    GenConfig config;
    std::vector<PortSpec> in;
    std::vector<PortSpec> out;
    Rat rate{1};                  // output rate (port 0)
    std::int64_t latency = 1;     // cycles from consuming to producing a token
    std::int64_t burst = 0;       // max excess over the model trace
    bool data_dependent = false;
    bool burst_annotated = true;
};

struct PortRef {
    int node = -1;
    int port = 0;
    bool operator==(const PortRef& o) const { return node == o.node && port == o.port; }
};

struct Channel {
    PortRef from, to;
    ScheduleType sched;
    bool is_stream = true;
    Rat rate{1};
    std::int64_t fifo_depth = 0; // storage beyond the producer's output register
    std::int64_t token_bits = 0;
};

// The lowered design: a DAG of module instances over handshake channels.
struct MappedGraph {
    std::vector<ModuleInstance> nodes;
    std::vector<Channel> channels;
    bool static_mode = false;
    Rat throughput{1};
    std::int64_t total_latency = 0; // solved start delay of the sink
    int source = -1, sink = -1;
    std::shared_ptr<const Program> library; // user functions referenced by kernels

    int add(ModuleInstance inst) {
        nodes.push_back(std::move(inst));
        return (int)nodes.size() - 1;
    }
    int connect(PortRef from, PortRef to) {
        const PortSpec& p = nodes[from.node].out[from.port];
        channels.push_back({from, to, p.sched, p.is_stream, p.rate, 0, p.sched.token_type().bit_width()});
        return (int)channels.size() - 1;
    }
    std::vector<int> in_channels(int node) const;
    std::vector<int> out_channels(int node) const;
    std::vector<int> topo_order() const; // throws on cycles
};

// Splits a frame value into the transaction sequence of a schedule
// (chunk-major, row-major within chunks); `assemble` is its inverse.
// Sparse frames become (value, position) tuples; the end-of-frame count
// token is handled by the simulator, not here.
std::vector<Value> disassemble(const Value& frame, const ScheduleType& sched);
Value assemble(const std::vector<Value>& tokens, const ScheduleType& sched);

} // namespace hwpc
