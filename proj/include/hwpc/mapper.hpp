#pragma once

#include <map>
#include <memory>
#include <string>

#include "hwpc/buffers.hpp"
#include "hwpc/ir.hpp"
#include "hwpc/sdf.hpp"

namespace hwpc {

enum class TopInterface { Static, Stream };

// Pre-mapping probe: drive a static variant of the input through the
// operator set; the pipeline stays Static only if every site can return a
// static instance (no decimation, bursts, or data dependence, and every edge
// utilization is a unit fraction). Stream is the universal fallback.
TopInterface solve_top_interface(const Program& prog, const UserFunction& fn, Rat throughput);

struct MapOptions {
    Rat throughput{1};
    bool explain = false;
    // manual FIFO depth overrides keyed by channel name "<producer>-><consumer>"
    std::map<std::string, std::int64_t> manual_fifo;
};

struct BufferReport {
    std::vector<std::int64_t> channel_depth;
    std::vector<std::int64_t> node_delay;
    std::int64_t total_bits = 0;
};

struct MapResult {
    MappedGraph graph;
    BufferReport buffers;
    std::vector<std::string> explain;
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return diagnostics.empty(); }
};

// Lowers a validated function to the instance graph: solves the top-level
// interface, runs every operator's mapping function against its site
// requirement, inserts interface conversions, and allocates FIFOs.
MapResult map_pipeline(std::shared_ptr<const Program> prog, const std::string& fn_name, const MapOptions& opts);

// Recursive mapping of a user function at a given input schedule; the
// instances of the function body composed behind source/sink endpoints.
MapResult specialize(std::shared_ptr<const Program> prog, const std::string& fn_name, Rat throughput);

// Resolves interface mismatches on every channel using only the fixed
// conversion set {fan-in, fan-out, serialize, deserialize, static-to-stream}.
// Returns the number of conversions inserted; running it twice is a no-op.
int insert_conversions(MappedGraph& g);

// FIFO allocation over the mapped graph: register-minimization solve plus
// burst padding, then manual overrides. Fills channel depths and the solved
// total latency.
BufferReport allocate_buffers(MappedGraph& g, const std::map<std::string, std::int64_t>& manual = {});

// Channel label used in reports and manual overrides.
std::string channel_label(const MappedGraph& g, int channel);

} // namespace hwpc
