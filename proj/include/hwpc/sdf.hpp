#pragma once

#include <vector>

#include "hwpc/frontend/ast.hpp"
#include "hwpc/rational.hpp"

namespace hwpc {

// Per-node rate annotations for one function graph. Token flows are relative
// elements-per-frame counts fixed by the types; rates are flows normalized so
// the busiest edge runs at one transaction per cycle at most.
struct RateMap {
    std::vector<Rat> flow;  // elements per frame on each node's output, relative
    std::vector<Rat> rate;  // normalized utilization of each node's output edge
    Rat max_flow{0};        // flow of the busiest edge
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return diagnostics.empty(); }
};

// Relative elements-per-frame of a value of this type (outer array size;
// tuples report their first member; sparse arrays their worst case).
Rat frame_elements(const DataType& t);

// Walks a validated graph and annotates every edge with its SDF rate.
// Ratios compose by multiplication along paths. Synchronizing joins
// (Zip, FanIn, Pack, pointwise kernels over concatenated operands) must see
// equal flows on every member; violations are reported as diagnostics naming
// both edges. Rates are scaled so the maximum equals min(1, input_rate
// adjusted); deficits belong to the caller as vector-width requirements.
RateMap propagate_rates(const Program& prog, const UserFunction& fn, Rat input_rate = Rat(1));

// Required site throughput in elements per cycle at `node`, for a pipeline
// driven at `t` input elements per cycle.
Rat site_requirement(const RateMap& rates, const UserFunction& fn, int node, Rat t);

} // namespace hwpc
