#include "hwpc/sdf.hpp"

#include <algorithm>

#include "hwpc/frontend/ops.hpp"

namespace hwpc {

Rat frame_elements(const DataType& t) {
    switch (t.kind()) {
    case DataType::Kind::Array2d:
    case DataType::Kind::SparseArray2d:
        return Rat(t.width() * t.height());
    case DataType::Kind::Tuple:
        return frame_elements(t.members()[0]);
    default:
        return Rat(1);
    }
}

namespace {

// Ops that consume every member of a tuple in lockstep.
bool synchronizing(const std::string& name) {
    if (name == "Zip" || name == "FanIn" || name == "Pack") return true;
    const OpInfo* info = find_op(name);
    return info && info->scalar_kernel && info->variadic_input;
}

} // namespace

RateMap propagate_rates(const Program& prog, const UserFunction& fn, Rat input_rate) {
    (void)prog;
    RateMap out;
    const size_t n = fn.nodes.size();
    out.flow.assign(n, Rat(0));
    out.rate.assign(n, Rat(0));

    // Flows follow directly from the frame geometry of each node's type;
    // every operator's token ratio is its output/input element ratio.
    for (size_t i = 0; i < n; ++i) {
        const FNode& nd = fn.nodes[i];
        if (!nd.type.valid()) {
            out.diagnostics.push_back({"rate propagation needs a typed graph", nd.loc});
            return out;
        }
        out.flow[i] = frame_elements(nd.type);
    }

    // Synchronizing joins need equal flows on every incoming member.
    for (size_t i = 0; i < n; ++i) {
        const FNode& nd = fn.nodes[i];
        if (nd.kind != FNode::Kind::Apply || !synchronizing(nd.op.name)) continue;
        const FNode& arg = fn.nodes[nd.args[0]];
        if (arg.kind != FNode::Kind::Concat) continue;
        for (size_t m = 1; m < arg.args.size(); ++m) {
            const Rat a = out.flow[arg.args[0]];
            const Rat b = out.flow[arg.args[m]];
            if (a != b)
                out.diagnostics.push_back(
                    {"inconsistent rates at " + nd.op.name + ": edge from node " +
                         std::to_string(arg.args[0]) + " flows " + to_string(a) + " but edge from node " +
                         std::to_string(arg.args[m]) + " flows " + to_string(b),
                     nd.loc});
        }
    }
    if (!out.diagnostics.empty()) return out;

    for (size_t i = 0; i < n; ++i) out.max_flow = std::max(out.max_flow, out.flow[i]);

    // Normalize: the busiest edge gets rate = input_rate capped at 1.
    const Rat in_flow = out.flow[fn.input_node];
    Rat busiest = input_rate * out.max_flow / in_flow;
    Rat scale = busiest > Rat(1) ? Rat(1) / out.max_flow : input_rate / in_flow;
    for (size_t i = 0; i < n; ++i) out.rate[i] = out.flow[i] * scale;
    return out;
}

Rat site_requirement(const RateMap& rates, const UserFunction& fn, int node, Rat t) {
    return t * rates.flow[node] / rates.flow[fn.input_node];
}

} // namespace hwpc
