#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hwpc/rational.hpp"

namespace hwpc {

// Latency-matching as register minimization. Every node consumes on a model
// trace with start delay s and produces s + L later; for each edge the
// consumer start must be c = p + L_p + d with FIFO depth d >= 0, minimizing
// total buffered bits sum(d * token_bits).
struct BufferNode {
    std::int64_t latency = 0;
    Rat rate{1};
    std::int64_t burst = 0;
    bool data_dependent = false;
    bool burst_annotated = true;
    std::string name;
};

struct BufferEdge {
    int producer = 0;
    int consumer = 0;
    std::int64_t token_bits = 1;
};

struct BufferProblem {
    std::vector<BufferNode> nodes;
    std::vector<BufferEdge> edges;
};

struct BufferSolution {
    std::vector<std::int64_t> start_delay; // per node
    std::vector<std::int64_t> depth;       // per edge
    std::int64_t total_bits = 0;
};

// Exact-rational simplex on the difference-constraint LP. The constraint
// matrix is totally unimodular, so the vertex optimum is integral; extraction
// asserts it.
BufferSolution solve_buffers(const BufferProblem& p);

// Independent route: reduction to min-cost flow (successive shortest paths),
// delays recovered from the residual potentials. Must agree with
// solve_buffers bit for bit on the objective.
BufferSolution solve_buffers_via_mincost_flow(const BufferProblem& p);

// Extra FIFO depth that isolates a node's bursts: the downstream sees the
// ideal model trace once the edge FIFO grows by B. Data-dependent nodes must
// carry an explicit annotation.
std::int64_t burst_pad(const BufferNode& n);

// Adds burst padding for every producer onto its out-edges (in place).
void apply_burst_padding(const BufferProblem& p, BufferSolution& s);

} // namespace hwpc
