#pragma once

// Test-only oracles for the buffer solver: exhaustive branch-and-bound search
// over integer start delays, and a deterministic random-DAG generator.
// Independent of the solver implementations.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "hwpc/buffers.hpp"

namespace hwpc_test {

// Minimum total buffered bits over all feasible integer delay assignments.
// Slack beyond the sum of latencies can never help, which bounds the search.
inline std::int64_t exhaustive_min_bits(const hwpc::BufferProblem& p) {
    const int n = (int)p.nodes.size();
    std::vector<std::vector<int>> out_edges(n);
    std::vector<std::vector<int>> in_edges(n);
    for (int e = 0; e < (int)p.edges.size(); ++e) {
        out_edges[p.edges[e].producer].push_back(e);
        in_edges[p.edges[e].consumer].push_back(e);
    }
    // topological order (nodes are created producer-before-consumer in tests)
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;

    std::int64_t slack_cap = 1;
    for (const auto& nd : p.nodes) slack_cap += nd.latency;

    std::vector<std::int64_t> delay(n, 0);
    std::int64_t best = std::numeric_limits<std::int64_t>::max();

    // seed with the as-soon-as-possible schedule
    {
        std::int64_t total = 0;
        for (int v : order) {
            std::int64_t lb = 0;
            for (int e : in_edges[v])
                lb = std::max(lb, delay[p.edges[e].producer] + p.nodes[p.edges[e].producer].latency);
            delay[v] = lb;
            for (int e : in_edges[v])
                total += (delay[v] - delay[p.edges[e].producer] - p.nodes[p.edges[e].producer].latency) *
                         p.edges[e].token_bits;
        }
        best = total;
    }

    std::function<void(int, std::int64_t)> rec = [&](int idx, std::int64_t cost) {
        if (cost >= best) return;
        if (idx == n) {
            best = cost;
            return;
        }
        const int v = order[idx];
        std::int64_t lb = 0;
        for (int e : in_edges[v])
            lb = std::max(lb, delay[p.edges[e].producer] + p.nodes[p.edges[e].producer].latency);
        for (std::int64_t s = lb; s <= lb + slack_cap; ++s) {
            delay[v] = s;
            std::int64_t add = 0;
            for (int e : in_edges[v])
                add += (s - delay[p.edges[e].producer] - p.nodes[p.edges[e].producer].latency) *
                       p.edges[e].token_bits;
            rec(idx + 1, cost + add);
        }
    };
    rec(0, 0);
    return best;
}

struct XorShift {
    std::uint64_t s;
    explicit XorShift(std::uint64_t seed) : s(seed * 2654435761u + 1) {}
    std::uint64_t next() {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        return s;
    }
    std::int64_t range(std::int64_t lo, std::int64_t hi) { return lo + (std::int64_t)(next() % (hi - lo + 1)); }
};

// Random connected DAG with topological node numbering.
inline hwpc::BufferProblem random_dag(int n, std::uint64_t seed, std::int64_t max_latency = 10) {
    XorShift rng(seed);
    hwpc::BufferProblem p;
    for (int i = 0; i < n; ++i) p.nodes.push_back({rng.range(0, max_latency), hwpc::Rat(1), 0, false, true, ""});
    for (int v = 1; v < n; ++v) {
        // at least one incoming edge keeps it connected
        int from = (int)rng.range(0, v - 1);
        p.edges.push_back({from, v, rng.range(0, 1) ? 32 : 8});
        for (int u = 0; u < v; ++u)
            if (u != from && rng.range(0, 3) == 0) p.edges.push_back({u, v, rng.range(0, 1) ? 32 : 8});
    }
    return p;
}

} // namespace hwpc_test
