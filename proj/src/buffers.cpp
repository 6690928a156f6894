#include "hwpc/buffers.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <algorithm>
#include <limits>
#include <stdexcept>

namespace hwpc {

namespace {

using Exact = boost::multiprecision::cpp_rational;

// Dense two-phase simplex with Bland's rule over exact rationals.
// min c.x  s.t.  A.x >= b, x >= 0.
class Simplex {
public:
    Simplex(int nvars, const std::vector<std::vector<Exact>>& a, const std::vector<Exact>& b,
            const std::vector<Exact>& c)
        : n_(nvars), m_((int)a.size()) {
        // columns: x(n) | surplus(m) | artificial(m) | rhs
        cols_ = n_ + 2 * m_;
        t_.assign(m_, std::vector<Exact>(cols_ + 1, 0));
        basis_.resize(m_);
        for (int i = 0; i < m_; ++i) {
            for (int j = 0; j < n_; ++j) t_[i][j] = a[i][j];
            t_[i][n_ + i] = -1;          // surplus
            t_[i][n_ + m_ + i] = 1;      // artificial
            t_[i][cols_] = b[i];         // b >= 0 by construction here
            basis_[i] = n_ + m_ + i;
        }
        // phase 1: minimize sum of artificials
        std::vector<Exact> phase1(cols_, 0);
        for (int j = n_ + m_; j < cols_; ++j) phase1[j] = 1;
        run(phase1, /*ban_artificials=*/false);
        Exact art = objective(phase1);
        if (art != 0) throw std::runtime_error("buffer solve infeasible (is the graph acyclic?)");
        // phase 2: original objective, artificials banned
        std::vector<Exact> full(cols_, 0);
        for (int j = 0; j < n_; ++j) full[j] = c[j];
        run(full, /*ban_artificials=*/true);
        value_.assign(n_, 0);
        for (int i = 0; i < m_; ++i)
            if (basis_[i] < n_) value_[basis_[i]] = t_[i][cols_];
    }

    const std::vector<Exact>& solution() const { return value_; }

private:
    Exact objective(const std::vector<Exact>& c) const {
        Exact v = 0;
        for (int i = 0; i < m_; ++i) v += c[basis_[i]] * t_[i][cols_];
        return v;
    }

    void run(const std::vector<Exact>& c, bool ban_artificials) {
        const int limit = ban_artificials ? n_ + m_ : cols_;
        for (;;) {
            // reduced costs from scratch; the tableaus here are tiny
            int enter = -1;
            for (int j = 0; j < limit && enter < 0; ++j) {
                Exact r = c[j];
                for (int i = 0; i < m_; ++i) r -= c[basis_[i]] * t_[i][j];
                if (r < 0) enter = j; // Bland: first improving column
            }
            if (enter < 0) return;
            int leave = -1;
            Exact best = 0;
            for (int i = 0; i < m_; ++i) {
                if (t_[i][enter] <= 0) continue;
                Exact ratio = t_[i][cols_] / t_[i][enter];
                if (leave < 0 || ratio < best || (ratio == best && basis_[i] < basis_[leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave < 0) throw std::runtime_error("buffer solve unbounded");
            pivot(leave, enter);
        }
    }

    void pivot(int row, int col) {
        Exact piv = t_[row][col];
        for (int j = 0; j <= cols_; ++j) t_[row][j] /= piv;
        for (int i = 0; i < m_; ++i) {
            if (i == row || t_[i][col] == 0) continue;
            Exact f = t_[i][col];
            for (int j = 0; j <= cols_; ++j) t_[i][j] -= f * t_[row][j];
        }
        basis_[row] = col;
    }

    int n_, m_, cols_;
    std::vector<std::vector<Exact>> t_;
    std::vector<int> basis_;
    std::vector<Exact> value_;
};

BufferSolution extract(const BufferProblem& p, std::vector<std::int64_t> delays) {
    // smallest delays start at zero
    std::int64_t lo = 0;
    if (!delays.empty()) lo = *std::min_element(delays.begin(), delays.end());
    for (auto& d : delays) d -= lo;
    BufferSolution s;
    s.start_delay = std::move(delays);
    s.depth.reserve(p.edges.size());
    for (const auto& e : p.edges) {
        const std::int64_t d =
            s.start_delay[e.consumer] - s.start_delay[e.producer] - p.nodes[e.producer].latency;
        if (d < 0) throw std::runtime_error("buffer solve produced a negative depth");
        s.depth.push_back(d);
        s.total_bits += d * e.token_bits;
    }
    return s;
}

} // namespace

BufferSolution solve_buffers(const BufferProblem& p) {
    const int n = (int)p.nodes.size();
    const int m = (int)p.edges.size();
    if (m == 0) return extract(p, std::vector<std::int64_t>(n, 0));

    std::vector<std::vector<Exact>> a(m, std::vector<Exact>(n, 0));
    std::vector<Exact> b(m), c(n, 0);
    for (int e = 0; e < m; ++e) {
        a[e][p.edges[e].consumer] += 1;
        a[e][p.edges[e].producer] -= 1;
        b[e] = p.nodes[p.edges[e].producer].latency;
        // objective sum(d*b) = sum over edges of (s_c - s_p - L) * bits
        c[p.edges[e].consumer] += p.edges[e].token_bits;
        c[p.edges[e].producer] -= p.edges[e].token_bits;
    }
    Simplex lp(n, a, b, c);
    std::vector<std::int64_t> delays(n);
    for (int v = 0; v < n; ++v) {
        const Exact& x = lp.solution()[v];
        if (denominator(x) != 1)
            throw std::runtime_error("difference-constraint LP returned a fractional vertex");
        delays[v] = (std::int64_t)numerator(x);
    }
    return extract(p, std::move(delays));
}

namespace {

struct FlowArc {
    int to;
    std::int64_t cap;
    std::int64_t cost;
    int rev;
};

class FlowNet {
public:
    explicit FlowNet(int n) : g_(n) {}

    void add(int from, int to, std::int64_t cap, std::int64_t cost) {
        g_[from].push_back({to, cap, cost, (int)g_[to].size()});
        g_[to].push_back({from, 0, -cost, (int)g_[from].size() - 1});
    }

    // successive shortest paths with Bellman-Ford (costs may be negative,
    // the underlying DAG has no cycles)
    void push_all(int s, int t, std::int64_t need) {
        const std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;
        while (need > 0) {
            const int n = (int)g_.size();
            std::vector<std::int64_t> dist(n, inf);
            std::vector<int> pv(n, -1), pe(n, -1);
            dist[s] = 0;
            for (int round = 0; round < n; ++round) {
                bool changed = false;
                for (int v = 0; v < n; ++v) {
                    if (dist[v] == inf) continue;
                    for (int i = 0; i < (int)g_[v].size(); ++i) {
                        const FlowArc& a = g_[v][i];
                        if (a.cap > 0 && dist[v] + a.cost < dist[a.to]) {
                            dist[a.to] = dist[v] + a.cost;
                            pv[a.to] = v;
                            pe[a.to] = i;
                            changed = true;
                        }
                    }
                }
                if (!changed) break;
            }
            if (dist[t] == inf) throw std::runtime_error("min-cost flow: demand unroutable (cyclic graph?)");
            std::int64_t push = need;
            for (int v = t; v != s; v = pv[v]) push = std::min(push, g_[pv[v]][pe[v]].cap);
            for (int v = t; v != s; v = pv[v]) {
                FlowArc& a = g_[pv[v]][pe[v]];
                a.cap -= push;
                g_[v][a.rev].cap += push;
            }
            need -= push;
        }
    }

    // shortest distances from a virtual root at 0 over the residual network;
    // these are optimal dual potentials once no augmenting path remains
    std::vector<std::int64_t> residual_potentials() const {
        const int n = (int)g_.size();
        std::vector<std::int64_t> dist(n, 0);
        for (int round = 0; round <= n; ++round) {
            bool changed = false;
            for (int v = 0; v < n; ++v)
                for (const FlowArc& a : g_[v])
                    if (a.cap > 0 && dist[v] + a.cost < dist[a.to]) {
                        dist[a.to] = dist[v] + a.cost;
                        changed = true;
                    }
            if (!changed) return dist;
        }
        throw std::runtime_error("min-cost flow: negative residual cycle");
    }

private:
    std::vector<std::vector<FlowArc>> g_;
};

} // namespace

BufferSolution solve_buffers_via_mincost_flow(const BufferProblem& p) {
    const int n = (int)p.nodes.size();
    if (p.edges.empty()) return extract(p, std::vector<std::int64_t>(n, 0));

    // Dual of the LP: route node imbalances (bit-weighted degrees) through the
    // graph arcs at cost -latency.
    const std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 8;
    FlowNet net(n + 2);
    const int src = n, dst = n + 1;
    std::vector<std::int64_t> w(n, 0);
    for (const auto& e : p.edges) {
        w[e.consumer] += e.token_bits;
        w[e.producer] -= e.token_bits;
        net.add(e.producer, e.consumer, inf, -p.nodes[e.producer].latency);
    }
    std::int64_t need = 0;
    for (int v = 0; v < n; ++v) {
        if (w[v] < 0) net.add(src, v, -w[v], 0);
        if (w[v] > 0) {
            net.add(v, dst, w[v], 0);
            need += w[v];
        }
    }
    net.push_all(src, dst, need);
    auto pot = net.residual_potentials();
    std::vector<std::int64_t> delays(n);
    for (int v = 0; v < n; ++v) delays[v] = -pot[v];
    return extract(p, std::move(delays));
}

std::int64_t burst_pad(const BufferNode& n) {
    if (n.data_dependent && !n.burst_annotated)
        throw std::runtime_error("node '" + n.name +
                                 "' has data-dependent bursts and needs an explicit (L,B) annotation");
    return n.burst;
}

void apply_burst_padding(const BufferProblem& p, BufferSolution& s) {
    for (size_t e = 0; e < p.edges.size(); ++e) {
        const std::int64_t extra = burst_pad(p.nodes[p.edges[e].producer]);
        s.depth[e] += extra;
        s.total_bits += extra * p.edges[e].token_bits;
    }
}

} // namespace hwpc
