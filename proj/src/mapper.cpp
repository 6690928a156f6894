#include "hwpc/mapper.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <optional>
#include <set>

#include "hwpc/frontend/ops.hpp"
#include "hwpc/interp.hpp"
#include "hwpc/sim.hpp"

namespace hwpc {

namespace {

bool op_zero_latency(const OpRef& op);

// Pipeline-stage class of a kernel: 0 for pure wiring, 1 for a registered
// arithmetic stage.
int kernel_stage(const OpRef& op) { return op_zero_latency(op) ? 0 : 1; }

bool op_zero_latency(const OpRef& op) {
    const OpInfo* info = find_op(op.name);
    if (!info) return false; // user functions are registered conservatively
    if (op.name == "Map") return op_zero_latency(op.op_param(0));
    // patch-level geometry is wiring when applied inside a token
    if (op.name == "Crop" || op.name == "Pad" || op.name == "Stencil" || op.name == "Downsample" ||
        op.name == "Zip" || op.name == "Pack" || op.name == "FanIn")
        return true;
    return info->zero_latency;
}

// Ops whose stream form needs a ready-valid interface no matter what.
bool needs_stream(const std::string& op) {
    return op == "Pad" || op == "Crop" || op == "Downsample" || op == "Filter";
}

std::int64_t chain_latency(const std::vector<OpRef>& chain) {
    std::int64_t total = 0;
    for (const auto& op : chain) total += kernel_stage(op);
    return std::max<std::int64_t>(total, 1);
}

// Latency estimate for a behavioral (unflattened) user-function kernel:
// registered stages along the body plus tree depths of its reductions.
std::int64_t estimate_fn_latency(const Program& prog, const UserFunction& fn) {
    std::int64_t total = 1;
    for (const auto& nd : fn.nodes) {
        if (nd.kind != FNode::Kind::Apply) continue;
        if (nd.op.name == "Reduce") {
            const DataType& t = nd.type; // element type; input array length from arg
            (void)t;
            const FNode& arg = fn.nodes[nd.args[0]];
            std::int64_t n = arg.type.is_array() ? arg.type.width() * arg.type.height() : 2;
            std::int64_t levels = 1;
            while ((std::int64_t(1) << levels) < n) ++levels;
            total += levels * (1 + kernel_stage(nd.op.op_param(0)));
        } else if (!op_zero_latency(nd.op)) {
            const UserFunction* sub = prog.find(nd.op.name);
            total += sub ? estimate_fn_latency(prog, *sub) : 1;
        }
    }
    return total;
}

struct BodyInfo {
    bool flattenable = true;
    bool chunkable = true;
    std::int64_t geom_w = 0, geom_h = 0; // uniform window geometry
};

BodyInfo analyze_body(const Program& prog, const UserFunction& fn) {
    BodyInfo info;
    if (fn.input_type.is_array()) {
        info.geom_w = fn.input_type.width();
        info.geom_h = fn.input_type.height();
    } else {
        info.chunkable = false;
    }
    for (const auto& nd : fn.nodes) {
        if (nd.kind == FNode::Kind::Input || nd.kind == FNode::Kind::Concat) continue;
        if (nd.kind == FNode::Kind::Const) {
            info.chunkable = false; // constants ride whole tokens
            continue;
        }
        const std::string& n = nd.op.name;
        if (n == "Filter" || n == "Broadcast") {
            info.flattenable = false;
            continue;
        }
        if (n == "Crop" || n == "Pad" || n == "Stencil" || n == "Downsample") {
            info.chunkable = false; // patch geometry needs the whole window
            continue;
        }
        if (n == "Reduce") {
            if (kernel_stage(nd.op.op_param(0)) > 0) info.chunkable = false; // must be parallel
            continue;
        }
        if (n == "Map") {
            if (!find_op(nd.op.op_param(0).name)) info.chunkable = false; // nested functions stay whole
            continue;
        }
        if (const OpInfo* oi = find_op(n); oi && (oi->scalar_kernel || n == "Zip" || n == "Pack" ||
                                                  n == "Index" || n == "FanIn" || n == "FanOut"))
            continue;
        if (prog.find(n)) { // direct user-function application
            info.chunkable = false;
            continue;
        }
        info.flattenable = false;
    }
    // chunked streams must keep uniform geometry across array-typed values
    if (info.chunkable)
        for (const auto& nd : fn.nodes)
            if (nd.type.is_array() &&
                (nd.type.width() != info.geom_w || nd.type.height() != info.geom_h))
                info.chunkable = false;
    return info;
}

bool static_capable_graph(const Program& prog, const UserFunction& fn) {
    for (const auto& nd : fn.nodes) {
        if (nd.kind != FNode::Kind::Apply) continue;
        if (needs_stream(nd.op.name)) return false;
        if (nd.type.is_sparse()) return false;
        if (const UserFunction* sub = prog.find(nd.op.name))
            if (!static_capable_graph(prog, *sub)) return false;
        if (nd.op.name == "Map" || nd.op.name == "Reduce") {
            const OpRef& f = nd.op.op_param(0);
            if (const UserFunction* sub = prog.find(f.name))
                if (!static_capable_graph(prog, *sub)) return false;
        }
    }
    return true;
}

} // namespace

TopInterface solve_top_interface(const Program& prog, const UserFunction& fn, Rat throughput) {
    if (!static_capable_graph(prog, fn)) return TopInterface::Stream;
    // a static schedule exists only when every edge utilization is 1/N
    RateMap rates = propagate_rates(prog, fn, Rat(1));
    if (!rates.ok()) return TopInterface::Stream;
    for (size_t v = 0; v < fn.nodes.size(); ++v) {
        const Rat req = site_requirement(rates, fn, (int)v, throughput);
        Rat r = req;
        if (fn.nodes[v].type.is_array()) {
            if (!schedule_satisfiable(fn.nodes[v].type, {req})) return TopInterface::Stream;
            auto s = optimize_schedule_type(fn.nodes[v].type, {req});
            r = req / Rat(s.vec_w() * s.vec_h());
        }
        if (r.numerator() != 1) return TopInterface::Stream;
    }
    return TopInterface::Static;
}

namespace {

class PipelineMapper {
public:
    PipelineMapper(std::shared_ptr<const Program> prog, const UserFunction& fn, const MapOptions& opts)
        : prog_(std::move(prog)), fn_(fn), opts_(opts) {}

    MapResult run() {
        MapResult res;
        rates_ = propagate_rates(*prog_, fn_, Rat(1));
        if (!rates_.ok()) {
            res.diagnostics = rates_.diagnostics;
            return res;
        }
        static_mode_ = solve_top_interface(*prog_, fn_, opts_.throughput) == TopInterface::Static;
        note("top-level interface: " + std::string(static_mode_ ? "Static" : "Stream"));
        g_.static_mode = static_mode_;
        g_.throughput = opts_.throughput;
        g_.library = prog_;

        mval_.assign(fn_.nodes.size(), {});
        folded_.assign(fn_.nodes.size(), std::nullopt);
        try {
            for (int v : topo_order_frontend()) map_node(v);
            make_sink();
            split_fanouts();
        } catch (const CompileError& e) {
            res.diagnostics.push_back({e.what(), e.loc()});
            return res;
        } catch (const std::exception& e) {
            res.diagnostics.push_back({e.what(), {}});
            return res;
        }
        const int conv = insert_conversions(g_);
        note("conversions inserted: " + std::to_string(conv));
        res.buffers = allocate_buffers(g_, opts_.manual_fifo);
        res.graph = std::move(g_);
        res.explain = std::move(explain_);
        return res;
    }

private:
    std::shared_ptr<const Program> prog_;
    const UserFunction& fn_;
    MapOptions opts_;
    RateMap rates_;
    MappedGraph g_;
    bool static_mode_ = false;
    std::vector<std::string> explain_;
    std::vector<std::vector<PortRef>> mval_; // producing ports per frontend node
    std::vector<std::optional<Value>> folded_;

    void note(std::string s) { explain_.push_back(std::move(s)); }

    std::vector<int> topo_order_frontend() const {
        const int n = (int)fn_.nodes.size();
        std::vector<int> indeg(n, 0), order, ready;
        std::vector<std::vector<int>> users(n);
        for (int i = 0; i < n; ++i)
            for (int a : fn_.nodes[i].args) {
                ++indeg[i];
                users[a].push_back(i);
            }
        for (int i = 0; i < n; ++i)
            if (!indeg[i]) ready.push_back(i);
        while (!ready.empty()) {
            int v = ready.back();
            ready.pop_back();
            order.push_back(v);
            for (int u : users[v])
                if (--indeg[u] == 0) ready.push_back(u);
        }
        return order;
    }

    Rat site_req(int v) const { return site_requirement(rates_, fn_, v, opts_.throughput); }

    // Solved output schedule for a frontend node at its site requirement.
    PortSpec site_spec(int v) const {
        const DataType& t = fn_.nodes[v].type;
        const Rat req = site_req(v);
        if (t.is_array()) {
            auto s = optimize_schedule_type(t, {req});
            return {s, !static_mode_, req / Rat(s.vec_w() * s.vec_h())};
        }
        if (t.is_sparse())
            return {ScheduleType::vec_sparse(t.elem(), t.width(), t.height()), true,
                    std::min(req, Rat(1))};
        return {ScheduleType::scalar(t), !static_mode_, std::min(req, Rat(1))};
    }

    bool foldable(int v) const {
        const FNode& nd = fn_.nodes[v];
        if (nd.kind == FNode::Kind::Const) return true;
        if (nd.kind == FNode::Kind::Input) return false;
        for (int a : nd.args)
            if (!folded_[a].has_value()) return false;
        return true;
    }

    Value fold(int v) {
        const FNode& nd = fn_.nodes[v];
        if (nd.kind == FNode::Kind::Const) return nd.constant;
        if (nd.kind == FNode::Kind::Concat) {
            if (nd.args.size() == 1) return *folded_[nd.args[0]];
            std::vector<Value> ms;
            for (int a : nd.args) ms.push_back(*folded_[a]);
            return Value::tuple(nd.type, std::move(ms));
        }
        return eval_operator(*prog_, nd.op, *folded_[nd.args[0]]);
    }

    // Materializes a constant as a token-pattern source at the given spec.
    PortRef materialize_const(int v, const PortSpec& spec) {
        std::vector<Value> toks = disassemble(*folded_[v], spec.sched);
        // collapse to the shortest repeating cycle
        for (size_t period = 1; period <= toks.size(); ++period) {
            if (toks.size() % period) continue;
            bool cyclic = true;
            for (size_t i = period; i < toks.size() && cyclic; ++i) cyclic = toks[i] == toks[i % period];
            if (cyclic) {
                toks.resize(period);
                break;
            }
        }
        ModuleInstance inst;
        inst.gen = Gen::Constant;
        inst.name = unique_name("const");
        inst.config.pattern = std::move(toks);
        inst.config.elem_type = fn_.nodes[v].type;
        inst.out = {spec};
        inst.out[0].is_stream = false; // constants are static sources
        inst.rate = spec.rate;
        inst.latency = 0;
        return {g_.add(std::move(inst)), 0};
    }

    std::string unique_name(const std::string& base) {
        std::string name = base;
        int suffix = 1;
        auto taken = [&](const std::string& s) {
            for (const auto& n : g_.nodes)
                if (n.name == s) return true;
            return false;
        };
        while (taken(name)) name = base + "_" + std::to_string(++suffix);
        return name;
    }

    // Producing port of a frontend value (materializing folded constants).
    PortRef port_of(int v, const PortSpec& spec) {
        if (folded_[v].has_value()) return materialize_const(v, spec);
        if (mval_[v].size() != 1)
            throw CompileError("value of node " + std::to_string(v) + " is a bundle where a stream is needed",
                               fn_.nodes[v].loc);
        return mval_[v][0];
    }

    // Bundle member list of a frontend value (Concat / FanOut results).
    std::vector<int> bundle_members(int v) const {
        const FNode& nd = fn_.nodes[v];
        if (nd.kind == FNode::Kind::Concat) return nd.args;
        return {v};
    }

    const PortSpec& out_spec(PortRef p) const { return g_.nodes[p.node].out[p.port]; }

    int add_single(ModuleInstance inst, int frontendNode) {
        int id = g_.add(std::move(inst));
        mval_[frontendNode] = {PortRef{id, 0}};
        return id;
    }

    void map_node(int v) {
        const FNode& nd = fn_.nodes[v];
        if (foldable(v)) {
            folded_[v] = fold(v);
            return;
        }
        switch (nd.kind) {
        case FNode::Kind::Input: {
            ModuleInstance src;
            src.gen = Gen::Source;
            src.name = "source";
            src.out = {site_spec(v)};
            src.rate = src.out[0].rate;
            src.latency = 0;
            src.config.elem_type = nd.type;
            add_single(std::move(src), v);
            note("input: " + src_desc(v));
            return;
        }
        case FNode::Kind::Const:
            folded_[v] = nd.constant;
            return;
        case FNode::Kind::Concat: {
            std::vector<PortRef> ports;
            for (int a : nd.args) {
                if (folded_[a].has_value())
                    ports.push_back(materialize_const(a, site_spec(a)));
                else
                    for (PortRef p : mval_[a]) ports.push_back(p);
            }
            mval_[v] = std::move(ports);
            return;
        }
        case FNode::Kind::Apply:
            map_apply(v);
            return;
        }
    }

    std::string src_desc(int v) const {
        const PortSpec s = site_spec(v);
        return out_render(s);
    }

    static std::string out_render(const PortSpec& s) {
        return s.sched.render() + " @R=" + to_string(s.rate) + (s.is_stream ? " stream" : " static");
    }

    void map_apply(int v) {
        const FNode& nd = fn_.nodes[v];
        const std::string& n = nd.op.name;
        const int a = nd.args[0];

        if (n == "Index") {
            const FNode& arg = fn_.nodes[a];
            const std::int64_t k = nd.op.int_param(0);
            if (arg.kind == FNode::Kind::Concat || fn_.nodes[a].op.name == "FanOut") {
                if (folded_[a].has_value()) { // constant tuple
                    folded_[v] = fold(v);
                    return;
                }
                mval_[v] = {mval_[a].at((size_t)k)};
                return;
            }
            // tuple payload stream
            pointwise(v, {wrap_outer(OpRef{"Index", {k}})});
            return;
        }
        if (n == "FanIn") {
            mval_[v] = mval_[a];
            return;
        }
        if (n == "FanOut") {
            const std::int64_t k = nd.op.int_param(0);
            PortSpec in = producer_spec(a);
            ModuleInstance inst;
            inst.gen = Gen::FanOut;
            inst.name = unique_name("fan_out");
            inst.config.factor = k;
            inst.in = {in};
            inst.out.assign((size_t)k, in);
            inst.rate = in.rate;
            inst.latency = 1;
            int id = g_.add(std::move(inst));
            g_.connect(port_of(a, in), {id, 0});
            mval_[v].clear();
            for (int i = 0; i < k; ++i) mval_[v].push_back({id, i});
            note("FanOut<" + std::to_string(k) + "> at node " + std::to_string(v));
            return;
        }
        if (n == "Map") {
            map_map(v);
            return;
        }
        if (n == "Reduce") {
            map_reduce_top(v);
            return;
        }
        if (n == "Stencil") {
            map_stencil(v);
            return;
        }
        if (n == "Pad" || n == "Crop" || n == "Downsample") {
            map_regrid(v);
            return;
        }
        if (n == "Zip" || n == "Pack") {
            map_zip_like(v);
            return;
        }
        if (n == "Filter") {
            map_filter(v);
            return;
        }
        if (n == "Broadcast")
            throw CompileError("Broadcast of a non-constant stream is not supported", nd.loc);

        const OpInfo* info = find_op(n);
        if ((info && info->scalar_kernel) || prog_->find(n)) {
            const FNode& arg = fn_.nodes[a];
            if (arg.kind == FNode::Kind::Concat && !folded_[a].has_value()) {
                map_zip_like(v); // kernel over synchronized operands
                return;
            }
            OpRef op = nd.op;
            std::vector<OpRef> chain = {wrap_outer(op)};
            if (const UserFunction* sub = prog_->find(n); sub && !analyze_body(*prog_, *sub).flattenable)
                pointwise(v, chain, estimate_fn_latency(*prog_, *sub));
            else if (const UserFunction* sub2 = prog_->find(n))
                pointwise(v, chain, estimate_fn_latency(*prog_, *sub2));
            else
                pointwise(v, chain);
            return;
        }
        throw CompileError("no mapping function for operator '" + n + "'", nd.loc);
    }

    // Wraps an element-level op for whole-payload application at this node's
    // vector schedule (payloads are Array2d chunks, so one Map level).
    OpRef wrap_outer(OpRef op) const { return OpRef{"Map", {std::move(op)}}; }

    PortSpec producer_spec(int a) { return folded_[a].has_value() ? site_spec(a) : out_spec(mval_[a][0]); }

    void pointwise(int v, std::vector<OpRef> chain, std::int64_t latency = -1) {
        const int a = fn_.nodes[v].args[0];
        PortSpec in = producer_spec(a);
        PortSpec out = site_spec(v);
        ModuleInstance inst;
        inst.gen = fn_.nodes[v].type.is_sparse() ? Gen::SparsePointwise : Gen::Pointwise;
        if (inst.gen == Gen::SparsePointwise) {
            // kernels apply to the value member of (value, position) tokens
            for (auto& op : chain)
                if (op.name == "Map" && op.params.size() == 1) op = op.op_param(0);
        }
        inst.name = unique_name(chain.empty() ? "pass" : chain_base_name(chain));
        inst.config.chain = std::move(chain);
        inst.in = {in};
        inst.out = {out};
        inst.rate = out.rate;
        inst.latency = latency >= 0 ? latency : chain_latency(inst.config.chain);
        int id = add_single(std::move(inst), v);
        g_.connect(port_of(a, in), {id, 0});
        note("site " + std::to_string(v) + " " + fn_.nodes[v].op.render() + ": pointwise, " + out_render(out));
    }

    static std::string chain_base_name(const std::vector<OpRef>& chain) {
        OpRef op = chain[0];
        while (op.name == "Map" && op.params.size() == 1) op = op.op_param(0);
        std::string s = op.name;
        for (auto& c : s) c = (char)std::tolower((unsigned char)c);
        return s;
    }

    void map_zip_like(int v) {
        const FNode& nd = fn_.nodes[v];
        const int a = nd.args[0];
        std::vector<int> members = bundle_members(a);
        std::vector<PortSpec> in_specs;
        std::vector<PortRef> in_ports;
        for (int m : members) {
            PortSpec s = folded_[m].has_value() ? site_spec(m) : out_spec(mval_[m][0]);
            in_specs.push_back(s);
            in_ports.push_back(port_of(m, s));
        }
        PortSpec out = site_spec(v);
        std::vector<OpRef> chain;
        const bool vec_members = in_specs[0].sched.kind() != ScheduleType::Kind::Scalar;
        if (nd.op.name == "Zip") {
            chain = {OpRef{"Zip", {}}};
        } else if (vec_members) {
            chain = {OpRef{"Zip", {}}, wrap_outer(nd.op)};
            if (nd.op.name == "Pack") {
                // a pack of scalar streams forms one fully-parallel array token
                out.sched = ScheduleType::vec(nd.type.elem(), nd.type.width(), nd.type.height(),
                                              nd.type.width(), nd.type.height());
                out.rate = in_specs[0].rate;
            }
        } else {
            chain = {nd.op};
            if (nd.op.name == "Pack") {
                out.sched = ScheduleType::vec(nd.type.elem(), nd.type.width(), nd.type.height(),
                                              nd.type.width(), nd.type.height());
                out.rate = in_specs[0].rate;
            }
        }
        ModuleInstance inst;
        inst.gen = Gen::ZipSync;
        inst.name = unique_name(nd.op.name == "Zip" ? "zip" : chain_base_name({nd.op}));
        inst.config.chain = std::move(chain);
        inst.in = in_specs;
        inst.out = {out};
        inst.rate = out.rate;
        inst.latency = 1;
        int id = add_single(std::move(inst), v);
        for (size_t i = 0; i < in_ports.size(); ++i) g_.connect(in_ports[i], {id, (int)i});
        note("site " + std::to_string(v) + " " + nd.op.render() + ": synchronize " +
             std::to_string(in_ports.size()) + " streams, " + out_render(out));
    }

    void map_stencil(int v) {
        const FNode& nd = fn_.nodes[v];
        const int a = nd.args[0];
        PortSpec in = producer_spec(a);
        if (in.sched.kind() != ScheduleType::Kind::Vec || in.sched.vec_h() != 1)
            throw CompileError("line buffer needs a row-vector input schedule", nd.loc);
        PortSpec out = site_spec(v);
        ModuleInstance inst;
        inst.gen = Gen::LineBuffer;
        inst.name = unique_name("line_buffer");
        inst.config.img_w = fn_.nodes[a].type.width();
        inst.config.img_h = fn_.nodes[a].type.height();
        inst.config.win_l = (int)nd.op.int_param(0);
        inst.config.win_r = (int)nd.op.int_param(1);
        inst.config.win_b = (int)nd.op.int_param(2);
        inst.config.win_t = (int)nd.op.int_param(3);
        inst.config.elem_type = fn_.nodes[a].type.elem();
        inst.in = {in};
        inst.out = {out};
        inst.rate = out.rate;
        // output lags until the bottom-right tap of the first window arrives
        const std::int64_t lag_px = std::max<std::int64_t>(inst.config.win_t, 0) * inst.config.img_w +
                                    std::max<std::int64_t>(inst.config.win_r, 0);
        const std::int64_t lag_tokens = (lag_px + in.sched.vec_w() - 1) / in.sched.vec_w();
        inst.latency = rat_ceil(Rat(lag_tokens) / in.rate) + 1;
        int id = add_single(std::move(inst), v);
        g_.connect(port_of(a, in), {id, 0});
        note("site " + std::to_string(v) + " " + nd.op.render() + ": line buffer over " +
             std::to_string(inst.config.img_w) + "x" + std::to_string(inst.config.img_h) + ", " +
             out_render(out));
    }

    void map_regrid(int v) {
        const FNode& nd = fn_.nodes[v];
        const int a = nd.args[0];
        PortSpec in = producer_spec(a);
        PortSpec out = site_spec(v);
        ModuleInstance inst;
        inst.gen = Gen::Regrid;
        std::string kind = nd.op.name;
        for (auto& c : kind) c = (char)std::tolower((unsigned char)c);
        inst.name = unique_name(kind);
        inst.config.regrid_kind = kind;
        for (size_t i = 0; i < nd.op.params.size(); ++i) inst.config.regrid_params.push_back(nd.op.int_param(i));
        inst.config.in_w = fn_.nodes[a].type.width();
        inst.config.in_h = fn_.nodes[a].type.height();
        inst.config.out_w = nd.type.width();
        inst.config.out_h = nd.type.height();
        inst.config.elem_type = nd.type.elem();
        inst.in = {in};
        inst.out = {out};
        inst.rate = out.rate;
        int id = add_single(std::move(inst), v);
        g_.connect(port_of(a, in), {id, 0});
        characterize_structural(g_, id); // fit (L, B) from the burst mini-simulation
        note("site " + std::to_string(v) + " " + nd.op.render() + ": regrid, " + out_render(out) + ", L=" +
             std::to_string(g_.nodes[id].latency) + " B=" + std::to_string(g_.nodes[id].burst));
    }

    void map_filter(int v) {
        const FNode& nd = fn_.nodes[v];
        const int a = nd.args[0];
        PortSpec in = producer_spec(a);
        PortSpec out = site_spec(v);
        ModuleInstance inst;
        inst.gen = Gen::Filter;
        inst.name = unique_name("filter");
        inst.config.elem_type = nd.type.elem();
        inst.config.in_w = nd.type.width();
        inst.config.in_h = nd.type.height();
        inst.in = {in};
        inst.out = {out};
        inst.rate = out.rate;
        inst.data_dependent = true;
        if (nd.op.params.size() == 2) {
            inst.latency = nd.op.int_param(0) + 1;
            inst.burst = nd.op.int_param(1);
            inst.burst_annotated = true;
        } else {
            inst.latency = 1;
            inst.burst = 0;
            inst.burst_annotated = false; // burst padding will demand an annotation
        }
        int id = add_single(std::move(inst), v);
        g_.connect(port_of(a, in), {id, 0});
        note("site " + std::to_string(v) + " " + nd.op.render() + ": data-dependent filter, " + out_render(out));
    }

    // ---- Map<f>: flatten the function body over the stream --------------

    void map_map(int v) {
        const FNode& nd = fn_.nodes[v];
        const OpRef& f = nd.op.op_param(0);
        const int a = nd.args[0];

        if (fn_.nodes[a].type.is_sparse()) {
            pointwise(v, {wrap_outer(f)}, sparse_kernel_latency(f));
            return;
        }
        const UserFunction* sub = prog_->find(f.name);
        if (!sub || !analyze_body(*prog_, *sub).flattenable) {
            std::int64_t lat = -1;
            if (sub) lat = estimate_fn_latency(*prog_, *sub);
            pointwise(v, {wrap_outer(f)}, lat);
            return;
        }
        flatten_body(v, *sub);
    }

    std::int64_t sparse_kernel_latency(const OpRef& f) const {
        if (const UserFunction* sub = prog_->find(f.name)) return estimate_fn_latency(*prog_, *sub);
        return std::max<std::int64_t>(kernel_stage(f), 1);
    }

    struct BodyCtx {
        std::int64_t outer_w, outer_h; // image geometry
        std::int64_t outer_v;          // image-level vector width (whole-token mode)
        Rat group_rate;                // rate of one image position
        bool chunked = false;
        std::int64_t cw = 0, ch = 0, ww = 0, wh = 0; // window chunking
        std::int64_t chunks_per_group = 1;
    };

    PortSpec body_spec(const BodyCtx& ctx, const DataType& t) const {
        if (ctx.chunked && t.is_array()) {
            auto inner = ScheduleType::vec(t.elem(), ctx.cw, ctx.ch, ctx.ww, ctx.wh);
            return {ScheduleType::seq(inner, ctx.outer_w, ctx.outer_h), !static_mode_,
                    ctx.group_rate * Rat(ctx.chunks_per_group)};
        }
        return {ScheduleType::vec(t, ctx.outer_v, 1, ctx.outer_w * ctx.outer_v, ctx.outer_h),
                !static_mode_, ctx.group_rate};
    }

    void flatten_body(int v, const UserFunction& body) {
        const FNode& nd = fn_.nodes[v];
        const int a = nd.args[0];
        const Rat req = site_req(v);
        const DataType elem_t = fn_.nodes[a].type.elem();

        BodyCtx ctx;
        ctx.outer_w = nd.type.width();
        ctx.outer_h = nd.type.height();
        BodyInfo info = analyze_body(*prog_, body);
        if (req < Rat(1) && info.chunkable && elem_t.is_array()) {
            ctx.chunked = true;
            ctx.outer_v = 1;
            ctx.group_rate = req;
            ctx.ww = elem_t.width();
            ctx.wh = elem_t.height();
            auto chunk = optimize_schedule_type(elem_t, {req * Rat(ctx.ww * ctx.wh)});
            ctx.cw = chunk.vec_w();
            ctx.ch = chunk.vec_h();
            ctx.chunks_per_group = (ctx.ww * ctx.wh) / (ctx.cw * ctx.ch);
            note("site " + std::to_string(v) + " " + nd.op.render() + ": chunked body, " +
                 std::to_string(ctx.cw) + "x" + std::to_string(ctx.ch) + " chunks, " +
                 std::to_string(ctx.chunks_per_group) + " per window");
        } else {
            auto s = optimize_schedule_type(nd.type, {req});
            if (s.vec_h() != 1) throw CompileError("unsupported vector shape for Map body", nd.loc);
            ctx.outer_v = s.vec_w();
            ctx.group_rate = req / Rat(ctx.outer_v);
            note("site " + std::to_string(v) + " " + nd.op.render() + ": parallel body, V=" +
                 std::to_string(ctx.outer_v));
        }
        // fix the outer geometry so width stays divisible by the vector
        ctx.outer_w = nd.type.width() / std::max<std::int64_t>(1, 1); // frame width in elements
        // note: body specs use (W*V ... ) trick only when V divides W; use plain dims
        // and the real vec:
        // (body streams share the node's outer vec schedule)
        map_body(v, body, ctx);
    }

    PortSpec body_stream_spec(const BodyCtx& ctx, int mapNode, const DataType& t) const {
        const FNode& nd = fn_.nodes[mapNode];
        if (ctx.chunked && t.is_array() && t.width() == ctx.ww && t.height() == ctx.wh) {
            auto inner = ScheduleType::vec(t.elem(), ctx.cw, ctx.ch, ctx.ww, ctx.wh);
            return {ScheduleType::seq(inner, nd.type.width(), nd.type.height()), !static_mode_,
                    ctx.group_rate * Rat(ctx.chunks_per_group)};
        }
        return {ScheduleType::vec(t, ctx.outer_v, 1, nd.type.width(), nd.type.height()), !static_mode_,
                ctx.group_rate * Rat(ctx.outer_v) / Rat(ctx.outer_v)};
    }

    void map_body(int mapNode, const UserFunction& body, const BodyCtx& ctx) {
        const FNode& mnd = fn_.nodes[mapNode];
        const int src = mnd.args[0];
        // per body-node producing ports
        std::vector<std::vector<PortRef>> bports(body.nodes.size());
        std::vector<std::optional<Value>> bfold(body.nodes.size());

        auto bspec = [&](int b) { return body_stream_spec(ctx, mapNode, body.nodes[b].type); };
        auto bfoldable = [&](int b) {
            const FNode& bn = body.nodes[b];
            if (bn.kind == FNode::Kind::Const) return true;
            if (bn.kind == FNode::Kind::Input) return false;
            for (int x : bn.args)
                if (!bfold[x].has_value()) return false;
            return true;
        };
        auto bport = [&](int b) -> PortRef {
            if (bfold[b].has_value()) {
                PortSpec spec = bspec(b);
                // constant element broadcast across the whole stream
                Value frame_elem = *bfold[b];
                std::vector<Value> toks;
                if (ctx.chunked && body.nodes[b].type.is_array()) {
                    auto inner = ScheduleType::vec(body.nodes[b].type.elem(), ctx.cw, ctx.ch, ctx.ww, ctx.wh);
                    toks = disassemble(frame_elem, inner);
                } else {
                    std::vector<Value> elems((size_t)ctx.outer_v, frame_elem);
                    toks = {Value::array(DataType::array2d(body.nodes[b].type, ctx.outer_v, 1),
                                         std::move(elems))};
                }
                ModuleInstance inst;
                inst.gen = Gen::Constant;
                inst.name = unique_name("const");
                inst.config.pattern = std::move(toks);
                inst.config.elem_type = body.nodes[b].type;
                inst.out = {spec};
                inst.out[0].is_stream = false;
                inst.rate = spec.rate;
                inst.latency = 0;
                return {g_.add(std::move(inst)), 0};
            }
            if (bports[b].size() != 1)
                throw CompileError("body value is a bundle where a stream is needed", body.nodes[b].loc);
            return bports[b][0];
        };

        std::function<std::vector<int>(int)> bmembers = [&](int b) -> std::vector<int> {
            const FNode& bn = body.nodes[b];
            if (bn.kind == FNode::Kind::Concat) return bn.args;
            return {b};
        };

        for (int b : topo_of(body)) {
            const FNode& bn = body.nodes[b];
            if (bfoldable(b)) {
                if (bn.kind == FNode::Kind::Const)
                    bfold[b] = bn.constant;
                else if (bn.kind == FNode::Kind::Concat) {
                    if (bn.args.size() == 1) {
                        bfold[b] = *bfold[bn.args[0]];
                    } else {
                        std::vector<Value> ms;
                        for (int x : bn.args) ms.push_back(*bfold[x]);
                        bfold[b] = Value::tuple(bn.type, std::move(ms));
                    }
                } else {
                    bfold[b] = eval_operator(*prog_, bn.op, *bfold[bn.args[0]]);
                }
                continue;
            }
            switch (bn.kind) {
            case FNode::Kind::Input:
                // the map's input stream: demanded at the body-side schedule;
                // conversions reconcile the producer
                bports[b] = {port_of(src, producer_spec(src))};
                break;
            case FNode::Kind::Const:
                bfold[b] = bn.constant;
                break;
            case FNode::Kind::Concat: {
                std::vector<PortRef> ports;
                for (int x : bn.args) ports.push_back(bport(x));
                bports[b] = std::move(ports);
                break;
            }
            case FNode::Kind::Apply:
                map_body_apply(mapNode, body, ctx, b, bports, bfold, bspec, bport, bmembers);
                break;
            }
        }
        mval_[mapNode] = {bport(body.output_node)};
    }

    static std::vector<int> topo_of(const UserFunction& f) {
        const int n = (int)f.nodes.size();
        std::vector<int> indeg(n, 0), order, ready;
        std::vector<std::vector<int>> users(n);
        for (int i = 0; i < n; ++i)
            for (int x : f.nodes[i].args) {
                ++indeg[i];
                users[x].push_back(i);
            }
        for (int i = 0; i < n; ++i)
            if (!indeg[i]) ready.push_back(i);
        while (!ready.empty()) {
            int v = ready.back();
            ready.pop_back();
            order.push_back(v);
            for (int u : users[v])
                if (--indeg[u] == 0) ready.push_back(u);
        }
        return order;
    }

    template <typename SpecFn, typename PortFn, typename MembersFn>
    void map_body_apply(int mapNode, const UserFunction& body, const BodyCtx& ctx, int b,
                        std::vector<std::vector<PortRef>>& bports, std::vector<std::optional<Value>>& bfold,
                        SpecFn bspec, PortFn bport, MembersFn bmembers) {
        const FNode& bn = body.nodes[b];
        const std::string& n = bn.op.name;
        const int arg = bn.args[0];

        auto connect_single = [&](ModuleInstance inst, PortRef inPort) {
            int id = g_.add(std::move(inst));
            g_.connect(inPort, {id, 0});
            bports[b] = {PortRef{id, 0}};
            return id;
        };

        if (n == "Index") {
            const FNode& an = body.nodes[arg];
            const std::int64_t k = bn.op.int_param(0);
            if ((an.kind == FNode::Kind::Concat && !bfold[arg].has_value()) ||
                (an.kind == FNode::Kind::Apply && an.op.name == "FanOut")) {
                bports[b] = {bports[arg].at((size_t)k)};
                return;
            }
        }
        if (n == "FanIn") {
            bports[b] = bports[arg];
            return;
        }
        if (n == "FanOut") {
            const std::int64_t k = bn.op.int_param(0);
            PortRef p = bport(arg);
            PortSpec in = out_spec(p);
            ModuleInstance inst;
            inst.gen = Gen::FanOut;
            inst.name = unique_name("fan_out");
            inst.config.factor = k;
            inst.in = {in};
            inst.out.assign((size_t)k, in);
            inst.rate = in.rate;
            inst.latency = 1;
            int id = g_.add(std::move(inst));
            g_.connect(p, {id, 0});
            bports[b].clear();
            for (int i = 0; i < k; ++i) bports[b].push_back({id, i});
            return;
        }
        if (n == "Reduce") {
            map_body_reduce(body, ctx, b, bports, bspec, bport);
            return;
        }

        // synchronizing kernels over bundles
        const FNode& an = body.nodes[arg];
        const bool bundle = an.kind == FNode::Kind::Concat && !bfold[arg].has_value();
        if (bundle) {
            std::vector<int> members = bmembers(arg);
            std::vector<PortSpec> in_specs;
            std::vector<PortRef> in_ports;
            for (int m : members) {
                PortRef p = bport(m);
                in_specs.push_back(out_spec(p));
                in_ports.push_back(p);
            }
            PortSpec out = bspec(b);
            std::vector<OpRef> chain;
            if (ctx.chunked && in_specs[0].sched.kind() == ScheduleType::Kind::Seq) {
                chain = n == "Zip" ? std::vector<OpRef>{OpRef{"Zip", {}}}
                                   : std::vector<OpRef>{OpRef{"Zip", {}}, wrap_outer(bn.op)};
            } else if (in_specs[0].sched.kind() == ScheduleType::Kind::Vec) {
                chain = n == "Zip" ? std::vector<OpRef>{OpRef{"Zip", {}}, wrap_outer(OpRef{"Zip", {}})}
                                   : std::vector<OpRef>{OpRef{"Zip", {}}, wrap_outer(bn.op)};
                if (n == "Zip") chain = {OpRef{"Zip", {}}, wrap_outer(OpRef{"Zip", {}})};
            } else {
                chain = {bn.op};
            }
            ModuleInstance inst;
            inst.gen = Gen::ZipSync;
            inst.name = unique_name(chain_base_name({bn.op}));
            inst.config.chain = std::move(chain);
            inst.in = in_specs;
            inst.out = {out};
            inst.rate = out.rate;
            inst.latency = std::max<std::int64_t>(kernel_stage(bn.op), 1);
            int id = g_.add(std::move(inst));
            for (size_t i = 0; i < in_ports.size(); ++i) g_.connect(in_ports[i], {id, (int)i});
            bports[b] = {PortRef{id, 0}};
            return;
        }

        // plain pointwise body op
        PortRef p = bport(arg);
        PortSpec in = out_spec(p);
        PortSpec out = bspec(b);
        ModuleInstance inst;
        inst.gen = Gen::Pointwise;
        OpRef lifted = ctx.chunked && in.sched.kind() == ScheduleType::Kind::Seq ? bn.op : wrap_outer(bn.op);
        inst.name = unique_name(chain_base_name({bn.op}));
        inst.config.chain = {lifted};
        inst.in = {in};
        inst.out = {out};
        inst.rate = out.rate;
        inst.latency = chain_latency(inst.config.chain);
        connect_single(std::move(inst), p);
        (void)mapNode;
    }

    template <typename SpecFn, typename PortFn>
    void map_body_reduce(const UserFunction& body, const BodyCtx& ctx, int b,
                         std::vector<std::vector<PortRef>>& bports, SpecFn bspec, PortFn bport) {
        const FNode& bn = body.nodes[b];
        const int arg = bn.args[0];
        PortRef p = bport(arg);
        PortSpec in = out_spec(p);
        PortSpec out = bspec(b);
        const DataType& arr = body.nodes[arg].type;
        const std::int64_t total = arr.width() * arr.height();

        ModuleInstance inst;
        inst.config.reduce_fn = bn.op.op_param(0);
        inst.config.group_elems = total;
        inst.config.elem_type = bn.type;
        inst.in = {in};
        inst.out = {out};
        inst.rate = out.rate;
        if (ctx.chunked && in.sched.kind() == ScheduleType::Kind::Seq) {
            inst.gen = Gen::ReduceVec;
            inst.name = unique_name("reduce_vec");
            inst.config.chunks_per_group = ctx.chunks_per_group;
            inst.latency = ctx.chunks_per_group + 1;
        } else {
            inst.gen = Gen::ReduceTree;
            inst.name = unique_name("reduce_tree");
            std::int64_t levels = 1;
            while ((std::int64_t(1) << levels) < total) ++levels;
            if (total == 1) levels = 0;
            inst.latency = std::max<std::int64_t>(levels * (1 + kernel_stage(inst.config.reduce_fn)), 1);
        }
        int id = g_.add(std::move(inst));
        g_.connect(p, {id, 0});
        bports[b] = {PortRef{id, 0}};
    }

    // Top-level Reduce over the whole frame.
    void map_reduce_top(int v) {
        const FNode& nd = fn_.nodes[v];
        const int a = nd.args[0];
        PortSpec in = producer_spec(a);
        PortSpec out = site_spec(v);
        const DataType& arr = fn_.nodes[a].type;
        const std::int64_t total = arr.width() * arr.height();
        const std::int64_t per_token = in.sched.elements_per_transaction();

        ModuleInstance inst;
        inst.config.reduce_fn = nd.op.op_param(0);
        inst.config.group_elems = total;
        inst.config.elem_type = nd.type;
        inst.in = {in};
        inst.out = {out};
        inst.rate = out.rate;
        if (per_token == total) {
            inst.gen = Gen::ReduceTree;
            inst.name = unique_name("reduce_tree");
            std::int64_t levels = 1;
            while ((std::int64_t(1) << levels) < total) ++levels;
            inst.latency = std::max<std::int64_t>(levels * (1 + kernel_stage(inst.config.reduce_fn)), 1);
        } else {
            if (kernel_stage(nd.op.op_param(0)) > 0)
                throw CompileError(
                    "Reduce over a serialized frame needs a zero-latency combine function; "
                    "no generator variant satisfies this site",
                    nd.loc);
            inst.gen = Gen::ReduceVec;
            inst.name = unique_name("reduce_vec");
            inst.config.chunks_per_group = total / per_token;
            inst.latency = inst.config.chunks_per_group + 1;
        }
        int id = add_single(std::move(inst), v);
        g_.connect(port_of(a, in), {id, 0});
        note("site " + std::to_string(v) + " " + nd.op.render() + ": " +
             std::string(g_.nodes[id].gen == Gen::ReduceTree ? "parallel reduce tree" : "serial reducer") +
             ", " + out_render(out));
    }

    void make_sink() {
        const int outN = fn_.output_node;
        std::vector<int> members = folded_[outN] || mval_[outN].size() == 1
                                       ? std::vector<int>{outN}
                                       : bundle_members(outN);
        ModuleInstance sink;
        sink.gen = Gen::Sink;
        sink.name = "sink";
        sink.latency = 0;
        std::vector<PortRef> ports;
        for (int m : members) {
            PortSpec s = folded_[m].has_value() ? site_spec(m) : out_spec(mval_[m][0]);
            sink.in.push_back(s);
            ports.push_back(port_of(m, s));
        }
        sink.rate = sink.in[0].rate;
        int id = g_.add(std::move(sink));
        for (size_t i = 0; i < ports.size(); ++i) g_.connect(ports[i], {id, (int)i});
        g_.sink = id;
        for (int i = 0; i < (int)g_.nodes.size(); ++i)
            if (g_.nodes[i].gen == Gen::Source) g_.source = i;
    }

    // Multi-consumer outputs become explicit broadcast instances.
    void split_fanouts() {
        for (int node = 0; node < (int)g_.nodes.size(); ++node) {
            for (int port = 0; port < (int)g_.nodes[node].out.size(); ++port) {
                std::vector<int> chans;
                for (int c = 0; c < (int)g_.channels.size(); ++c)
                    if (g_.channels[c].from.node == node && g_.channels[c].from.port == port)
                        chans.push_back(c);
                if (chans.size() < 2) continue;
                PortSpec spec = g_.nodes[node].out[port];
                ModuleInstance fo;
                fo.gen = Gen::FanOut;
                fo.name = unique_name("fan_out");
                fo.config.factor = (std::int64_t)chans.size();
                fo.in = {spec};
                fo.out.assign(chans.size(), spec);
                fo.rate = spec.rate;
                fo.latency = 1;
                int id = g_.add(std::move(fo));
                g_.connect({node, port}, {id, 0});
                for (size_t i = 0; i < chans.size(); ++i) g_.channels[chans[i]].from = {id, (int)i};
            }
        }
    }
};

} // namespace

std::string channel_label(const MappedGraph& g, int channel) {
    const Channel& c = g.channels[channel];
    return g.nodes[c.from.node].name + "->" + g.nodes[c.to.node].name;
}

int insert_conversions(MappedGraph& g) {
    int inserted = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        const int n_channels = (int)g.channels.size();
        for (int c = 0; c < n_channels; ++c) {
            Channel& ch = g.channels[c];
            const PortSpec from = g.nodes[ch.from.node].out[ch.from.port];
            const PortSpec to = g.nodes[ch.to.node].in[ch.to.port];
            if (from.sched == to.sched && from.is_stream == to.is_stream && from.rate == to.rate) {
                ch.sched = from.sched;
                ch.is_stream = from.is_stream;
                ch.rate = from.rate;
                ch.token_bits = from.sched.token_type().bit_width();
                continue;
            }
            // static producer into a stream consumer: promotion register
            if (!from.is_stream && to.is_stream) {
                ModuleInstance conv;
                conv.gen = Gen::StaticToStream;
                conv.name = g.nodes[ch.from.node].name + "_to_stream";
                conv.in = {from};
                conv.out = {from};
                conv.out[0].is_stream = true;
                conv.rate = from.rate;
                conv.latency = 1;
                int id = g.add(std::move(conv));
                PortRef orig = g.channels[c].from;
                g.channels[c].from = {id, 0};
                g.connect(orig, {id, 0});
                ++inserted;
                changed = true;
                continue;
            }
            // vector width / chunking tradeoffs at matched throughput
            const std::int64_t from_tokens = from.sched.total_transactions();
            const std::int64_t to_tokens = to.sched.total_transactions();
            if (from_tokens != to_tokens && from.is_stream == to.is_stream &&
                (from_tokens % to_tokens == 0 || to_tokens % from_tokens == 0)) {
                const bool ser = to_tokens > from_tokens;
                ModuleInstance conv;
                conv.gen = ser ? Gen::Serialize : Gen::Deserialize;
                conv.name = std::string(ser ? "serialize" : "deserialize") + "_" +
                            std::to_string(inserted + 1);
                conv.config.factor = ser ? to_tokens / from_tokens : from_tokens / to_tokens;
                conv.in = {from};
                conv.out = {to};
                conv.rate = to.rate;
                conv.latency = 1;
                int id = g.add(std::move(conv));
                PortRef orig = g.channels[c].from;
                g.channels[c].from = {id, 0};
                g.connect(orig, {id, 0});
                characterize_structural(g, id);
                ++inserted;
                changed = true;
                continue;
            }
            throw std::logic_error("unmatchable interfaces on channel " + channel_label(g, c) + ": " +
                                   from.sched.render() + " vs " + to.sched.render());
        }
    }
    // refresh channel annotations
    for (auto& ch : g.channels) {
        const PortSpec from = g.nodes[ch.from.node].out[ch.from.port];
        ch.sched = from.sched;
        ch.is_stream = from.is_stream;
        ch.rate = from.rate;
        ch.token_bits = from.sched.token_type().bit_width();
    }
    return inserted;
}

BufferReport allocate_buffers(MappedGraph& g, const std::map<std::string, std::int64_t>& manual) {
    BufferProblem p;
    for (const auto& n : g.nodes)
        p.nodes.push_back({n.latency, n.rate, n.burst, n.data_dependent, n.burst_annotated, n.name});
    for (const auto& c : g.channels) p.edges.push_back({c.from.node, c.to.node, c.token_bits});

    BufferSolution s = solve_buffers(p);
    apply_burst_padding(p, s);

    for (size_t c = 0; c < g.channels.size(); ++c) g.channels[c].fifo_depth = s.depth[c];
    for (const auto& [label, depth] : manual) {
        bool found = false;
        for (size_t c = 0; c < g.channels.size(); ++c)
            if (channel_label(g, (int)c) == label) {
                g.channels[c].fifo_depth = depth;
                found = true;
            }
        if (!found) throw std::invalid_argument("manual FIFO override: no channel named '" + label + "'");
    }
    BufferReport rep;
    rep.node_delay = s.start_delay;
    rep.total_bits = 0;
    for (size_t c = 0; c < g.channels.size(); ++c) {
        rep.channel_depth.push_back(g.channels[c].fifo_depth);
        rep.total_bits += g.channels[c].fifo_depth * g.channels[c].token_bits;
    }
    g.total_latency = g.sink >= 0 ? s.start_delay[g.sink] : 0;
    return rep;
}

MapResult map_pipeline(std::shared_ptr<const Program> prog, const std::string& fn_name, const MapOptions& opts) {
    const UserFunction* fn = prog->find(fn_name);
    if (!fn) {
        MapResult res;
        res.diagnostics.push_back({"no function named '" + fn_name + "'", {}});
        return res;
    }
    return PipelineMapper(prog, *fn, opts).run();
}

MapResult specialize(std::shared_ptr<const Program> prog, const std::string& fn_name, Rat throughput) {
    return map_pipeline(std::move(prog), fn_name, {throughput, false, {}});
}

} // namespace hwpc
