#include "hwpc/ir.hpp"

#include <stdexcept>

namespace hwpc {

const char* gen_name(Gen g) {
    switch (g) {
    case Gen::Source: return "source";
    case Gen::Sink: return "sink";
    case Gen::Constant: return "constant";
    case Gen::Pointwise: return "pointwise";
    case Gen::ZipSync: return "zip_sync";
    case Gen::FanOut: return "fan_out";
    case Gen::LineBuffer: return "line_buffer";
    case Gen::Regrid: return "regrid";
    case Gen::Serialize: return "serialize";
    case Gen::Deserialize: return "deserialize";
    case Gen::ReduceTree: return "reduce_tree";
    case Gen::ReduceVec: return "reduce_vec";
    case Gen::Filter: return "filter";
    case Gen::SparsePointwise: return "sparse_pointwise";
    case Gen::StaticToStream: return "static_to_stream";
    }
    return "?";
}

Gen gen_from_name(const std::string& name) {
    for (int g = (int)Gen::Source; g <= (int)Gen::StaticToStream; ++g)
        if (name == gen_name((Gen)g)) return (Gen)g;
    throw std::invalid_argument("unknown generator '" + name + "'");
}

std::vector<int> MappedGraph::in_channels(int node) const {
    std::vector<int> out;
    for (int c = 0; c < (int)channels.size(); ++c)
        if (channels[c].to.node == node) out.push_back(c);
    return out;
}

std::vector<int> MappedGraph::out_channels(int node) const {
    std::vector<int> out;
    for (int c = 0; c < (int)channels.size(); ++c)
        if (channels[c].from.node == node) out.push_back(c);
    return out;
}

std::vector<int> MappedGraph::topo_order() const {
    const int n = (int)nodes.size();
    std::vector<int> indeg(n, 0), order;
    for (const auto& c : channels) ++indeg[c.to.node];
    std::vector<int> ready;
    for (int i = 0; i < n; ++i)
        if (indeg[i] == 0) ready.push_back(i);
    while (!ready.empty()) {
        int v = ready.back();
        ready.pop_back();
        order.push_back(v);
        for (const auto& c : channels)
            if (c.from.node == v && --indeg[c.to.node] == 0) ready.push_back(c.to.node);
    }
    if ((int)order.size() != n) throw std::logic_error("mapped graph has a cycle");
    return order;
}

namespace {

void disassemble_into(const Value& frame, const ScheduleType& sched, std::vector<Value>& out) {
    switch (sched.kind()) {
    case ScheduleType::Kind::Scalar:
        out.push_back(frame);
        return;
    case ScheduleType::Kind::Vec: {
        const std::int64_t vw = sched.vec_w(), vh = sched.vec_h();
        const std::int64_t cw = sched.array_w() / vw, ch = sched.array_h() / vh;
        const DataType tok_t = sched.token_type();
        for (std::int64_t cy = 0; cy < ch; ++cy)
            for (std::int64_t cx = 0; cx < cw; ++cx) {
                std::vector<Value> elems;
                elems.reserve(vw * vh);
                for (std::int64_t j = 0; j < vh; ++j)
                    for (std::int64_t i = 0; i < vw; ++i) elems.push_back(frame.at(cx * vw + i, cy * vh + j));
                out.push_back(Value::array(tok_t, std::move(elems)));
            }
        return;
    }
    case ScheduleType::Kind::Seq: {
        for (std::int64_t y = 0; y < sched.array_h(); ++y)
            for (std::int64_t x = 0; x < sched.array_w(); ++x)
                disassemble_into(frame.at(x, y), sched.inner(), out);
        return;
    }
    case ScheduleType::Kind::VecSparse: {
        const DataType tok_t = sched.token_type();
        const auto& sp = frame.sparse_payload();
        for (size_t i = 0; i < sp.elems.size(); ++i)
            out.push_back(Value::tuple(
                tok_t, {sp.elems[i], Value::scalar(tok_t.members()[1], sp.positions[i])}));
        return;
    }
    }
}

Value assemble_rec(const std::vector<Value>& tokens, size_t& pos, const ScheduleType& sched) {
    switch (sched.kind()) {
    case ScheduleType::Kind::Scalar:
        return tokens.at(pos++);
    case ScheduleType::Kind::Vec: {
        const std::int64_t vw = sched.vec_w(), vh = sched.vec_h();
        const std::int64_t cw = sched.array_w() / vw, ch = sched.array_h() / vh;
        const DataType frame_t = sched.frame_type();
        std::vector<Value> elems(sched.array_w() * sched.array_h(), Value());
        for (std::int64_t cy = 0; cy < ch; ++cy)
            for (std::int64_t cx = 0; cx < cw; ++cx) {
                const Value& tok = tokens.at(pos++);
                for (std::int64_t j = 0; j < vh; ++j)
                    for (std::int64_t i = 0; i < vw; ++i)
                        elems[(cy * vh + j) * sched.array_w() + cx * vw + i] = tok.elems()[j * vw + i];
            }
        return Value::array(frame_t, std::move(elems));
    }
    case ScheduleType::Kind::Seq: {
        const DataType frame_t = sched.frame_type();
        std::vector<Value> elems;
        elems.reserve(sched.array_w() * sched.array_h());
        for (std::int64_t i = 0; i < sched.array_w() * sched.array_h(); ++i)
            elems.push_back(assemble_rec(tokens, pos, sched.inner()));
        return Value::array(frame_t, std::move(elems));
    }
    case ScheduleType::Kind::VecSparse: {
        Value::Sparse sp;
        while (pos < tokens.size()) {
            const Value& tok = tokens[pos++];
            sp.elems.push_back(tok.elems()[0]);
            sp.positions.push_back((std::int64_t)tok.elems()[1].scalar_int());
        }
        return Value::sparse(sched.frame_type(), std::move(sp));
    }
    }
    throw std::logic_error("assemble: bad schedule");
}

} // namespace

std::vector<Value> disassemble(const Value& frame, const ScheduleType& sched) {
    std::vector<Value> out;
    disassemble_into(frame, sched, out);
    return out;
}

Value assemble(const std::vector<Value>& tokens, const ScheduleType& sched) {
    size_t pos = 0;
    Value v = assemble_rec(tokens, pos, sched);
    if (sched.kind() != ScheduleType::Kind::VecSparse && pos != tokens.size())
        throw std::logic_error("assemble: token count does not match the schedule");
    return v;
}

} // namespace hwpc
