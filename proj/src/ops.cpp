#include "hwpc/frontend/ops.hpp"

#include <algorithm>
#include <map>

namespace hwpc {

std::int64_t OpRef::int_param(size_t i) const { return std::get<std::int64_t>(params.at(i)); }
const OpRef& OpRef::op_param(size_t i) const { return std::get<OpRef>(params.at(i)); }
const DataType& OpRef::type_param(size_t i) const { return std::get<DataType>(params.at(i)); }

std::string OpRef::render() const {
    std::string s = name;
    if (!params.empty()) {
        s += "<";
        for (size_t i = 0; i < params.size(); ++i) {
            if (i) s += ",";
            if (auto* v = std::get_if<std::int64_t>(&params[i]))
                s += std::to_string(*v);
            else if (auto* t = std::get_if<DataType>(&params[i]))
                s += t->render();
            else
                s += std::get<OpRef>(params[i]).render();
        }
        s += ">";
    }
    return s;
}

bool OpRef::operator==(const OpRef& o) const {
    if (name != o.name || params.size() != o.params.size()) return false;
    for (size_t i = 0; i < params.size(); ++i) {
        if (params[i].index() != o.params[i].index()) return false;
        if (auto* v = std::get_if<std::int64_t>(&params[i])) {
            if (*v != std::get<std::int64_t>(o.params[i])) return false;
        } else if (auto* t = std::get_if<DataType>(&params[i])) {
            if (!(*t == std::get<DataType>(o.params[i]))) return false;
        } else if (!(std::get<OpRef>(params[i]) == std::get<OpRef>(o.params[i]))) {
            return false;
        }
    }
    return true;
}

namespace {

using PK = OpInfo::ParamKind;

const std::vector<OpInfo>& op_table() {
    static const std::vector<OpInfo> table = {
        // structural operators
        {"Map", {PK::Op}, false, false, false},
        {"Reduce", {PK::Op}, false, false, false},
        {"Stencil", {PK::Int, PK::Int, PK::Int, PK::Int}, false, false, false},
        {"Pad", {PK::Int, PK::Int, PK::Int, PK::Int}, false, false, false},
        {"Crop", {PK::Int, PK::Int, PK::Int, PK::Int}, false, false, false},
        {"Zip", {}, false, false, true},
        {"FanIn", {}, false, false, true},
        {"FanOut", {PK::Int}, false, false, false},
        {"Index", {PK::Int}, false, true, false},
        {"Downsample", {PK::Int, PK::Int}, false, false, false},
        {"Filter", {PK::Int, PK::Int}, false, false, true},
        {"Broadcast", {PK::Int, PK::Int}, false, false, false},
        {"Pack", {}, false, true, true},
        // pointwise arithmetic kernels (registered stages)
        {"Add", {}, true, false, true},
        {"AddAsync", {}, true, true, true}, // combinational adder
        {"Sub", {}, true, false, true},
        {"Mul", {}, true, false, true},
        {"Min", {}, true, false, true},
        {"Max", {}, true, false, true},
        {"MinFst", {}, true, false, true},
        {"AbsDiff", {}, true, false, true},
        {"Abs", {}, true, false, false},
        {"Neg", {}, true, false, false},
        {"Gt", {}, true, false, true},
        {"Ge", {}, true, false, true},
        {"Lt", {}, true, false, true},
        {"Le", {}, true, false, true},
        {"Eq", {}, true, false, true},
        {"Ne", {}, true, false, true},
        // pure wiring kernels
        {"Mux", {}, true, true, true},
        {"AddMSBs", {PK::Int}, true, true, false},
        {"RemoveMSBs", {PK::Int}, true, true, false},
        {"Rshift", {PK::Int}, true, true, false},
        {"Lshift", {PK::Int}, true, true, false},
        {"Id", {}, true, true, false},
        {"Fst", {}, true, true, false},
        {"Snd", {}, true, true, false},
        {"SignBit", {}, true, true, false},
        {"Not", {}, true, true, false},
        {"And", {}, true, true, true},
        {"Or", {}, true, true, true},
    };
    return table;
}

} // namespace

const OpInfo* find_op(const std::string& name) {
    for (const auto& o : op_table())
        if (o.name == name) return &o;
    return nullptr;
}

namespace {

[[noreturn]] void fail(SourceLoc loc, const std::string& msg) { throw CompileError(msg, loc); }

void check_params(const OpRef& op, const OpInfo& info, SourceLoc loc) {
    if (op.params.size() != info.params.size())
        fail(loc, op.name + " expects " + std::to_string(info.params.size()) + " static parameter(s), got " +
                      std::to_string(op.params.size()));
    for (size_t i = 0; i < info.params.size(); ++i) {
        const bool ok = (info.params[i] == PK::Int && std::holds_alternative<std::int64_t>(op.params[i])) ||
                        (info.params[i] == PK::Op && std::holds_alternative<OpRef>(op.params[i])) ||
                        (info.params[i] == PK::Type && std::holds_alternative<DataType>(op.params[i]));
        if (!ok) fail(loc, op.name + ": static parameter " + std::to_string(i + 1) + " has the wrong kind");
    }
}

DataType require_array(const OpRef& op, const DataType& in, SourceLoc loc) {
    if (!in.is_array()) fail(loc, op.name + " needs a 2-D array input, got " + in.render());
    return in;
}

// Binary kernels take a 2-tuple of operands.
std::pair<DataType, DataType> binary_operands(const OpRef& op, const DataType& in, SourceLoc loc) {
    if (in.is_tuple() && in.members().size() == 2) return {in.members()[0], in.members()[1]};
    fail(loc, op.name + " needs a pair of operands, got " + in.render());
}

void require_same_scalar(const OpRef& op, const DataType& a, const DataType& b, SourceLoc loc,
                         bool arith = true, bool same_exp = true) {
    if (!a.is_scalar() || !b.is_scalar())
        fail(loc, op.name + " needs scalar operands, got (" + a.render() + "," + b.render() + ")");
    if (arith && (a.kind() == DataType::Kind::Bool || b.kind() == DataType::Kind::Bool))
        fail(loc, op.name + " is not defined on bool");
    if (a.kind() != b.kind())
        fail(loc, op.name + ": operand kinds differ (" + a.render() + " vs " + b.render() + ")");
    if (same_exp && a.exponent() != b.exponent())
        fail(loc, op.name + ": fixed-point exponents differ (" + a.render() + " vs " + b.render() + ")");
}

DataType widen_same_kind(const DataType& a, const DataType& b, int extra) {
    const int bits = std::max(a.scalar_bits(), b.scalar_bits()) + extra;
    return a.is_signed() ? DataType::int_fp(bits, a.exponent()) : DataType::uint_fp(bits, a.exponent());
}

} // namespace

DataType type_apply(const Program& prog, const OpRef& op, const DataType& in, SourceLoc loc) {
    const OpInfo* info = find_op(op.name);
    if (!info) {
        // user-defined function reference
        const UserFunction* fn = prog.find(op.name);
        if (!fn) fail(loc, "unknown operator '" + op.name + "'");
        if (!op.params.empty()) fail(loc, "user function '" + op.name + "' takes no static parameters");
        if (!(in == fn->input_type))
            fail(loc, op.name + " expects " + fn->input_type.render() + ", got " + in.render());
        if (fn->output_node < 0 || !fn->nodes[fn->output_node].type.valid())
            fail(loc, "function '" + op.name + "' is not typed yet (define before use)");
        return fn->nodes[fn->output_node].type;
    }
    check_params(op, *info, loc);
    const std::string& n = op.name;

    if (n == "Map") {
        const OpRef& f = op.op_param(0);
        if (in.is_array())
            return DataType::array2d(type_apply(prog, f, in.elem(), loc), in.width(), in.height());
        if (in.is_sparse())
            return DataType::sparse_array2d(type_apply(prog, f, in.elem(), loc), in.width(), in.height());
        fail(loc, "Map needs an array or sparse array input, got " + in.render());
    }
    if (n == "Reduce") {
        require_array(op, in, loc);
        const DataType e = in.elem();
        const DataType combined = type_apply(prog, op.op_param(0), DataType::tuple({e, e}), loc);
        // reduction runs at element width; scalar results wrap back to it
        if (!(combined == e) && !(combined.is_scalar() && e.is_scalar() && combined.kind() == e.kind()))
            fail(loc, "Reduce function result " + combined.render() + " is not reducible to " + e.render());
        return e;
    }
    if (n == "Stencil") {
        require_array(op, in, loc);
        const auto l = op.int_param(0), r = op.int_param(1), b = op.int_param(2), t = op.int_param(3);
        if (l > r || b > t) fail(loc, "Stencil offsets must satisfy l<=r and b<=t");
        return DataType::array2d(DataType::array2d(in.elem(), r - l + 1, t - b + 1), in.width(), in.height());
    }
    if (n == "Pad") {
        require_array(op, in, loc);
        const auto l = op.int_param(0), r = op.int_param(1), b = op.int_param(2), t = op.int_param(3);
        if (l < 0 || r < 0 || b < 0 || t < 0) fail(loc, "Pad amounts must be non-negative");
        return DataType::array2d(in.elem(), in.width() + l + r, in.height() + b + t);
    }
    if (n == "Crop") {
        require_array(op, in, loc);
        const auto l = op.int_param(0), r = op.int_param(1), b = op.int_param(2), t = op.int_param(3);
        if (l < 0 || r < 0 || b < 0 || t < 0) fail(loc, "Crop amounts must be non-negative");
        const std::int64_t w = in.width() - l - r, h = in.height() - b - t;
        if (w < 1 || h < 1) fail(loc, "Crop removes the whole image: " + in.render());
        return DataType::array2d(in.elem(), w, h);
    }
    if (n == "Zip") {
        if (!in.is_tuple() || in.members().size() < 2) fail(loc, "Zip needs a tuple of arrays, got " + in.render());
        std::vector<DataType> elems;
        std::int64_t w = 0, h = 0;
        for (const auto& m : in.members()) {
            if (!m.is_array()) fail(loc, "Zip members must be arrays, got " + m.render());
            if (elems.empty()) {
                w = m.width();
                h = m.height();
            } else if (m.width() != w || m.height() != h) {
                fail(loc, "Zip members have mismatched sizes: " + in.render());
            }
            elems.push_back(m.elem());
        }
        return DataType::array2d(DataType::tuple(elems), w, h);
    }
    if (n == "FanIn") {
        if (!in.is_tuple()) fail(loc, "FanIn needs a tuple input, got " + in.render());
        return in;
    }
    if (n == "FanOut") {
        const auto k = op.int_param(0);
        if (k < 1) fail(loc, "FanOut count must be positive");
        return DataType::tuple(std::vector<DataType>((size_t)k, in));
    }
    if (n == "Index") {
        if (!in.is_tuple()) fail(loc, "Index needs a tuple input, got " + in.render());
        const auto k = op.int_param(0);
        if (k < 0 || k >= (std::int64_t)in.members().size())
            fail(loc, "Index " + std::to_string(k) + " out of range for " + in.render());
        return in.members()[(size_t)k];
    }
    if (n == "Downsample") {
        require_array(op, in, loc);
        const auto sx = op.int_param(0), sy = op.int_param(1);
        if (sx < 1 || sy < 1) fail(loc, "Downsample factors must be positive");
        if (in.width() % sx || in.height() % sy)
            fail(loc, "Downsample factors must divide the array size: " + in.render());
        return DataType::array2d(in.elem(), in.width() / sx, in.height() / sy);
    }
    if (n == "Filter") {
        require_array(op, in, loc);
        if (!in.elem().is_tuple() || in.elem().members().size() != 2 ||
            in.elem().members()[1].kind() != DataType::Kind::Bool)
            fail(loc, "Filter needs an array of (value, bool) pairs, got " + in.render());
        if (op.int_param(0) < 0 || op.int_param(1) < 0) fail(loc, "Filter L and B annotations must be >= 0");
        return DataType::sparse_array2d(in.elem().members()[0], in.width(), in.height());
    }
    if (n == "Broadcast") {
        const auto w = op.int_param(0), h = op.int_param(1);
        if (w < 1 || h < 1) fail(loc, "Broadcast size must be positive");
        return DataType::array2d(in, w, h);
    }
    if (n == "Pack") {
        if (!in.is_tuple()) fail(loc, "Pack needs a tuple input, got " + in.render());
        for (const auto& m : in.members())
            if (!(m == in.members()[0])) fail(loc, "Pack members must share one type, got " + in.render());
        return DataType::array2d(in.members()[0], (std::int64_t)in.members().size(), 1);
    }

    // pointwise kernels
    if (n == "Add" || n == "AddAsync" || n == "Sub") {
        auto [a, b] = binary_operands(op, in, loc);
        require_same_scalar(op, a, b, loc);
        if (n == "Sub") return DataType::int_fp(std::max(a.scalar_bits(), b.scalar_bits()) + 1, a.exponent());
        return widen_same_kind(a, b, 1);
    }
    if (n == "Mul") {
        auto [a, b] = binary_operands(op, in, loc);
        require_same_scalar(op, a, b, loc, /*arith=*/true, /*same_exp=*/false); // exponents add

        const int bits = a.scalar_bits() + b.scalar_bits();
        const int exp = a.exponent() + b.exponent();
        return a.is_signed() ? DataType::int_fp(bits, exp) : DataType::uint_fp(bits, exp);
    }
    if (n == "Min" || n == "Max") {
        auto [a, b] = binary_operands(op, in, loc);
        require_same_scalar(op, a, b, loc);
        if (!(a == b)) fail(loc, n + " operands must have identical types");
        return a;
    }
    if (n == "MinFst") {
        auto [a, b] = binary_operands(op, in, loc);
        if (!(a == b) || !a.is_tuple() || a.members().empty() || !a.members()[0].is_scalar())
            fail(loc, "MinFst needs two identical tuples keyed by a scalar first member, got " + in.render());
        return a;
    }
    if (n == "AbsDiff") {
        auto [a, b] = binary_operands(op, in, loc);
        require_same_scalar(op, a, b, loc);
        return DataType::uint_fp(std::max(a.scalar_bits(), b.scalar_bits()), a.exponent());
    }
    if (n == "Abs" || n == "Neg") {
        if (!in.is_scalar() || in.kind() == DataType::Kind::Bool)
            fail(loc, n + " needs a numeric scalar, got " + in.render());
        return in;
    }
    if (n == "Gt" || n == "Ge" || n == "Lt" || n == "Le" || n == "Eq" || n == "Ne") {
        auto [a, b] = binary_operands(op, in, loc);
        require_same_scalar(op, a, b, loc, /*arith=*/n == "Eq" || n == "Ne" ? false : true);
        if (!(a == b)) fail(loc, n + " operands must have identical types");
        return DataType::boolean();
    }
    if (n == "Mux") {
        if (!in.is_tuple() || in.members().size() != 3 || in.members()[0].kind() != DataType::Kind::Bool ||
            !(in.members()[1] == in.members()[2]))
            fail(loc, "Mux needs (bool, T, T), got " + in.render());
        return in.members()[1];
    }
    if (n == "AddMSBs" || n == "RemoveMSBs") {
        if (!in.is_scalar() || in.kind() == DataType::Kind::Bool)
            fail(loc, n + " needs a numeric scalar, got " + in.render());
        const int d = (int)op.int_param(0);
        if (d < 0) fail(loc, n + " amount must be >= 0");
        const int bits = n == "AddMSBs" ? in.scalar_bits() + d : in.scalar_bits() - d;
        if (bits < 1) fail(loc, "RemoveMSBs leaves no bits on " + in.render());
        if (in.kind() == DataType::Kind::Bits) return DataType::bits(bits);
        return in.is_signed() ? DataType::int_fp(bits, in.exponent()) : DataType::uint_fp(bits, in.exponent());
    }
    if (n == "Rshift" || n == "Lshift") {
        if (!in.is_scalar() || in.kind() == DataType::Kind::Bool)
            fail(loc, n + " needs a numeric scalar, got " + in.render());
        if (op.int_param(0) < 0) fail(loc, n + " amount must be >= 0");
        return in;
    }
    if (n == "Id") return in;
    if (n == "Fst" || n == "Snd") {
        if (!in.is_tuple() || in.members().size() < 2) fail(loc, n + " needs a tuple, got " + in.render());
        return in.members()[n == "Fst" ? 0 : 1];
    }
    if (n == "SignBit") {
        if (!in.is_signed()) fail(loc, "SignBit needs a signed scalar, got " + in.render());
        return DataType::boolean();
    }
    if (n == "Not") {
        if (in.kind() != DataType::Kind::Bool) fail(loc, "Not needs bool, got " + in.render());
        return in;
    }
    if (n == "And" || n == "Or") {
        auto [a, b] = binary_operands(op, in, loc);
        if (a.kind() != DataType::Kind::Bool || b.kind() != DataType::Kind::Bool)
            fail(loc, n + " needs bool operands, got " + in.render());
        return DataType::boolean();
    }
    fail(loc, "operator '" + n + "' has no typing rule");
}

std::vector<Diagnostic> validate_graph(const Program& prog, UserFunction& fn) {
    std::vector<Diagnostic> diags;
    auto bad = [&](SourceLoc loc, std::string msg) { diags.push_back({std::move(msg), loc}); };

    const int n = (int)fn.nodes.size();
    if (n == 0) {
        bad({}, "function '" + fn.name + "' has no nodes");
        return diags;
    }
    if (fn.output_node < 0 || fn.output_node >= n) {
        bad({}, "function '" + fn.name + "' has no designated output");
        return diags;
    }

    int inputs = 0;
    for (int i = 0; i < n; ++i) {
        const FNode& nd = fn.nodes[i];
        if (nd.kind == FNode::Kind::Input) {
            ++inputs;
            if (fn.input_node != i) bad(nd.loc, "input node not registered as the function input");
        }
        for (int a : nd.args)
            if (a < 0 || a >= n) bad(nd.loc, "argument handle out of range");
        if (nd.kind == FNode::Kind::Apply && nd.args.size() != 1)
            bad(nd.loc, "application takes exactly one value argument");
        if (nd.kind == FNode::Kind::Concat && nd.args.empty()) bad(nd.loc, "Concat needs at least one member");
    }
    if (inputs != 1) bad({}, "function '" + fn.name + "' must have exactly one Input, has " + std::to_string(inputs));
    if (!diags.empty()) return diags;

    // Kahn topological order; leftover nodes are on a cycle.
    std::vector<int> indeg(n, 0);
    std::vector<std::vector<int>> users(n);
    for (int i = 0; i < n; ++i)
        for (int a : fn.nodes[i].args) {
            ++indeg[i];
            users[a].push_back(i);
        }
    std::vector<int> order, ready;
    for (int i = 0; i < n; ++i)
        if (indeg[i] == 0) ready.push_back(i);
    while (!ready.empty()) {
        int v = ready.back();
        ready.pop_back();
        order.push_back(v);
        for (int u : users[v])
            if (--indeg[u] == 0) ready.push_back(u);
    }
    if ((int)order.size() != n) {
        for (int i = 0; i < n; ++i)
            if (indeg[i] > 0) {
                bad(fn.nodes[i].loc, "cycle detected through node " + std::to_string(i) + " in '" + fn.name + "'");
                break;
            }
        return diags;
    }

    for (int v : order) {
        FNode& nd = fn.nodes[v];
        bool args_ok = true;
        for (int a : nd.args) args_ok &= fn.nodes[a].type.valid();
        if (!args_ok) continue;
        switch (nd.kind) {
        case FNode::Kind::Input:
            nd.type = fn.input_type;
            break;
        case FNode::Kind::Const:
            nd.type = nd.constant.type();
            break;
        case FNode::Kind::Concat: {
            std::vector<DataType> ms;
            for (int a : nd.args) ms.push_back(fn.nodes[a].type);
            nd.type = ms.size() == 1 ? ms[0] : DataType::tuple(std::move(ms));
            break;
        }
        case FNode::Kind::Apply:
            try {
                nd.type = type_apply(prog, nd.op, fn.nodes[nd.args[0]].type, nd.loc);
            } catch (const CompileError& e) {
                bad(nd.loc, e.what());
            }
            break;
        }
    }
    if (diags.empty() && !fn.nodes[fn.output_node].type.valid())
        bad({}, "output of '" + fn.name + "' could not be typed");
    return diags;
}

void type_check(Program& prog) {
    for (auto& fn : prog.funcs) {
        auto diags = validate_graph(prog, fn);
        if (!diags.empty()) throw CompileError(diags[0].message, diags[0].loc);
    }
}

} // namespace hwpc
