#include "hwpc/interp.hpp"

#include <functional>

#include "hwpc/frontend/ops.hpp"

namespace hwpc {

namespace {

Program empty_prog;

Value make_scalar(const DataType& t, BigInt v) { return Value::scalar(t, std::move(v)); }

Value bool_val(bool b) { return Value::scalar(DataType::boolean(), b ? 1 : 0); }

} // namespace

Value eval_scalar_kernel(const OpRef& op, const Value& in) {
    return eval_operator(empty_prog, op, in);
}

Value eval_operator(const Program& prog, const OpRef& op, const Value& in) {
    const DataType out_t = type_apply(prog, op, in.type());
    const std::string& n = op.name;

    auto bin = [&](auto&& f) {
        const Value& a = in.elems()[0];
        const Value& b = in.elems()[1];
        return f(a, b);
    };

    // structural operators -------------------------------------------------
    if (n == "Map") {
        const OpRef& f = op.op_param(0);
        if (in.type().is_array()) {
            std::vector<Value> out;
            out.reserve(in.elems().size());
            for (const auto& e : in.elems()) out.push_back(eval_operator(prog, f, e));
            return Value::array(out_t, std::move(out));
        }
        Value::Sparse sp = in.sparse_payload();
        for (auto& e : sp.elems) e = eval_operator(prog, f, e);
        return Value::sparse(out_t, std::move(sp));
    }
    if (n == "Reduce") {
        const OpRef& f = op.op_param(0);
        const DataType elem_t = in.type().elem();
        // balanced binary tree over row-major order; each combine wraps back
        // to the element type, matching the hardware reduction datapath
        std::function<Value(std::int64_t, std::int64_t)> tree = [&](std::int64_t lo, std::int64_t cnt) -> Value {
            if (cnt == 1) return in.elems()[lo];
            const std::int64_t half = cnt / 2;
            Value l = tree(lo, half), r = tree(lo + half, cnt - half);
            Value c = eval_operator(prog, f, Value::tuple(DataType::tuple({elem_t, elem_t}), {l, r}));
            if (c.type().is_scalar()) return Value::scalar(elem_t, c.scalar_int());
            return c;
        };
        return tree(0, (std::int64_t)in.elems().size());
    }
    if (n == "Stencil") {
        const auto l = op.int_param(0), r = op.int_param(1), b = op.int_param(2), t = op.int_param(3);
        const std::int64_t w = in.type().width(), h = in.type().height();
        const DataType patch_t = out_t.elem();
        std::vector<Value> out;
        out.reserve(w * h);
        for (std::int64_t y = 0; y < h; ++y)
            for (std::int64_t x = 0; x < w; ++x) {
                std::vector<Value> patch;
                patch.reserve(patch_t.width() * patch_t.height());
                for (std::int64_t dy = b; dy <= t; ++dy)
                    for (std::int64_t dx = l; dx <= r; ++dx) {
                        const std::int64_t sx = x + dx, sy = y + dy;
                        if (sx >= 0 && sx < w && sy >= 0 && sy < h)
                            patch.push_back(in.at(sx, sy));
                        else
                            patch.push_back(Value::zero(in.type().elem())); // out-of-bounds taps read zero
                    }
                out.push_back(Value::array(patch_t, std::move(patch)));
            }
        return Value::array(out_t, std::move(out));
    }
    if (n == "Pad") {
        const auto l = op.int_param(0), b = op.int_param(2);
        const std::int64_t w = in.type().width(), h = in.type().height();
        std::vector<Value> out;
        out.reserve(out_t.width() * out_t.height());
        for (std::int64_t y = 0; y < out_t.height(); ++y)
            for (std::int64_t x = 0; x < out_t.width(); ++x) {
                const std::int64_t sx = x - l, sy = y - b;
                if (sx >= 0 && sx < w && sy >= 0 && sy < h)
                    out.push_back(in.at(sx, sy));
                else
                    out.push_back(Value::zero(in.type().elem()));
            }
        return Value::array(out_t, std::move(out));
    }
    if (n == "Crop") {
        const auto l = op.int_param(0), b = op.int_param(2);
        std::vector<Value> out;
        out.reserve(out_t.width() * out_t.height());
        for (std::int64_t y = 0; y < out_t.height(); ++y)
            for (std::int64_t x = 0; x < out_t.width(); ++x) out.push_back(in.at(x + l, y + b));
        return Value::array(out_t, std::move(out));
    }
    if (n == "Zip") {
        const auto& members = in.elems();
        const std::int64_t count = members[0].type().width() * members[0].type().height();
        std::vector<Value> out;
        out.reserve(count);
        for (std::int64_t i = 0; i < count; ++i) {
            std::vector<Value> t;
            t.reserve(members.size());
            for (const auto& m : members) t.push_back(m.elems()[i]);
            out.push_back(Value::tuple(out_t.elem(), std::move(t)));
        }
        return Value::array(out_t, std::move(out));
    }
    if (n == "FanIn") return in;
    if (n == "FanOut") {
        std::vector<Value> copies((size_t)op.int_param(0), in);
        return Value::tuple(out_t, std::move(copies));
    }
    if (n == "Index") return in.elems()[(size_t)op.int_param(0)];
    if (n == "Downsample") {
        const auto sx = op.int_param(0), sy = op.int_param(1);
        std::vector<Value> out;
        out.reserve(out_t.width() * out_t.height());
        for (std::int64_t y = 0; y < out_t.height(); ++y)
            for (std::int64_t x = 0; x < out_t.width(); ++x) out.push_back(in.at(x * sx, y * sy));
        return Value::array(out_t, std::move(out));
    }
    if (n == "Filter") {
        Value::Sparse sp;
        const auto& elems = in.elems();
        for (std::int64_t i = 0; i < (std::int64_t)elems.size(); ++i) {
            if (elems[i].elems()[1].scalar_bool()) {
                sp.elems.push_back(elems[i].elems()[0]);
                sp.positions.push_back(i);
            }
        }
        return Value::sparse(out_t, std::move(sp));
    }
    if (n == "Broadcast") {
        std::vector<Value> out((size_t)(out_t.width() * out_t.height()), in);
        return Value::array(out_t, std::move(out));
    }
    if (n == "Pack") {
        std::vector<Value> elems = in.elems();
        return Value::array(out_t, std::move(elems));
    }

    // pointwise kernels ------------------------------------------------------
    if (n == "Add" || n == "AddAsync")
        return bin([&](const Value& a, const Value& b) { return make_scalar(out_t, a.scalar_int() + b.scalar_int()); });
    if (n == "Sub")
        return bin([&](const Value& a, const Value& b) { return make_scalar(out_t, a.scalar_int() - b.scalar_int()); });
    if (n == "Mul")
        return bin([&](const Value& a, const Value& b) { return make_scalar(out_t, a.scalar_int() * b.scalar_int()); });
    if (n == "Min")
        return bin([&](const Value& a, const Value& b) { return a.scalar_int() <= b.scalar_int() ? a : b; });
    if (n == "Max")
        return bin([&](const Value& a, const Value& b) { return a.scalar_int() >= b.scalar_int() ? a : b; });
    if (n == "MinFst")
        return bin([&](const Value& a, const Value& b) {
            return a.elems()[0].scalar_int() <= b.elems()[0].scalar_int() ? a : b;
        });
    if (n == "AbsDiff")
        return bin([&](const Value& a, const Value& b) {
            BigInt d = a.scalar_int() - b.scalar_int();
            if (d < 0) d = -d;
            return make_scalar(out_t, d);
        });
    if (n == "Abs") {
        BigInt v = in.scalar_int();
        return make_scalar(out_t, v < 0 ? -v : v);
    }
    if (n == "Neg") return make_scalar(out_t, -in.scalar_int());
    if (n == "Gt") return bin([&](const Value& a, const Value& b) { return bool_val(a.scalar_int() > b.scalar_int()); });
    if (n == "Ge") return bin([&](const Value& a, const Value& b) { return bool_val(a.scalar_int() >= b.scalar_int()); });
    if (n == "Lt") return bin([&](const Value& a, const Value& b) { return bool_val(a.scalar_int() < b.scalar_int()); });
    if (n == "Le") return bin([&](const Value& a, const Value& b) { return bool_val(a.scalar_int() <= b.scalar_int()); });
    if (n == "Eq") return bin([&](const Value& a, const Value& b) { return bool_val(a.scalar_int() == b.scalar_int()); });
    if (n == "Ne") return bin([&](const Value& a, const Value& b) { return bool_val(a.scalar_int() != b.scalar_int()); });
    if (n == "Mux") return in.elems()[0].scalar_bool() ? in.elems()[1] : in.elems()[2];
    if (n == "AddMSBs") return make_scalar(out_t, in.scalar_int());
    if (n == "RemoveMSBs") return make_scalar(out_t, in.scalar_int());
    if (n == "Rshift") return make_scalar(out_t, logical_rshift(in.scalar_int(), (int)op.int_param(0), in.type()));
    if (n == "Lshift") return make_scalar(out_t, in.scalar_int() << (int)op.int_param(0));
    if (n == "Id") return in;
    if (n == "Fst") return in.elems()[0];
    if (n == "Snd") return in.elems()[1];
    if (n == "SignBit") return bool_val(in.scalar_int() < 0);
    if (n == "Not") return bool_val(!in.scalar_bool());
    if (n == "And") return bin([&](const Value& a, const Value& b) { return bool_val(a.scalar_bool() && b.scalar_bool()); });
    if (n == "Or") return bin([&](const Value& a, const Value& b) { return bool_val(a.scalar_bool() || b.scalar_bool()); });

    // user function: evaluate its graph
    const UserFunction* fn = prog.find(n);
    if (fn) return eval(prog, *fn, in);
    throw CompileError("operator '" + n + "' has no evaluation rule");
}

Value eval(const Program& prog, const UserFunction& fn, const Value& input) {
    if (!(input.type() == fn.input_type))
        throw CompileError("eval: input is " + input.type().render() + ", function '" + fn.name + "' expects " +
                           fn.input_type.render());
    std::vector<Value> memo(fn.nodes.size());
    std::vector<char> done(fn.nodes.size(), 0);

    std::function<const Value&(int)> get = [&](int id) -> const Value& {
        if (done[id]) return memo[id];
        const FNode& nd = fn.nodes[id];
        switch (nd.kind) {
        case FNode::Kind::Input:
            memo[id] = input;
            break;
        case FNode::Kind::Const:
            memo[id] = nd.constant;
            break;
        case FNode::Kind::Concat: {
            if (nd.args.size() == 1) {
                memo[id] = get(nd.args[0]);
            } else {
                std::vector<Value> ms;
                ms.reserve(nd.args.size());
                for (int a : nd.args) ms.push_back(get(a));
                memo[id] = Value::tuple(nd.type, std::move(ms));
            }
            break;
        }
        case FNode::Kind::Apply:
            memo[id] = eval_operator(prog, nd.op, get(nd.args[0]));
            break;
        }
        done[id] = 1;
        return memo[id];
    };
    return get(fn.output_node);
}

} // namespace hwpc
