#include "hwpc/frontend/parser.hpp"

#include <cctype>
#include <map>
#include <optional>

#include "hwpc/frontend/ops.hpp"

namespace hwpc {

namespace {

struct Token {
    enum class Kind { Ident, Int, Punct, End };
    Kind kind;
    std::string text;
    std::int64_t value = 0;
    SourceLoc loc;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }
    Token next() {
        Token t = tok_;
        advance();
        return t;
    }
    bool at(const std::string& punct) const { return tok_.kind == Token::Kind::Punct && tok_.text == punct; }
    bool at_ident(const std::string& id) const { return tok_.kind == Token::Kind::Ident && tok_.text == id; }
    Token expect(const std::string& punct) {
        if (!at(punct)) fail("expected '" + punct + "', got '" + tok_.text + "'");
        return next();
    }
    Token expect_ident() {
        if (tok_.kind != Token::Kind::Ident) fail("expected identifier, got '" + tok_.text + "'");
        return next();
    }
    std::int64_t expect_int() {
        bool neg = false;
        if (at("-")) {
            next();
            neg = true;
        }
        if (tok_.kind != Token::Kind::Int) fail("expected integer, got '" + tok_.text + "'");
        std::int64_t v = next().value;
        return neg ? -v : v;
    }
    [[noreturn]] void fail(const std::string& msg) const { throw CompileError(msg, tok_.loc); }

private:
    void advance() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            } else if (c == '\n') {
                ++line_;
                col_ = 1;
                ++pos_;
            } else if (std::isspace((unsigned char)c)) {
                ++col_;
                ++pos_;
            } else {
                break;
            }
        }
        tok_.loc = {line_, col_};
        if (pos_ >= src_.size()) {
            tok_ = {Token::Kind::End, "<eof>", 0, tok_.loc};
            return;
        }
        char c = src_[pos_];
        if (std::isalpha((unsigned char)c) || c == '_') {
            size_t start = pos_;
            while (pos_ < src_.size() && (std::isalnum((unsigned char)src_[pos_]) || src_[pos_] == '_')) {
                ++pos_;
                ++col_;
            }
            tok_ = {Token::Kind::Ident, src_.substr(start, pos_ - start), 0, tok_.loc};
            return;
        }
        if (std::isdigit((unsigned char)c)) {
            size_t start = pos_;
            while (pos_ < src_.size() && std::isdigit((unsigned char)src_[pos_])) {
                ++pos_;
                ++col_;
            }
            std::string text = src_.substr(start, pos_ - start);
            tok_ = {Token::Kind::Int, text, std::stoll(text), tok_.loc};
            return;
        }
        // multi-char punct: <=
        if (c == '<' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
            tok_ = {Token::Kind::Punct, "<=", 0, tok_.loc};
            pos_ += 2;
            col_ += 2;
            return;
        }
        tok_ = {Token::Kind::Punct, std::string(1, c), 0, tok_.loc};
        ++pos_;
        ++col_;
    }

    const std::string& src_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token tok_;
};

class Parser {
public:
    explicit Parser(const std::string& src) : lex_(src) {}

    Program run() {
        Program prog;
        while (lex_.peek().kind != Token::Kind::End) {
            if (!lex_.at_ident("func")) lex_.fail("expected 'func'");
            parse_func(prog);
        }
        if (!prog.funcs.empty()) type_check_all(prog);
        return prog;
    }

    DataType parse_type_only() {
        DataType t = parse_type();
        if (lex_.peek().kind != Token::Kind::End) lex_.fail("trailing text after type");
        return t;
    }

private:
    Lexer lex_;
    Program* prog_ = nullptr;
    UserFunction* fn_ = nullptr;
    std::map<std::string, int> names_;

    void type_check_all(Program& prog) {
        for (auto& fn : prog.funcs) {
            auto diags = validate_graph(prog, fn);
            if (!diags.empty()) throw CompileError(diags[0].message, diags[0].loc);
        }
    }

    static bool scalar_type_name(const std::string& s) {
        if (s == "bool") return true;
        auto digits = [](const std::string& t, size_t from) {
            if (from >= t.size()) return false;
            for (size_t i = from; i < t.size(); ++i)
                if (!std::isdigit((unsigned char)t[i])) return false;
            return true;
        };
        if ((s[0] == 'u' || s[0] == 'i') && digits(s, 1)) return true;
        if (s.rfind("bits", 0) == 0 && digits(s, 4)) return true;
        return false;
    }

    DataType parse_type() {
        DataType base;
        if (lex_.at("(")) {
            lex_.next();
            std::vector<DataType> ms;
            ms.push_back(parse_type());
            while (lex_.at(",")) {
                lex_.next();
                ms.push_back(parse_type());
            }
            lex_.expect(")");
            base = DataType::tuple(std::move(ms));
        } else {
            Token t = lex_.expect_ident();
            if (!scalar_type_name(t.text)) throw CompileError("unknown type '" + t.text + "'", t.loc);
            if (t.text == "bool") {
                base = DataType::boolean();
            } else if (t.text.rfind("bits", 0) == 0) {
                base = DataType::bits(std::stoi(t.text.substr(4)));
            } else {
                int bits = std::stoi(t.text.substr(1));
                int exp = 0;
                if (lex_.at("@")) {
                    lex_.next();
                    exp = (int)lex_.expect_int();
                }
                base = t.text[0] == 'u' ? DataType::uint_fp(bits, exp) : DataType::int_fp(bits, exp);
            }
        }
        while (lex_.at("[")) {
            lex_.next();
            if (lex_.at("<=")) {
                lex_.next();
                std::int64_t w = lex_.expect_int();
                lex_.expect(",");
                std::int64_t h = lex_.expect_int();
                lex_.expect("]");
                base = DataType::sparse_array2d(base, w, h);
            } else {
                std::int64_t w = lex_.expect_int();
                std::int64_t h = 1;
                if (lex_.at(",")) {
                    lex_.next();
                    h = lex_.expect_int();
                }
                lex_.expect("]");
                base = DataType::array2d(base, w, h);
            }
        }
        return base;
    }

    // A static parameter is an int, a type, or an operator reference.
    StaticParam parse_static_param() {
        if (lex_.peek().kind == Token::Kind::Int || lex_.at("-")) return lex_.expect_int();
        if (lex_.at("(")) return parse_type();
        Token id = lex_.peek();
        if (id.kind != Token::Kind::Ident) lex_.fail("expected static parameter");
        if (scalar_type_name(id.text)) return parse_type();
        return parse_op_ref();
    }

    OpRef parse_op_ref() { return parse_op_ref_named(lex_.expect_ident()); }

    OpRef parse_op_ref_named(Token id) {
        OpRef op{id.text, {}};
        if (lex_.at("<")) {
            lex_.next();
            op.params.push_back(parse_static_param());
            while (lex_.at(",")) {
                lex_.next();
                op.params.push_back(parse_static_param());
            }
            lex_.expect(">");
        }
        if (!find_op(op.name) && !prog_->find(op.name))
            throw CompileError("unknown operator '" + op.name + "'", id.loc);
        return op;
    }

    Value parse_literal(const DataType& t, SourceLoc loc) {
        if (t.is_scalar()) {
            if (lex_.at_ident("true")) {
                lex_.next();
                return Value::scalar(t, 1);
            }
            if (lex_.at_ident("false")) {
                lex_.next();
                return Value::scalar(t, 0);
            }
            return Value::scalar(t, BigInt(lex_.expect_int()));
        }
        if (t.is_array()) {
            lex_.expect("[");
            std::vector<Value> elems;
            const std::int64_t count = t.width() * t.height();
            for (std::int64_t i = 0; i < count; ++i) {
                if (i) lex_.expect(",");
                elems.push_back(parse_literal(t.elem(), loc));
            }
            lex_.expect("]");
            return Value::array(t, std::move(elems));
        }
        if (t.is_tuple()) {
            lex_.expect("(");
            std::vector<Value> elems;
            for (size_t i = 0; i < t.members().size(); ++i) {
                if (i) lex_.expect(",");
                elems.push_back(parse_literal(t.members()[i], loc));
            }
            lex_.expect(")");
            return Value::tuple(t, std::move(elems));
        }
        throw CompileError("no literal syntax for " + t.render(), loc);
    }

    int parse_expr() {
        if (lex_.peek().kind != Token::Kind::Ident) lex_.fail("expected expression");
        Token head = lex_.next();

        // anything not followed by '<' or '(' is a plain reference
        if (!lex_.at("<") && !lex_.at("(")) {
            auto it = names_.find(head.text);
            if (it == names_.end()) throw CompileError("unknown name '" + head.text + "'", head.loc);
            return it->second;
        }

        if (head.text == "Const") {
            lex_.expect("<");
            DataType t = parse_type();
            lex_.expect(">");
            lex_.expect("(");
            Value v = parse_literal(t, head.loc);
            lex_.expect(")");
            FNode node;
            node.kind = FNode::Kind::Const;
            node.constant = std::move(v);
            node.loc = head.loc;
            return fn_->add(std::move(node));
        }
        if (head.text == "Concat") {
            lex_.expect("(");
            FNode node;
            node.kind = FNode::Kind::Concat;
            node.loc = head.loc;
            node.args.push_back(parse_expr());
            while (lex_.at(",")) {
                lex_.next();
                node.args.push_back(parse_expr());
            }
            lex_.expect(")");
            return fn_->add(std::move(node));
        }

        OpRef op = parse_op_ref_named(head);
        lex_.expect("(");
        std::vector<int> args;
        args.push_back(parse_expr());
        while (lex_.at(",")) {
            lex_.next();
            args.push_back(parse_expr());
        }
        lex_.expect(")");
        int arg;
        if (args.size() == 1) {
            arg = args[0];
        } else {
            // multi-argument application is an implicit Concat
            FNode cat;
            cat.kind = FNode::Kind::Concat;
            cat.args = std::move(args);
            cat.loc = head.loc;
            arg = fn_->add(std::move(cat));
        }
        FNode node;
        node.kind = FNode::Kind::Apply;
        node.op = std::move(op);
        node.args = {arg};
        node.loc = head.loc;
        return fn_->add(std::move(node));
    }

    void parse_func(Program& prog) {
        prog_ = &prog;
        lex_.next(); // 'func'
        Token name = lex_.expect_ident();
        if (prog.find(name.text)) throw CompileError("function '" + name.text + "' redefined", name.loc);
        lex_.expect("(");
        Token param = lex_.expect_ident();
        lex_.expect(":");
        DataType in_type = parse_type();
        lex_.expect(")");
        lex_.expect("{");

        prog.funcs.push_back({});
        UserFunction& fn = prog.funcs.back();
        fn_ = &fn;
        names_.clear();
        fn.name = name.text;
        fn.input_type = in_type;

        FNode input;
        input.kind = FNode::Kind::Input;
        input.loc = param.loc;
        fn.input_node = fn.add(std::move(input));
        names_[param.text] = fn.input_node;

        while (!lex_.at("}")) {
            if (lex_.at_ident("return")) {
                lex_.next();
                fn.output_node = parse_expr();
                break;
            }
            Token lhs = lex_.expect_ident();
            if (names_.count(lhs.text)) throw CompileError("name '" + lhs.text + "' reassigned", lhs.loc);
            lex_.expect("=");
            names_[lhs.text] = parse_expr();
        }
        lex_.expect("}");
        if (fn.output_node < 0) throw CompileError("function '" + fn.name + "' has no return", name.loc);
        fn_ = nullptr;
    }
};

} // namespace

Program parse_pipeline(const std::string& source) { return Parser(source).run(); }

DataType parse_type(const std::string& text) { return Parser(text).parse_type_only(); }

namespace {

// Full literal form (Value::render truncates long arrays for diagnostics).
std::string render_literal(const Value& v) {
    const DataType& t = v.type();
    if (t.kind() == DataType::Kind::Bool) return v.scalar_bool() ? "true" : "false";
    if (t.is_scalar()) return v.scalar_int().str();
    std::string s = t.is_tuple() ? "(" : "[";
    for (size_t i = 0; i < v.elems().size(); ++i) {
        if (i) s += ",";
        s += render_literal(v.elems()[i]);
    }
    return s + (t.is_tuple() ? ")" : "]");
}

} // namespace

std::string print_pipeline(const Program& prog) {
    std::string out;
    for (const auto& fn : prog.funcs) {
        out += "func " + fn.name + "(x" + std::to_string(fn.input_node) + ": " + fn.input_type.render() + ") {\n";
        for (size_t i = 0; i < fn.nodes.size(); ++i) {
            const FNode& n = fn.nodes[i];
            std::string rhs;
            switch (n.kind) {
            case FNode::Kind::Input:
                continue;
            case FNode::Kind::Const:
                rhs = "Const<" + n.constant.type().render() + ">(" + render_literal(n.constant) + ")";
                break;
            case FNode::Kind::Concat: {
                rhs = "Concat(";
                for (size_t a = 0; a < n.args.size(); ++a) {
                    if (a) rhs += ",";
                    rhs += "x" + std::to_string(n.args[a]);
                }
                rhs += ")";
                break;
            }
            case FNode::Kind::Apply:
                rhs = n.op.render() + "(x" + std::to_string(n.args[0]) + ")";
                break;
            }
            out += "  x" + std::to_string(i) + " = " + rhs + "\n";
        }
        out += "  return x" + std::to_string(fn.output_node) + "\n}\n";
    }
    return out;
}

} // namespace hwpc
