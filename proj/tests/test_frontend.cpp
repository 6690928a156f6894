#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hwpc/frontend/ops.hpp"
#include "hwpc/frontend/parser.hpp"

using namespace hwpc;

static DataType u8() { return DataType::uint_fp(8); }

TEST_CASE("typing rules of the standard library") {
    Program p;
    auto img = DataType::array2d(u8(), 1920, 1080);

    // stencil offsets are signed: patch is (r-l+1) x (t-b+1)
    OpRef stencil{"Stencil", {std::int64_t(-7), std::int64_t(0), std::int64_t(-7), std::int64_t(0)}};
    CHECK(type_apply(p, stencil, img) == DataType::array2d(DataType::array2d(u8(), 8, 8), 1920, 1080));

    OpRef mul{"Mul", {}};
    CHECK(type_apply(p, OpRef{"Map", {mul}}, DataType::array2d(DataType::tuple({u8(), u8()}), 8, 8)) ==
          DataType::array2d(DataType::uint_fp(16), 8, 8));

    auto u32 = DataType::uint_fp(32);
    CHECK(type_apply(p, OpRef{"Reduce", {OpRef{"AddAsync", {}}}}, DataType::array2d(u32, 8, 8)) == u32);

    // pad then crop with the reference parameters restores the size
    OpRef pad{"Pad", {std::int64_t(8), std::int64_t(8), std::int64_t(4), std::int64_t(4)}};
    OpRef crop{"Crop", {std::int64_t(12), std::int64_t(4), std::int64_t(8), std::int64_t(0)}};
    auto padded = type_apply(p, pad, img);
    CHECK(padded == DataType::array2d(u8(), 1936, 1088));
    CHECK(type_apply(p, crop, padded) == img);

    CHECK(type_apply(p, OpRef{"Downsample", {std::int64_t(2), std::int64_t(2)}}, img) ==
          DataType::array2d(u8(), 960, 540));

    auto masked = DataType::array2d(DataType::tuple({u8(), DataType::boolean()}), 16, 16);
    CHECK(type_apply(p, OpRef{"Filter", {std::int64_t(0), std::int64_t(8)}}, masked) ==
          DataType::sparse_array2d(u8(), 16, 16));

    CHECK(type_apply(p, OpRef{"AddMSBs", {std::int64_t(24)}}, u8()) == u32);
    CHECK(type_apply(p, OpRef{"RemoveMSBs", {std::int64_t(24)}}, u32) == u8());
    CHECK(type_apply(p, OpRef{"Rshift", {std::int64_t(11)}}, u32) == u32);

    // widening rules
    CHECK(type_apply(p, OpRef{"Add", {}}, DataType::tuple({u8(), u8()})) == DataType::uint_fp(9));
    CHECK(type_apply(p, OpRef{"Sub", {}}, DataType::tuple({u8(), u8()})) == DataType::int_fp(9));
    CHECK_THROWS(type_apply(p, OpRef{"Add", {}}, DataType::tuple({u8(), DataType::int_fp(8)})));
    // fixed-point exponents must agree
    CHECK_THROWS(type_apply(p, OpRef{"Add", {}},
                            DataType::tuple({DataType::uint_fp(8, -1), DataType::uint_fp(8, 0)})));
    CHECK(type_apply(p, OpRef{"Mul", {}},
                     DataType::tuple({DataType::uint_fp(8, -1), DataType::uint_fp(8, -2)})) ==
          DataType::uint_fp(16, -3));

    // errors carry operator-specific messages
    CHECK_THROWS_WITH_AS(type_apply(p, OpRef{"Zip", {}}, u8()), doctest::Contains("Zip"), CompileError);
    CHECK_THROWS(type_apply(p, OpRef{"Crop", {std::int64_t(5), std::int64_t(5), std::int64_t(0), std::int64_t(0)}},
                            DataType::array2d(u8(), 8, 8)));
}

static const char* kConvSource = R"(
# 8x8 convolution against constant coefficients
func ConvInner(win: (u8,u8)[8,8]) {
  products = Map<Mul>(win)
  wide = Map<AddMSBs<16>>(products)
  sum = Reduce<AddAsync>(wide)
  return RemoveMSBs<24>(Rshift<11>(sum))
}
func main(inp: u8[64,64]) {
  padded = Pad<8,8,4,4>(inp)
  stencils = Stencil<-7,0,-7,0>(padded)
  coeffs = Broadcast<80,72>(Const<u8[8,8]>([
    1,1,1,1,1,1,1,1, 1,2,2,2,2,2,2,1, 1,2,4,4,4,4,2,1, 1,2,4,8,8,4,2,1,
    1,2,4,8,8,4,2,1, 1,2,4,4,4,4,2,1, 1,2,2,2,2,2,2,1, 1,1,1,1,1,1,1,1]))
  zipped = Zip(stencils, coeffs)
  pairs = Map<Zip>(zipped)
  res = Map<ConvInner>(pairs)
  return Crop<12,4,8,0>(res)
}
)";

TEST_CASE("parses and types the convolution pipeline") {
    Program p = parse_pipeline(kConvSource);
    REQUIRE(p.funcs.size() == 2);
    const UserFunction& top = p.top();
    CHECK(top.nodes[top.output_node].type == DataType::array2d(u8(), 64, 64));
    const UserFunction* inner = p.find("ConvInner");
    REQUIRE(inner);
    CHECK(inner->nodes[inner->output_node].type == u8());

    // a validated graph re-validates clean
    UserFunction copy = top;
    CHECK(validate_graph(p, copy).empty());
}

TEST_CASE("parse errors carry position and cause") {
    // static-param arity
    CHECK_THROWS_WITH_AS(parse_pipeline("func main(x: u8[8,8]) { return Crop<12,4>(x) }"),
                         doctest::Contains("4 static parameter"), CompileError);
    // unknown operator
    CHECK_THROWS_WITH_AS(parse_pipeline("func main(x: u8[8,8]) { return Blur(x) }"),
                         doctest::Contains("unknown operator"), CompileError);
    // syntax error
    CHECK_THROWS(parse_pipeline("func main(x: u8[8,8]) { y = }"));
    // unknown name
    CHECK_THROWS_WITH_AS(parse_pipeline("func main(x: u8[8,8]) { return z }"), doctest::Contains("unknown name"),
                         CompileError);
}

TEST_CASE("identity pipeline") {
    Program p = parse_pipeline("func main(x: u8[4,4]) { return x }");
    const UserFunction& f = p.top();
    CHECK(f.output_node == f.input_node);
    CHECK(f.nodes[f.output_node].type == DataType::array2d(u8(), 4, 4));
}

TEST_CASE("print then parse is a fixed point") {
    Program p = parse_pipeline(kConvSource);
    std::string once = print_pipeline(p);
    Program p2 = parse_pipeline(once);
    std::string twice = print_pipeline(p2);
    CHECK(once == twice);
}

TEST_CASE("validate_graph reports cycles without throwing") {
    Program p;
    UserFunction fn;
    fn.name = "main";
    fn.input_type = DataType::array2d(u8(), 4, 4);
    FNode in;
    in.kind = FNode::Kind::Input;
    fn.input_node = fn.add(in);
    FNode a;
    a.kind = FNode::Kind::Apply;
    a.op = {"Id", {}};
    a.args = {2}; // forward reference onto b -> cycle
    fn.add(a);
    FNode b;
    b.kind = FNode::Kind::Apply;
    b.op = {"Id", {}};
    b.args = {1};
    fn.output_node = fn.add(b);
    auto diags = validate_graph(p, fn);
    REQUIRE(!diags.empty());
    CHECK(diags[0].message.find("cycle") != std::string::npos);
}

TEST_CASE("validate_graph reports type mismatches as diagnostics") {
    // Zip of mismatched widths
    Program p = parse_pipeline("func main(x: u8[8,8]) { return x }"); // placeholder for name resolution
    UserFunction fn;
    fn.name = "bad";
    fn.input_type = DataType::array2d(u8(), 8, 8);
    FNode in;
    in.kind = FNode::Kind::Input;
    fn.input_node = fn.add(in);
    FNode ds;
    ds.kind = FNode::Kind::Apply;
    ds.op = {"Downsample", {std::int64_t(2), std::int64_t(2)}};
    ds.args = {0};
    int dsi = fn.add(ds);
    FNode cat;
    cat.kind = FNode::Kind::Concat;
    cat.args = {0, dsi};
    int cati = fn.add(cat);
    FNode zip;
    zip.kind = FNode::Kind::Apply;
    zip.op = {"Zip", {}};
    zip.args = {cati};
    fn.output_node = fn.add(zip);
    auto diags = validate_graph(p, fn);
    REQUIRE(!diags.empty());
    CHECK(diags[0].message.find("mismatched") != std::string::npos);
}
