#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <vector>

#include "hwpc/frontend/parser.hpp"
#include "hwpc/interp.hpp"

using namespace hwpc;

static DataType u8t() { return DataType::uint_fp(8); }

static Value u8_image(const std::vector<std::int64_t>& px, std::int64_t w, std::int64_t h) {
    std::vector<Value> elems;
    elems.reserve(px.size());
    for (auto v : px) elems.push_back(Value::scalar(u8t(), v));
    return Value::array(DataType::array2d(u8t(), w, h), std::move(elems));
}

static std::vector<std::int64_t> test_pixels(std::int64_t w, std::int64_t h, std::uint32_t seed) {
    std::vector<std::int64_t> px(w * h);
    std::uint32_t s = seed;
    for (auto& p : px) {
        s = s * 1664525u + 1013904223u;
        p = (s >> 16) & 0xff;
    }
    return px;
}

// Independent nested-loop oracle for the padded 8x8 convolution pipeline
// (pad<8,8,4,4>, stencil<-7,0,-7,0>, crop<12,4,8,0>, >>11, low 8 bits).
static std::vector<std::int64_t> conv8x8_oracle(const std::vector<std::int64_t>& img, std::int64_t w,
                                                std::int64_t h, const std::int64_t coef[64], int shift) {
    auto padded_at = [&](std::int64_t u, std::int64_t v) -> std::int64_t {
        const std::int64_t sx = u - 8, sy = v - 4;
        if (sx < 0 || sx >= w || sy < 0 || sy >= h) return 0;
        return img[sy * w + sx];
    };
    std::vector<std::int64_t> out(w * h);
    for (std::int64_t oy = 0; oy < h; ++oy)
        for (std::int64_t ox = 0; ox < w; ++ox) {
            const std::int64_t px = ox + 12, py = oy + 8;
            std::uint64_t sum = 0;
            for (int j = 0; j < 8; ++j)
                for (int i = 0; i < 8; ++i)
                    sum += (std::uint64_t)(padded_at(px - 7 + i, py - 7 + j) * coef[j * 8 + i]);
            out[oy * w + ox] = (sum >> shift) & 0xff;
        }
    return out;
}

static const char* kConvSource = R"(
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

TEST_CASE("convolution pipeline matches the nested-loop oracle") {
    Program p = parse_pipeline(kConvSource);
    auto px = test_pixels(64, 64, 7);
    Value out = eval(p, p.top(), u8_image(px, 64, 64));

    static const std::int64_t coef[64] = {1, 1, 1, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 1, 1, 2, 4, 4, 4, 4,
                                          2, 1, 1, 2, 4, 8, 8, 4, 2, 1, 1, 2, 4, 8, 8, 4, 2, 1, 1, 2, 4, 4,
                                          4, 4, 2, 1, 1, 2, 2, 2, 2, 2, 2, 1, 1, 1, 1, 1, 1, 1, 1, 1};
    auto want = conv8x8_oracle(px, 64, 64, coef, 11);
    REQUIRE(out.type() == DataType::array2d(u8t(), 64, 64));
    for (std::int64_t i = 0; i < 64 * 64; ++i) CHECK(out.elems()[i].scalar_int() == want[i]);
}

TEST_CASE("identity kernel leaves the image unchanged") {
    const char* src = R"(
func Tap(win: (u8,u8)[3,3]) {
  products = Map<Mul>(win)
  wide = Map<AddMSBs<16>>(products)
  sum = Reduce<AddAsync>(wide)
  return RemoveMSBs<24>(sum)
}
func main(inp: u8[16,16]) {
  padded = Pad<1,1,1,1>(inp)
  stencils = Stencil<-1,1,-1,1>(padded)
  coeffs = Broadcast<18,18>(Const<u8[3,3]>([0,0,0, 0,1,0, 0,0,0]))
  pairs = Map<Zip>(Zip(stencils, coeffs))
  res = Map<Tap>(pairs)
  return Crop<1,1,1,1>(res)
}
)";
    Program p = parse_pipeline(src);
    auto px = test_pixels(16, 16, 3);
    Value out = eval(p, p.top(), u8_image(px, 16, 16));
    for (std::int64_t i = 0; i < 16 * 16; ++i) CHECK(out.elems()[i].scalar_int() == px[i]);
}

TEST_CASE("all-ones 8x8 kernel with >>6 returns the constant on the interior") {
    std::string src(kConvSource);
    // same pipeline, uniform kernel and matching scale
    size_t pos = src.find("Rshift<11>");
    REQUIRE(pos != std::string::npos);
    src.replace(pos, 10, "Rshift<6>");
    pos = src.find("coeffs = Broadcast<80,72>(Const<u8[8,8]>([");
    REQUIRE(pos != std::string::npos);
    size_t end = src.find("]))", pos);
    std::string ones = "coeffs = Broadcast<80,72>(Const<u8[8,8]>([";
    for (int i = 0; i < 64; ++i) ones += i ? ",1" : "1";
    src = src.substr(0, pos) + ones + src.substr(end);

    Program p = parse_pipeline(src);
    const std::int64_t c = 77;
    Value out = eval(p, p.top(), u8_image(std::vector<std::int64_t>(64 * 64, c), 64, 64));
    for (std::int64_t oy = 3; oy <= 59; ++oy)
        for (std::int64_t ox = 3; ox <= 59; ++ox) CHECK(out.at(ox, oy).scalar_int() == c);
}

TEST_CASE("downsample keeps top-left samples") {
    std::vector<std::int64_t> ramp(16);
    for (int i = 0; i < 16; ++i) ramp[i] = i;
    Value in = u8_image(ramp, 4, 4);
    Value out = eval_operator({}, OpRef{"Downsample", {std::int64_t(2), std::int64_t(2)}}, in);
    REQUIRE(out.type() == DataType::array2d(u8t(), 2, 2));
    CHECK(out.at(0, 0).scalar_int() == 0);
    CHECK(out.at(1, 0).scalar_int() == 2);
    CHECK(out.at(0, 1).scalar_int() == 8);
    CHECK(out.at(1, 1).scalar_int() == 10);
}

TEST_CASE("filter keeps masked elements in scan order") {
    auto pair_t = DataType::tuple({u8t(), DataType::boolean()});
    std::vector<Value> elems;
    const bool mask[4] = {true, false, true, false};
    for (int i = 0; i < 4; ++i)
        elems.push_back(Value::tuple(pair_t, {Value::scalar(u8t(), i + 1),
                                              Value::scalar(DataType::boolean(), mask[i] ? 1 : 0)}));
    Value in = Value::array(DataType::array2d(pair_t, 4, 1), std::move(elems));
    Value out = eval_operator({}, OpRef{"Filter", {std::int64_t(0), std::int64_t(4)}}, in);
    const auto& sp = out.sparse_payload();
    REQUIRE(sp.elems.size() == 2);
    CHECK(sp.elems[0].scalar_int() == 1);
    CHECK(sp.elems[1].scalar_int() == 3);
    CHECK(sp.positions == std::vector<std::int64_t>{0, 2});
}

TEST_CASE("filter invariants over random masks") {
    auto pair_t = DataType::tuple({u8t(), DataType::boolean()});
    std::uint32_t s = 99;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Value> elems;
        for (int i = 0; i < 24; ++i) {
            s = s * 1664525u + 1013904223u;
            elems.push_back(Value::tuple(
                pair_t, {Value::scalar(u8t(), (s >> 8) & 0xff), Value::scalar(DataType::boolean(), (s >> 3) & 1)}));
        }
        Value in = Value::array(DataType::array2d(pair_t, 6, 4), std::move(elems));
        Value out = eval_operator({}, OpRef{"Filter", {std::int64_t(0), std::int64_t(24)}}, in);
        const auto& sp = out.sparse_payload();
        CHECK(sp.elems.size() <= 24);
        for (size_t i = 1; i < sp.positions.size(); ++i) CHECK(sp.positions[i] > sp.positions[i - 1]);
    }
}

TEST_CASE("reduce with pre-widening counts 64 ones") {
    Value ones = u8_image(std::vector<std::int64_t>(64, 1), 8, 8);
    Value wide = eval_operator({}, OpRef{"Map", {OpRef{"AddMSBs", {std::int64_t(24)}}}}, ones);
    Value sum = eval_operator({}, OpRef{"Reduce", {OpRef{"Add", {}}}}, wide);
    CHECK(sum.type() == DataType::uint_fp(32));
    CHECK(sum.scalar_int() == 64);
}

TEST_CASE("map composition is pointwise composition") {
    auto px = test_pixels(8, 8, 17);
    Value in = u8_image(px, 8, 8);
    Value a = eval_operator({}, OpRef{"Map", {OpRef{"Rshift", {std::int64_t(1)}}}},
                            eval_operator({}, OpRef{"Map", {OpRef{"Rshift", {std::int64_t(2)}}}}, in));
    Value b = eval_operator({}, OpRef{"Map", {OpRef{"Rshift", {std::int64_t(3)}}}}, in);
    CHECK(a == b);
}

TEST_CASE("map over sparse arrays transforms elements and keeps positions") {
    Value::Sparse sp;
    sp.elems = {Value::scalar(u8t(), 8), Value::scalar(u8t(), 16)};
    sp.positions = {1, 7};
    Value in = Value::sparse(DataType::sparse_array2d(u8t(), 4, 2), std::move(sp));
    Value out = eval_operator({}, OpRef{"Map", {OpRef{"Rshift", {std::int64_t(3)}}}}, in);
    const auto& osp = out.sparse_payload();
    CHECK(osp.positions == std::vector<std::int64_t>{1, 7});
    CHECK(osp.elems[0].scalar_int() == 1);
    CHECK(osp.elems[1].scalar_int() == 2);
}

TEST_CASE("hardware wrap semantics at operator boundaries") {
    // RemoveMSBs wraps modulo the narrowed width
    Value v = Value::scalar(DataType::uint_fp(16), 0x1234);
    Value low = eval_scalar_kernel(OpRef{"RemoveMSBs", {std::int64_t(8)}}, v);
    CHECK(low.scalar_int() == 0x34);
    // signed arithmetic shift floors
    Value s = Value::scalar(DataType::int_fp(8), -5);
    CHECK(eval_scalar_kernel(OpRef{"Rshift", {std::int64_t(1)}}, s).scalar_int() == -3);
    // reduce combine wraps back to the element width
    Value small = u8_image({200, 200, 1, 1}, 4, 1);
    Value sum = eval_operator({}, OpRef{"Reduce", {OpRef{"AddAsync", {}}}}, small);
    CHECK(sum.type() == u8t());
    CHECK(sum.scalar_int() == ((200 + 200 + 1 + 1) & 0xff));
}

TEST_CASE("fanout and index duplicate and project") {
    Value in = u8_image({1, 2, 3, 4}, 2, 2);
    Value fo = eval_operator({}, OpRef{"FanOut", {std::int64_t(2)}}, in);
    REQUIRE(fo.type().is_tuple());
    Value first = eval_operator({}, OpRef{"Index", {std::int64_t(0)}}, fo);
    CHECK(first == in);
}

TEST_CASE("minfst selects by the first tuple member") {
    auto pair_t = DataType::tuple({DataType::uint_fp(16), u8t()});
    auto in_t = DataType::tuple({pair_t, pair_t});
    Value a = Value::tuple(pair_t, {Value::scalar(DataType::uint_fp(16), 40), Value::scalar(u8t(), 1)});
    Value b = Value::tuple(pair_t, {Value::scalar(DataType::uint_fp(16), 39), Value::scalar(u8t(), 2)});
    Value out = eval_scalar_kernel(OpRef{"MinFst", {}}, Value::tuple(in_t, {a, b}));
    CHECK(out.elems()[1].scalar_int() == 2);
    // ties break toward the first argument
    Value c = Value::tuple(pair_t, {Value::scalar(DataType::uint_fp(16), 39), Value::scalar(u8t(), 3)});
    Value tie = eval_scalar_kernel(OpRef{"MinFst", {}}, Value::tuple(in_t, {b, c}));
    CHECK(tie.elems()[1].scalar_int() == 2);
}
