#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hwpc/frontend/parser.hpp"
#include "hwpc/sdf.hpp"

using namespace hwpc;

static RateMap rates_of(const std::string& src, Rat in = Rat(1)) {
    Program p = parse_pipeline(src);
    return propagate_rates(p, p.top(), in);
}

TEST_CASE("downsample quarters the rate; cascades multiply") {
    Program p = parse_pipeline(R"(
func main(x: u8[16,16]) {
  a = Downsample<2,2>(x)
  b = Downsample<2,2>(a)
  return b
})");
    auto r = propagate_rates(p, p.top(), Rat(1));
    REQUIRE(r.ok());
    const UserFunction& fn = p.top();
    CHECK(r.rate[fn.input_node] == Rat(1));
    CHECK(r.rate[fn.output_node] == Rat(1, 16));
    // intermediate edge
    int mid = fn.nodes[fn.output_node].args[0];
    CHECK(r.rate[mid] == Rat(1, 4));
}

TEST_CASE("map preserves the rate; utilization equals R") {
    auto r = rates_of("func main(x: u8[8,8]) { return Map<Rshift<1>>(x) }");
    REQUIRE(r.ok());
    CHECK(r.rate.back() == Rat(1));
    auto r2 = rates_of("func main(x: u8[8,8]) { return Map<Rshift<1>>(x) }", Rat(1, 4));
    CHECK(r2.rate.back() == Rat(1, 4));
}

TEST_CASE("pad makes the padded edge the bottleneck") {
    Program p = parse_pipeline(R"(
func main(x: u8[64,64]) {
  padded = Pad<8,8,4,4>(x)
  return Crop<8,8,4,4>(padded)
})");
    auto r = propagate_rates(p, p.top(), Rat(1));
    REQUIRE(r.ok());
    const UserFunction& fn = p.top();
    int pad_node = fn.nodes[fn.output_node].args[0];
    CHECK(r.rate[pad_node] == Rat(1));
    CHECK(r.rate[fn.input_node] == Rat(64 * 64, 80 * 72));
    CHECK(r.rate[fn.output_node] == Rat(64 * 64, 80 * 72));
    // site requirements are relative to the input regardless of normalization
    CHECK(site_requirement(r, fn, pad_node, Rat(1)) == Rat(80 * 72, 64 * 64));
    CHECK(site_requirement(r, fn, fn.input_node, Rat(2)) == Rat(2));
}

TEST_CASE("rate conservation along paths") {
    Program p = parse_pipeline(R"(
func main(x: u8[32,32]) {
  a = Downsample<2,1>(x)
  b = Map<AddMSBs<8>>(a)
  c = Downsample<2,2>(b)
  d = Crop<1,1,1,1>(c)
  return d
})");
    auto r = propagate_rates(p, p.top(), Rat(1));
    REQUIRE(r.ok());
    const UserFunction& fn = p.top();
    // product of node ratios: 1/2 * 1 * 1/4 * (6*14)/(8*16)
    CHECK(r.rate[fn.output_node] == Rat(1, 2) * Rat(1, 4) * Rat(6 * 14, 8 * 16));
}

TEST_CASE("inconsistent join flows are diagnosed naming both edges") {
    Program p = parse_pipeline(R"(
func main(x: u8[8,8]) {
  small = Downsample<2,2>(x)
  packed = FanIn(Concat(x, small))
  return Index<0>(packed)
})");
    auto r = propagate_rates(p, p.top(), Rat(1));
    CHECK(!r.ok());
    REQUIRE(!r.diagnostics.empty());
    CHECK(r.diagnostics[0].message.find("inconsistent rates") != std::string::npos);
    CHECK(r.diagnostics[0].message.find("64") != std::string::npos);
    CHECK(r.diagnostics[0].message.find("16") != std::string::npos);
}

TEST_CASE("propagation is deterministic") {
    const char* src = R"(
func main(x: u8[16,16]) {
  a = Pad<2,2,2,2>(x)
  b = Stencil<-1,0,-1,0>(a)
  c = Map<Id>(b)
  return c
})";
    auto r1 = rates_of(src);
    auto r2 = rates_of(src);
    CHECK(r1.rate == r2.rate);
    CHECK(r1.flow == r2.flow);
}
