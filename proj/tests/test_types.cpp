#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hwpc/data_type.hpp"
#include "hwpc/interface_type.hpp"
#include "hwpc/rational.hpp"
#include "hwpc/schedule_type.hpp"

using namespace hwpc;

static DataType u8() { return DataType::uint_fp(8); }

TEST_CASE("bit widths compose") {
    CHECK(u8().bit_width() == 8);
    CHECK(DataType::array2d(u8(), 8, 8).bit_width() == 512);
    CHECK(DataType::tuple({u8(), DataType::int_fp(16)}).bit_width() == 24);
    CHECK(DataType::boolean().bit_width() == 1);
    CHECK(DataType::bits(5).bit_width() == 5);
    // sparse: maxW*maxH elements plus count field of ceil(log2(n+1)) bits
    CHECK(DataType::sparse_array2d(u8(), 4, 4).bit_width() == 16 * 8 + 5);
    CHECK(DataType::sparse_array2d(DataType::boolean(), 1, 1).bit_width() == 1 + 1);
}

TEST_CASE("renders mirror the type syntax") {
    CHECK(u8().render() == "u8");
    CHECK(DataType::int_fp(12, -2).render() == "i12@-2");
    CHECK(DataType::array2d(u8(), 1920, 1080).render() == "u8[1920,1080]");
    CHECK(DataType::tuple({u8(), u8()}).render() == "(u8,u8)");
    CHECK(DataType::sparse_array2d(u8(), 16, 16).render() == "u8[<=16,16]");
    CHECK(ScheduleType::vec(u8(), 2, 1, 8, 8).render() == "u8[2,1;8,8}");
    CHECK(ScheduleType::seq(ScheduleType::vec(u8(), 4, 4, 8, 8), 256, 256).render() == "u8[4,4;8,8}{256,256}");
    CHECK(InterfaceType::stream(ScheduleType::vec(u8(), 1, 1, 8, 8)).render() == "Stream(u8[1,1;8,8})");
}

TEST_CASE("schedule type invariants") {
    // vector width must divide the array size
    CHECK_THROWS(ScheduleType::vec(u8(), 3, 1, 8, 8));
    auto v = ScheduleType::vec(u8(), 2, 2, 8, 4);
    CHECK(v.elements_per_transaction() == 4);
    CHECK(v.total_transactions() == 8);
    CHECK(v.token_type() == DataType::array2d(u8(), 2, 2));
    CHECK(v.frame_type() == DataType::array2d(u8(), 8, 4));
    auto s = ScheduleType::seq(v, 3, 3);
    CHECK(s.total_transactions() == 72);
    CHECK(s.token_type() == v.token_type());
}

TEST_CASE("optimize_schedule_type picks the lowest valid vector width") {
    auto big = DataType::array2d(u8(), 1920, 1080);
    auto opt = optimize_schedule_type(big, {Rat(1)});
    CHECK(opt == ScheduleType::vec(u8(), 1, 1, 1920, 1080));

    // smallest divisor of 8 that is >= 7 is 8
    auto small = DataType::array2d(u8(), 8, 8);
    CHECK(optimize_schedule_type(small, {Rat(7)}) == ScheduleType::vec(u8(), 8, 1, 8, 8));

    // sub-unit requirements return 1x1; the caller carries the deficit as rate
    CHECK(optimize_schedule_type(big, {Rat(1, 4)}) == ScheduleType::vec(u8(), 1, 1, 1920, 1080));

    // beyond-width requirements grow the height
    CHECK(optimize_schedule_type(small, {Rat(16)}) == ScheduleType::vec(u8(), 8, 2, 8, 8));
    CHECK(optimize_schedule_type(small, {Rat(64)}) == ScheduleType::vec(u8(), 8, 8, 8, 8));
    CHECK_THROWS(optimize_schedule_type(small, {Rat(65)}));
    CHECK_THROWS(optimize_schedule_type(u8(), {Rat(1)}));
}

TEST_CASE("optimize_schedule_type properties over all divisor pairs") {
    // output satisfies divisibility, meets the requirement, and no smaller
    // valid width-first vector does
    auto base = DataType::array2d(u8(), 12, 10);
    for (int num = 1; num <= 120; ++num)
        for (int den : {1, 2, 3, 4}) {
            Rat req(num, den);
            if (req > Rat(120)) continue;
            auto s = optimize_schedule_type(base, {req});
            CHECK(12 % s.vec_w() == 0);
            CHECK(10 % s.vec_h() == 0);
            const std::int64_t v = s.vec_w() * s.vec_h();
            CHECK(Rat(v) >= (req < Rat(1) ? Rat(1) : req));
            if (req > Rat(1) && s.vec_h() == 1)
                for (std::int64_t vw = 1; vw < s.vec_w(); ++vw)
                    if (12 % vw == 0) CHECK(Rat(vw) < req);
        }
}

TEST_CASE("throughput is rate times vector width") {
    auto sched = ScheduleType::vec(u8(), 2, 1, 8, 8);
    RatedInterface i1{InterfaceType::stream(sched), Rat(1)};
    CHECK(i1.throughput() == Rat(2));
    RatedInterface i2{InterfaceType::stream(ScheduleType::vec(u8(), 1, 1, 8, 8)), Rat(1, 4)};
    CHECK(i2.throughput() == Rat(1, 4));

    // the full tradeoff curve: halving V doubles R at equal throughput
    for (std::int64_t vw : {1, 2, 4, 8}) {
        RatedInterface i{InterfaceType::stream(ScheduleType::vec(u8(), vw, 1, 8, 8)), Rat(1, vw)};
        CHECK(i.throughput() == Rat(1));
    }
}

TEST_CASE("can_substitute lattice") {
    auto s = ScheduleType::vec(u8(), 1, 1, 8, 8);
    RatedInterface stat{InterfaceType::static_(s), Rat(1)};
    RatedInterface strm{InterfaceType::stream(s), Rat(1)};

    // Static converts to Stream; back-pressure cannot be removed
    CHECK(can_substitute(stat, strm));
    CHECK(!can_substitute(strm, stat));

    // serialize: higher vector width at matching throughput
    RatedInterface wide{InterfaceType::stream(ScheduleType::vec(u8(), 2, 1, 8, 8)), Rat(1)};
    RatedInterface narrow{InterfaceType::stream(s), Rat(1)};
    CHECK(can_substitute(wide, narrow));
    // surplus throughput is fine into a stream, not into a static
    RatedInterface slow{InterfaceType::stream(s), Rat(1, 2)};
    CHECK(can_substitute(wide, slow));
    CHECK(!can_substitute(slow, wide));

    // fan-in: tuple of streams drives a stream of tuples
    auto pair_sched = ScheduleType::vec(DataType::tuple({u8(), u8()}), 1, 1, 8, 8);
    RatedInterface bundle{InterfaceType::tuple_of_streams({InterfaceType::stream(s), InterfaceType::stream(s)}),
                          Rat(1)};
    RatedInterface merged{InterfaceType::stream(pair_sched), Rat(1)};
    CHECK(can_substitute(bundle, merged));
    CHECK(can_substitute(merged, bundle));
}

TEST_CASE("can_substitute is reflexive and transitive") {
    auto s1 = ScheduleType::vec(u8(), 1, 1, 8, 8);
    auto s2 = ScheduleType::vec(u8(), 2, 1, 8, 8);
    auto s4 = ScheduleType::vec(u8(), 4, 1, 8, 8);
    std::vector<RatedInterface> pool = {
        {InterfaceType::static_(s1), Rat(1)},   {InterfaceType::stream(s1), Rat(1)},
        {InterfaceType::stream(s1), Rat(1, 2)}, {InterfaceType::static_(s2), Rat(1, 2)},
        {InterfaceType::stream(s2), Rat(1, 2)}, {InterfaceType::stream(s2), Rat(1)},
        {InterfaceType::stream(s4), Rat(1, 4)}, {InterfaceType::static_(s4, 4), Rat(1, 4)},
    };
    for (const auto& a : pool) CHECK(can_substitute(a, a));
    for (const auto& a : pool)
        for (const auto& b : pool)
            for (const auto& c : pool)
                if (can_substitute(a, b) && can_substitute(b, c)) CHECK(can_substitute(a, c));
}

TEST_CASE("rational helpers") {
    CHECK(rat_ceil(Rat(7, 2)) == 4);
    CHECK(rat_ceil(Rat(-7, 2)) == -3);
    CHECK(rat_floor(Rat(7, 2)) == 3);
    CHECK(rat_floor(Rat(-7, 2)) == -4);
    CHECK(rat_ceil(Rat(4)) == 4);
    CHECK(to_string(Rat(3, 6)) == "1/2");
}
