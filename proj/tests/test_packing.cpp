#include <doctest.h>

#include <vector>

#include "dsp48sim/packing.hpp"
#include "dsp48sim/rng.hpp"

using namespace dsp48sim;
using namespace dsp48sim::packing;

TEST_CASE("pack formula") {
    CHECK(pack(0, 0).packed27 == 0);
    CHECK(pack(3, -2).packed27 == 3 * 262144 - 2);
    CHECK(pack(3, -2).packed27 == 786430);
    const auto extreme = pack(-128, -128);
    CHECK(extreme.packed27 == -33554560);
    CHECK(fits_signed(extreme.packed27, 27));
    CHECK_THROWS_AS(pack(128, 0), StimulusError);
    CHECK_THROWS_AS(pack(0, -129), StimulusError);
}

TEST_CASE("packing is injective over its domain") {
    // 2^16 pairs, distinct packed values by direct enumeration.
    std::vector<char> seen(1 << 27, 0);
    for (int hi = -128; hi <= 127; ++hi) {
        for (int lo = -128; lo <= 127; ++lo) {
            const auto idx = static_cast<std::size_t>(to_bits(pack(hi, lo).packed27, 27));
            REQUIRE(seen[idx] == 0);
            seen[idx] = 1;
        }
    }
    CHECK(true);
}

TEST_CASE("unpack_and_correct worked examples") {
    // (hi=3, lo=-2, w=5): p = 786430*5 = 3932150; floor(p/2^18) = 14 and the
    // negative low lane forces the +1.
    const std::int64_t p1 = pack(3, -2).packed27 * 5;
    CHECK(p1 == 3932150);
    CHECK((p1 >> 18) == 14);
    auto lp1 = unpack_and_correct(p1);
    CHECK(lp1.p_hi == 15);
    CHECK(lp1.p_lo == -10);

    const std::int64_t p2 = pack(-1, 1).packed27 * 7;
    CHECK(p2 == -1835001);
    auto lp2 = unpack_and_correct(p2);
    CHECK(lp2.p_hi == -7);
    CHECK(lp2.p_lo == 7);

    auto lp3 = unpack_and_correct(0);
    CHECK(lp3.p_hi == 0);
    CHECK(lp3.p_lo == 0);
}

TEST_CASE("exhaustive 2^24 sweep has zero failures") {
    CHECK(exhaustive_check(true) == 0);
}

TEST_CASE("deferred correction plan") {
    CHECK(deferred_correction_plan(0).final_adjust_lo == 0);
    CHECK(deferred_correction_plan(0).final_adjust_hi == 0);

    // Single product: biased accumulation then closing adjustment equals the
    // immediately corrected lanes.
    {
        const auto plan = deferred_correction_plan(1);
        const std::int64_t raw = pack(3, -2).packed27 * 5;
        const auto lanes = split_biased(raw + plan.lane_bias);
        const std::int64_t lo = wrap_signed(lanes.lo + plan.final_adjust_lo, 24);
        const std::int64_t hi = wrap_signed(lanes.hi + plan.final_adjust_hi, 24);
        CHECK(hi == 15);
        CHECK(lo == -10);
    }

    // 1000 random products: deferred lane sums equal the sum of individually
    // corrected products, mod 2^24.
    {
        Rng rng(0x1234);
        const int n = 1000;
        const auto plan = deferred_correction_plan(n);
        std::int64_t acc_hi = 0;
        std::int64_t acc_lo = 0;
        std::int64_t oracle_hi = 0;
        std::int64_t oracle_lo = 0;
        for (int i = 0; i < n; ++i) {
            const std::int64_t hi = rng.int8();
            const std::int64_t lo = rng.int8();
            const std::int64_t w = rng.int8();
            const std::int64_t raw = pack(hi, lo).packed27 * w;
            const auto lanes = split_biased(raw + plan.lane_bias);
            acc_hi = wrap_signed(acc_hi + lanes.hi, 24);
            acc_lo = wrap_signed(acc_lo + lanes.lo, 24);
            oracle_hi += hi * w;
            oracle_lo += lo * w;
        }
        CHECK(wrap_signed(acc_hi + plan.final_adjust_hi, 24) == wrap_signed(oracle_hi, 24));
        CHECK(wrap_signed(acc_lo + plan.final_adjust_lo, 24) == wrap_signed(oracle_lo, 24));
    }

    // Property: sequences up to 4096 products keep the equivalence mod 2^24.
    {
        Rng rng(0x777);
        for (int rep = 0; rep < 8; ++rep) {
            const int n = static_cast<int>(rng.range(1, 4096));
            const auto plan = deferred_correction_plan(n);
            std::int64_t acc_hi = 0;
            std::int64_t acc_lo = 0;
            std::int64_t oracle_hi = 0;
            std::int64_t oracle_lo = 0;
            for (int i = 0; i < n; ++i) {
                const std::int64_t hi = rng.int8();
                const std::int64_t lo = rng.int8();
                const std::int64_t w = rng.int8();
                const std::int64_t raw = pack(hi, lo).packed27 * w;
                const auto lanes = split_biased(raw + plan.lane_bias);
                acc_hi = wrap_signed(acc_hi + lanes.hi, 24);
                acc_lo = wrap_signed(acc_lo + lanes.lo, 24);
                oracle_hi = wrap_signed(oracle_hi + hi * w, 24);
                oracle_lo = wrap_signed(oracle_lo + lo * w, 24);
            }
            CHECK(wrap_signed(acc_hi + plan.final_adjust_hi, 24) == oracle_hi);
            CHECK(wrap_signed(acc_lo + plan.final_adjust_lo, 24) == oracle_lo);
        }
    }
}

TEST_CASE("split_biased is the exact euclidean split for single biased products") {
    Rng rng(0x55);
    for (int i = 0; i < 100000; ++i) {
        const std::int64_t hi = rng.int8();
        const std::int64_t lo = rng.int8();
        const std::int64_t w = rng.int8();
        const std::int64_t biased = pack(hi, lo).packed27 * w + kLaneBias;
        const auto lanes = split_biased(biased);
        REQUIRE(lanes.hi == hi * w);
        REQUIRE(lanes.lo == lo * w + kLaneBias);
        REQUIRE(lanes.lo >= 0);
        REQUIRE(lanes.lo < (1 << 18));
    }
    CHECK(true);
}
