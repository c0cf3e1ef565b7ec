// INT8 packing arithmetic: two signed 8-bit multiplicands that share one
// multiplier operand ride a single 27x18 multiply as hi*2^18 + lo (formed in
// hardware by the pre-adder from A = hi*2^18 and D = lo). The low lane of the
// product then needs a +1 carried into the high lane whenever it is negative;
// unpack_and_correct() applies that immediately, and deferred_correction_plan()
// gives the accumulator-friendly variant: bias every product by 2^17 through
// the W multiplexer (which makes the low field a clean non-negative residue),
// accumulate raw lanes at 24-bit width, and remove the accumulated bias once
// at readout.
#pragma once

#include <cstdint>

#include "dsp48sim/bits.hpp"

namespace dsp48sim {
namespace packing {

inline constexpr std::int64_t kLaneBias = std::int64_t{1} << 17; // per-product low-lane offset

struct PackedPair {
    std::int64_t hi = 0;       // signed 8-bit
    std::int64_t lo = 0;       // signed 8-bit
    std::int64_t packed27 = 0; // hi * 2^18 + lo, a signed 27-bit value
};

struct LaneProducts {
    std::int64_t p_hi = 0; // signed 18-bit, == hi * w
    std::int64_t p_lo = 0; // signed 18-bit, == lo * w
};

PackedPair pack(std::int64_t hi, std::int64_t lo);

// Recovers the two lane products from p = packed27 * w. Exact for all signed
// 8-bit (hi, lo, w).
LaneProducts unpack_and_correct(std::int64_t p);

// Splits a 2^17-biased sum word into 24-bit lanes: the low 18 bits hold
// (low sum + accumulated bias) as a non-negative residue and the rest is the
// exact high sum. Valid while the biased low field stays inside [0, 2^18),
// i.e. for at most 7 accumulated products per word.
struct BiasedLanes {
    std::int64_t hi = 0;
    std::int64_t lo = 0; // still carries the bias
};
BiasedLanes split_biased(std::int64_t p_biased);

struct CorrectionPlan {
    std::int64_t lane_bias = 0;            // 48-bit RND word added once per product
    std::int64_t final_adjust_hi = 0;      // closing adjustment per lane
    std::int64_t final_adjust_lo = 0;
};

// Plan for accumulating `num_accumulated` raw products: add lane_bias through
// the W multiplexer with each product, split into 24-bit lanes, accumulate,
// then add the closing adjustments (mod 2^24) at readout.
CorrectionPlan deferred_correction_plan(std::int64_t num_accumulated);

// Sweeps all 2^24 (hi, lo, w) triples; returns the number of mismatches
// between unpack_and_correct(pack(hi, lo) * w) and the direct products.
// Parallelized when `parallel` is set; the count is order-independent.
std::int64_t exhaustive_check(bool parallel = true);

} // namespace packing
} // namespace dsp48sim
