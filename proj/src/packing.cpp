#include "dsp48sim/packing.hpp"

#include <string>

namespace dsp48sim {
namespace packing {

PackedPair pack(std::int64_t hi, std::int64_t lo) {
    if (!fits_signed(hi, 8) || !fits_signed(lo, 8)) {
        throw StimulusError("pack operands must be signed 8-bit, got (" + std::to_string(hi) + ", " +
                            std::to_string(lo) + ")");
    }
    PackedPair pp;
    pp.hi = hi;
    pp.lo = lo;
    pp.packed27 = hi * (std::int64_t{1} << 18) + lo;
    return pp;
}

LaneProducts unpack_and_correct(std::int64_t p) {
    LaneProducts lp;
    lp.p_lo = sign_extend(static_cast<std::uint64_t>(p), 18);
    std::int64_t hi = p >> 18; // arithmetic shift == floor division by 2^18
    if (lp.p_lo < 0) hi += 1;
    lp.p_hi = wrap_signed(hi, 18);
    return lp;
}

BiasedLanes split_biased(std::int64_t p_biased) {
    BiasedLanes l;
    l.lo = static_cast<std::int64_t>(to_bits(p_biased, 18)); // non-negative residue
    l.hi = p_biased >> 18;
    return l;
}

CorrectionPlan deferred_correction_plan(std::int64_t num_accumulated) {
    if (num_accumulated < 0) throw StimulusError("num_accumulated must be non-negative");
    CorrectionPlan plan;
    plan.lane_bias = kLaneBias;
    plan.final_adjust_hi = 0;
    plan.final_adjust_lo = wrap_signed(-num_accumulated * kLaneBias, 24);
    return plan;
}

std::int64_t exhaustive_check(bool parallel) {
    std::int64_t failures = 0;
#pragma omp parallel for collapse(2) schedule(static) reduction(+ : failures) if (parallel)
    for (int hi = -128; hi <= 127; ++hi) {
        for (int lo = -128; lo <= 127; ++lo) {
            const std::int64_t packed = static_cast<std::int64_t>(hi) * (1 << 18) + lo;
            for (int w = -128; w <= 127; ++w) {
                const LaneProducts lp = unpack_and_correct(packed * w);
                if (lp.p_hi != static_cast<std::int64_t>(hi) * w || lp.p_lo != static_cast<std::int64_t>(lo) * w) {
                    ++failures;
                }
            }
        }
    }
    return failures;
}

} // namespace packing
} // namespace dsp48sim
