// Software oracles the harness checks engine outputs against. Plain loops,
// independent of the slice model and engine scheduling.
#pragma once

#include <cstdint>
#include <vector>

#include "dsp48sim/bits.hpp"

namespace dsp48sim {

// Row-major integer matrix.
struct Mat {
    std::int64_t rows = 0;
    std::int64_t cols = 0;
    std::vector<std::int64_t> data;

    Mat() = default;
    Mat(std::int64_t r, std::int64_t c) : rows(r), cols(c), data(static_cast<std::size_t>(r * c), 0) {}

    std::int64_t& at(std::int64_t r, std::int64_t c) { return data[static_cast<std::size_t>(r * cols + c)]; }
    std::int64_t at(std::int64_t r, std::int64_t c) const { return data[static_cast<std::size_t>(r * cols + c)]; }

    bool operator==(const Mat& o) const { return rows == o.rows && cols == o.cols && data == o.data; }
};

// Exact integer GEMM: out = a * b, 64-bit accumulation.
Mat ref_gemm(const Mat& a, const Mat& b);

// GEMM with each output wrapped to a signed `width`-bit value.
Mat ref_gemm_wrapped(const Mat& a, const Mat& b, int width);

// Spike-gated weight sum: for chain lane l over `ticks` steps and all slices,
// sum s0[t][slice] * w_ab[slice][l] + s1[t][slice] * w_c[slice][l], wrapped to
// `lane_width` bits.
std::vector<std::int64_t> ref_gated_sum(const std::vector<std::vector<std::int64_t>>& s0,
                                        const std::vector<std::vector<std::int64_t>>& s1,
                                        const std::vector<std::vector<std::int64_t>>& w_ab,
                                        const std::vector<std::vector<std::int64_t>>& w_c, int lane_width);

} // namespace dsp48sim
