#include "dsp48sim/gemm_ref.hpp"

namespace dsp48sim {

Mat ref_gemm(const Mat& a, const Mat& b) {
    if (a.cols != b.rows) throw StimulusError("ref_gemm shape mismatch");
    Mat out(a.rows, b.cols);
    for (std::int64_t i = 0; i < a.rows; ++i) {
        for (std::int64_t k = 0; k < a.cols; ++k) {
            const std::int64_t av = a.at(i, k);
            if (av == 0) continue;
            for (std::int64_t j = 0; j < b.cols; ++j) {
                out.at(i, j) += av * b.at(k, j);
            }
        }
    }
    return out;
}

Mat ref_gemm_wrapped(const Mat& a, const Mat& b, int width) {
    Mat out = ref_gemm(a, b);
    for (auto& v : out.data) v = wrap_signed(v, width);
    return out;
}

std::vector<std::int64_t> ref_gated_sum(const std::vector<std::vector<std::int64_t>>& s0,
                                        const std::vector<std::vector<std::int64_t>>& s1,
                                        const std::vector<std::vector<std::int64_t>>& w_ab,
                                        const std::vector<std::vector<std::int64_t>>& w_c, int lane_width) {
    const std::size_t lanes = w_ab.empty() ? 0 : w_ab[0].size();
    std::vector<std::int64_t> acc(lanes, 0);
    for (std::size_t t = 0; t < s0.size(); ++t) {
        for (std::size_t s = 0; s < s0[t].size(); ++s) {
            for (std::size_t l = 0; l < lanes; ++l) {
                if (s0[t][s]) acc[l] += w_ab[s][l];
                if (s1[t][s]) acc[l] += w_c[s][l];
            }
        }
    }
    for (auto& v : acc) v = wrap_signed(v, lane_width);
    return acc;
}

} // namespace dsp48sim
