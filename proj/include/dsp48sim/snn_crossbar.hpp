// Spiking crossbar engine: each slice acts as a 2x4 synaptic crossbar. Two
// spike bits steer the wide-bus multiplexers per tick — X selects the A:B
// concatenated weight set or zero, Y selects the C-port weight set or zero —
// and the FOUR12 ALU accumulates four 12-bit lanes down the chain's P
// cascade. Membrane sums accumulate over ticks in the readout path, wrapping
// at the lane width.
//
// Weight residency mirrors the weight-stationary engine: with DSP_FETCH_AB
// the A:B set prefetches through the stage-1 A/B cascade registers (the
// stationary copy lives in stage 2), while the C-port set always needs
// modeled fabric registers because the C input has no cascade. CLB_FETCH
// keeps both sets in fabric registers on the same schedule.
//
// The A:B concatenation carries the top lane through the sign-extended
// 27-bit A port, so lane 3 of the A:B set is limited to signed 9 bits;
// narrower weights (the calibration scenarios use 8) sign-extend into lanes.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dsp48sim/column.hpp"
#include "dsp48sim/dsp48e2.hpp"
#include "dsp48sim/trace.hpp"
#include "dsp48sim/ws_engine.hpp" // ExecPolicy

namespace dsp48sim {

enum class SnnFetch { ClbFetch, DspFetchAb };

struct CrossbarConfig {
    int chains = 4;
    int chain_len = 16; // calibration geometry: 4 chains of length 16
    int weight_bits = 8;
    SnnFetch fetch_variant = SnnFetch::DspFetchAb;
    ExecPolicy exec = ExecPolicy::Auto;
};

// Per-slice synaptic weights: one 4-lane set on A:B, one on C.
struct SynapseWeights {
    std::array<std::int64_t, 4> ab{};
    std::array<std::int64_t, 4> c{};
};

// Standalone single-slice crossbar step per the opmode-steering scheme:
// acc_l += s0 * ab[l] + s1 * c[l], 12-bit lane wrap, no multiplier involved.
// Each step loads the weight registers on one tick and applies the spike
// gating on the next, leaving the accumulating P register untouched in
// between (Z = P holds it).
struct CrossbarSliceState {
    CrossbarSliceState();
    Dsp48e2Slice slice;
};
std::array<std::int64_t, 4> step_crossbar(CrossbarSliceState& st, bool s0, bool s1,
                                          const std::array<std::int64_t, 4>& weights_ab,
                                          const std::array<std::int64_t, 4>& weights_c);

class SnnCrossbar {
public:
    explicit SnnCrossbar(const CrossbarConfig& cfg);

    int slice_count() const { return cfg_.chains * cfg_.chain_len; }
    std::int64_t modeled_clb_weight_bits() const;

    // Streams the next weight tensor (chains x chain_len slices); returns the
    // ticks consumed (chain_len). A second prefetch before commit_weights is
    // a scheduling error.
    std::int64_t prefetch_weights(const std::vector<std::vector<SynapseWeights>>& weights);
    void commit_weights();

    // spikes[t][chain][slice] = pair of spike bits; returns the membrane
    // matrix (chains x 4 lanes), accumulated over all ticks mod 2^12.
    struct SpikePair {
        bool s0 = false;
        bool s1 = false;
    };
    Mat run(const std::vector<std::vector<std::vector<SpikePair>>>& spikes);

    void attach_trace(WaveformTrace* trace) { trace_ = trace; }

private:
    void validate_weights(const std::vector<std::vector<SynapseWeights>>& weights) const;
    std::int64_t ab_word(const SynapseWeights& w) const;
    std::int64_t c_word(const SynapseWeights& w) const;

    CrossbarConfig cfg_;
    std::vector<Dsp48e2Slice> slices_; // chains x chain_len
    std::vector<Dsp48e2Outputs> prev_out_;
    // fabric-held weights: C set always, A:B set too under CLB_FETCH
    std::vector<std::vector<std::int64_t>> clb_c_chain_;
    std::vector<std::vector<std::int64_t>> clb_ab_chain_;
    std::vector<std::vector<std::int64_t>> resident_c_;
    std::vector<std::vector<std::int64_t>> resident_ab_clb_;
    bool prefetch_pending_ = false;
    bool weights_resident_ = false;
    WaveformTrace* trace_ = nullptr;
};

// Oracle-facing helper: dense run from plain matrices. spike_matrix is
// ticks x (chains*chain_len*2) bits, weight rows follow slice order with
// 8 lanes each (ab0..ab3, c0..c3).
Mat run_crossbar(const CrossbarConfig& cfg, const Mat& spike_matrix, const Mat& weight_rows, int ticks);

} // namespace dsp48sim
