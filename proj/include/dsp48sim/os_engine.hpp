// Output-stationary engine in two variants.
//
// ENHANCED: per group, `chains_per_group` chains of `chain_len` slices run at
// the fast clock with in-DSP multiplexing: activations hold the 2-stage A
// pipeline (new value every slow tick), weights ping-pong through B1/B2 with
// clock enables of period 4 fast ticks offset by 2, and the B-stage selector
// alternates every fast tick. Each chain emits four partial-sum pairs per
// four fast ticks (one 4x2 output tile contribution per window, a window
// being two slow ticks). A ring accumulator of two cascaded TWO24 slices
// closes a 4-tick loop through two delay registers, circulating one slot per
// tile element pair; slot i is written only on fast ticks congruent to i mod
// 4. Packing compensation: each chain tail adds 2^17 through its W
// multiplexer so the packed psum splits exactly into 24-bit lanes, and the
// accumulate stage's W multiplexer subtracts the two chains' accumulated
// bias (2^18 per tick) through its RND word. Drained results leave through
// the delay registers, four records over four fast ticks.
//
// OFFICIAL: the same chains fed by modeled CLB DDR multiplexers (weight port
// changes every fast tick, double the streamed weight bytes), chain outputs
// corrected and combined across the group in modeled fabric (serial-to-
// parallel flip-flops, LUT adder tree) and accumulated by slow ONE48
// accumulators, two per chain, with an INT26 bias and 29-bit results. The
// same problem finishes in the same number of slow ticks; the output tile is
// identical wherever results fit the ENHANCED 24-bit lanes.
#pragma once

#include <cstdint>
#include <vector>

#include "dsp48sim/column.hpp"
#include "dsp48sim/dsp48e2.hpp"
#include "dsp48sim/gemm_ref.hpp"
#include "dsp48sim/trace.hpp"
#include "dsp48sim/ws_engine.hpp" // ExecPolicy

namespace dsp48sim {

enum class OsVariant { Official, Enhanced };

struct OsConfig {
    int chain_len = 4;        // N, slices per chain; <= 7 with packing
    int chains_per_group = 2; // 2 for the ring pairing (1 = degenerate single-chain group)
    int num_groups = 16;
    OsVariant variant = OsVariant::Enhanced;
    bool packing_enabled = true;
    int acc_lane_width = 24;   // ENHANCED lane width
    int result_width = 29;     // OFFICIAL result width (INT26 bias headroom)
    ExecPolicy exec = ExecPolicy::Auto;

    static OsConfig b1024(OsVariant v) {
        OsConfig c;
        c.chain_len = 4;
        c.chains_per_group = 2;
        c.num_groups = 16;
        c.variant = v;
        c.packing_enabled = true;
        return c;
    }
};

// Pre-arranged per-slice port schedules for one chain slice, window-periodic.
// Index with (fast tick - slice skew) mod 4; values per the in-DSP
// multiplexing waveform.
struct InterleavedStreams {
    // per fast tick within the run, canonical slice (skew 0)
    std::vector<std::int64_t> a_port;
    std::vector<std::int64_t> b_port;
    std::vector<bool> ce_b1;
    std::vector<bool> ce_b2;
    std::vector<StageSel> sel_b;
    int windows = 0;
};

// Builds the canonical interleaved schedule for one chain slice position
// holding weight rows k = window * stride + offset. acts is 4 x K (2 x K
// without packing), wts is K x 2.
InterleavedStreams interleave(const Mat& acts, const Mat& wts, bool packing, int k_offset, int k_stride,
                              int lead_ticks);

struct OsProblem {
    Mat acts;  // (packing ? 4 : 2) x K
    Mat wts;   // K x (2 * num_groups)
    Mat bias;  // num_groups x 2 per-lane bias, may be 0x0 for none
};

struct OsRunResult {
    Mat outputs; // (packing ? 4 : 2) x (2 * num_groups)
    std::int64_t slow_ticks = 0;
    std::int64_t fast_ticks = 0;
    // streamed weight bytes per slice per slow tick on the multiplexed port
    double weight_bytes_per_slice_per_slow_tick = 0.0;
    // psum records transferred to the slow domain per group at readout
    int readout_pairs_per_group = 0;
    // drain records (tick, slot, value) per group, ENHANCED only
    std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> drain_records;
    // slot write log (tick, slot), ENHANCED only
    std::vector<std::pair<std::int64_t, int>> slot_writes;
    std::int64_t readout_tick = 0;
};

class OsEngine {
public:
    explicit OsEngine(const OsConfig& cfg);

    const OsConfig& config() const { return cfg_; }
    int mult_slice_count() const { return cfg_.num_groups * cfg_.chains_per_group * cfg_.chain_len; }
    int acc_slice_count() const {
        return cfg_.variant == OsVariant::Enhanced ? 2 * cfg_.num_groups
                                                   : 2 * cfg_.num_groups * cfg_.chains_per_group;
    }
    int slice_count() const { return mult_slice_count() + acc_slice_count(); }
    int act_rows() const { return cfg_.packing_enabled ? 4 : 2; }

    OsRunResult run(const OsProblem& problem);

    void attach_trace(WaveformTrace* trace) { trace_ = trace; }

private:
    OsRunResult run_enhanced(const OsProblem& p);
    OsRunResult run_official(const OsProblem& p);
    void validate(const OsProblem& p) const;

    OsConfig cfg_;
    WaveformTrace* trace_ = nullptr;
};

} // namespace dsp48sim
