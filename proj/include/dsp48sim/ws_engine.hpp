// Weight-stationary systolic engine: a rows x cols grid of multiplier slices
// plus one accumulator slice terminating each column's P cascade. Activations
// stream in with a +1 tick skew per grid hop; partial sums descend the P
// cascade one slice per tick; outputs de-skew in the readout path.
//
// Weight residency and reload:
//   - The stationary weight lives in a stage-2 input register; the stage-1
//     registers of the same pipeline form the prefetch shift chain (DSP-Fetch)
//     or are replaced by modeled fabric registers (CLB-Fetch) with the exact
//     same schedule.
//   - Reloads run concurrently with compute. At a weight-set boundary the
//     stage-2 capture ripples diagonally with the data wavefront
//     (tick = set_start + row + col + act_stages - 1), and each slice's
//     prefetch burst for the next tile starts on its own swap tick with
//     rows - row pulses. That closes the schedule for
//     rounds_per_weight_set >= rows with zero idle multiplier ticks.
//
// Operand placement:
//   - packing off: weights ride the B pipeline (B1 chain, B2 stationary) and
//     activations the A pipeline, matching the classic in-DSP prefetch
//     configuration. The A-side depth (1 or 2 stages) is configurable.
//   - packing on: each slice holds a weight pair packed as hi*2^18 + lo,
//     which needs the 27-bit port, so the pair rides the A pipeline (A1
//     chain, A2 stationary) and activations the B pipeline. Lane products
//     separate per slice through the packing module's biased split and the
//     psums cascade in TWO24 lanes; readout removes rows * 2^17 per column.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dsp48sim/column.hpp"
#include "dsp48sim/dsp48e2.hpp"
#include "dsp48sim/gemm_ref.hpp"
#include "dsp48sim/trace.hpp"

namespace dsp48sim {

enum class FetchVariant { ClbFetch, DspFetch };
enum class ExecPolicy { Auto, ForceSerial, ForceParallel };

struct WsConfig {
    int rows = 4;
    int cols = 4;
    bool packing_enabled = false;
    FetchVariant fetch_variant = FetchVariant::DspFetch;
    int rounds_per_weight_set = 4; // >= rows
    int act_pipeline_stages = 2;   // 1 or 2
    ExecPolicy exec = ExecPolicy::Auto;
};

struct WsRunResult {
    Mat outputs;                      // batch x effective_cols, exact int values
    std::int64_t latency_ticks = 0;   // first-output tick relative to first act
    std::int64_t total_ticks = 0;
    double steady_utilization = 0.0;  // fraction of useful MAC ticks in the interior window
    std::int64_t readout_tick(std::int64_t act_row, std::int64_t out_col) const;

    // for readout_tick
    std::int64_t t_act0 = 0;
    int rows = 0;
    int cols = 0;
    int act_stages = 0;
    bool packing = false;
};

class WsEngine {
public:
    explicit WsEngine(const WsConfig& cfg);

    int rows() const { return cfg_.rows; }
    int cols() const { return cfg_.cols; }
    int effective_cols() const { return cfg_.packing_enabled ? 2 * cfg_.cols : cfg_.cols; }
    int slice_count() const { return cfg_.rows * cfg_.cols + cfg_.cols; }
    std::int64_t modeled_clb_weight_bits() const;

    // Phased interface. preload streams a tile into the prefetch path and
    // returns the ticks consumed (rows); swap commits it to the stationary
    // registers; run streams one activation batch against the resident tile.
    std::int64_t preload_weights(const Mat& tile);
    void swap_weights();
    WsRunResult run(const Mat& acts);

    // Pipelined execution: back-to-back weight sets with concurrent reloads.
    // tiles.size() must equal batches.size() or batches.size() + 1 (a final
    // prefetch that is never consumed). Each batch needs at least `rows` rows
    // except the last. Outputs are concatenated in stream order.
    WsRunResult run_stream(const std::vector<Mat>& tiles, const std::vector<Mat>& batches);

    // Optional waveform capture for the next run/run_stream call.
    void attach_trace(WaveformTrace* trace) { trace_ = trace; }

private:
    struct Schedule;
    void validate_tile(const Mat& tile) const;
    WsRunResult execute(const std::vector<Mat>& tiles, const std::vector<Mat>& batches, bool initial_load);

    WsConfig cfg_;
    std::vector<Dsp48e2Slice> slices_; // rows*cols MACs then cols accumulators
    std::vector<Dsp48e2Outputs> prev_out_;
    std::vector<std::vector<std::int64_t>> clb_chain_; // [col][row], CLB-Fetch prefetch regs
    WaveformTrace* trace_ = nullptr;

    bool preload_pending_ = false;
    bool weights_resident_ = false;
    Mat pending_tile_;
    Mat resident_tile_;
};

} // namespace dsp48sim
