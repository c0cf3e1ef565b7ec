// Behavioral model of the DSP48E2 slice subset used by the systolic engines:
// A/B input pipelines (two stages, individual clock enables, dynamic stage
// selector), 27-bit pre-adder, signed 27x18 multiplier, and the four-input
// 48-bit ALU with ONE48/TWO24/FOUR12 SIMD lane modes and W/X/Y/Z wide-bus
// multiplexers, plus the A/B/P cascade taps.
//
// Tick convention: step() consumes the port values held during one fast-clock
// cycle and performs the clock edge that ends it. Every enabled register
// captures a value computed from the *pre-tick* state of its upstream stage
// (synchronous semantics). Outputs returned by step() are the post-edge
// values: registered outputs come from the freshly captured registers, and a
// bypassed M/P path settles combinationally from the new register contents.
//
// Input pipelines: the stage-1 registers (A1/B1) always capture from the
// port or cascade on their clock enables. areg_stages/breg_stages select the
// stage-2 capture source: 2 chains it behind stage 1 (prefetch shift paths),
// 1 feeds it from the port directly (parallel ping-pong). The inmode
// selectors pick either register as the multiplier operand.
// Cascade outputs (acout/bcout/pcout) are register taps, so chaining slices
// with "neighbor reads previous step's outputs" yields exactly one tick of
// latency per hop.
//
// Not modeled (never touched by the engines): pattern detector, carry
// cascade, 17-bit shifted Z inputs, A bits beyond 27. OPMODE/INMODE are
// behavioral enums; opmode_encoding()/inmode_encoding() give the real bit
// patterns as reference data only.
#pragma once

#include <cstdint>
#include <utility>

#include "dsp48sim/bits.hpp"

namespace dsp48sim {

enum class InputSource { Direct, Cascade };
enum class SimdMode { One48, Two24, Four12 };
enum class StageSel { Stage1, Stage2 };

enum class MuxX { Zero, M, AB };
enum class MuxY { Zero, M, C };
enum class MuxZ { Zero, Pcin, C, P };
enum class MuxW { Zero, Rnd, C, P };

enum class OpmodePolicy { Static, Dynamic };

// Static attributes, fixed for the lifetime of a slice instance.
struct Dsp48e2Attrs {
    int areg_stages = 2; // 1 or 2
    int breg_stages = 2; // 1 or 2
    InputSource a_input_source = InputSource::Direct;
    InputSource b_input_source = InputSource::Direct;
    bool use_preadder = false;
    bool mreg_enabled = true;
    bool preg_enabled = true;
    SimdMode simd_mode = SimdMode::One48;
    std::int64_t rnd_constant = 0; // 48-bit word, consumed only when W selects Rnd

    // Per-multiplexer policy. A Static mux ignores the per-tick port value and
    // uses the fixed selection below.
    OpmodePolicy policy_x = OpmodePolicy::Dynamic;
    OpmodePolicy policy_y = OpmodePolicy::Dynamic;
    OpmodePolicy policy_z = OpmodePolicy::Dynamic;
    OpmodePolicy policy_w = OpmodePolicy::Dynamic;
    MuxX static_x = MuxX::Zero;
    MuxY static_y = MuxY::Zero;
    MuxZ static_z = MuxZ::Zero;
    MuxW static_w = MuxW::Zero;
};

// Per-tick inputs. Values must respect the declared widths; a violation is a
// rejected stimulus (StimulusError).
struct Dsp48e2Ports {
    std::int64_t a = 0;    // signed 27-bit
    std::int64_t b = 0;    // signed 18-bit
    std::int64_t c = 0;    // signed 48-bit
    std::int64_t d = 0;    // signed 27-bit
    std::int64_t acin = 0; // signed 27-bit
    std::int64_t bcin = 0; // signed 18-bit
    std::int64_t pcin = 0; // signed 48-bit

    bool ce_a1 = true;
    bool ce_a2 = true;
    bool ce_b1 = true;
    bool ce_b2 = true;

    StageSel inmode_sel_a = StageSel::Stage2;
    StageSel inmode_sel_b = StageSel::Stage2;

    MuxX opmode_x = MuxX::Zero;
    MuxY opmode_y = MuxY::Zero;
    MuxZ opmode_z = MuxZ::Zero;
    MuxW opmode_w = MuxW::Zero;
};

// Register contents. All zero after reset.
struct Dsp48e2State {
    std::int64_t a1 = 0; // signed 27-bit
    std::int64_t a2 = 0; // signed 27-bit
    std::int64_t b1 = 0; // signed 18-bit
    std::int64_t b2 = 0; // signed 18-bit
    std::int64_t ad = 0; // signed 27-bit, latest pre-adder result on the M path
    std::int64_t m = 0;  // signed 45-bit
    std::int64_t p = 0;  // 48-bit two's complement
};

struct Dsp48e2Outputs {
    std::int64_t p = 0;     // 48-bit
    std::int64_t pcout = 0; // == p on every tick
    std::int64_t acout = 0; // A-pipeline tap: stage 1 when areg_stages == 2, else stage 2
    std::int64_t bcout = 0; // B-pipeline tap, same rule
};

// Four-input SIMD add with wrap-around lane arithmetic. Lane boundaries carry
// no carries across them (bit 24 in Two24; bits 12/24/36 in Four12).
std::int64_t simd_add(std::int64_t w, std::int64_t x, std::int64_t y, std::int64_t z, SimdMode mode);

// One fast-clock tick; returns the new state and post-edge outputs.
std::pair<Dsp48e2State, Dsp48e2Outputs> step(const Dsp48e2State& state, const Dsp48e2Attrs& attrs,
                                             const Dsp48e2Ports& ports);

// A slice bundles attrs + state and caches the previous tick's outputs so
// column wiring can read "pre-update" cascade values.
class Dsp48e2Slice {
public:
    Dsp48e2Slice() = default;
    explicit Dsp48e2Slice(const Dsp48e2Attrs& attrs) : attrs_(attrs) {}

    const Dsp48e2Attrs& attrs() const { return attrs_; }
    const Dsp48e2State& state() const { return state_; }
    const Dsp48e2Outputs& last_outputs() const { return outs_; }

    const Dsp48e2Outputs& tick(const Dsp48e2Ports& ports) {
        auto [ns, out] = step(state_, attrs_, ports);
        state_ = ns;
        outs_ = out;
        return outs_;
    }

    void reset() {
        state_ = Dsp48e2State{};
        outs_ = Dsp48e2Outputs{};
    }

private:
    Dsp48e2Attrs attrs_{};
    Dsp48e2State state_{};
    Dsp48e2Outputs outs_{};
};

// Reference data: the real 9-bit OPMODE / 5-bit INMODE encodings for the
// modeled subset. Not consumed by the simulator.
int opmode_encoding(MuxW w, MuxX x, MuxY y, MuxZ z);
int inmode_encoding(StageSel sel_a, StageSel sel_b, bool use_preadder);

} // namespace dsp48sim
