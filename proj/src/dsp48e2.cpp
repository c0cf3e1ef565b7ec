#include "dsp48sim/dsp48e2.hpp"

#include <string>

namespace dsp48sim {

namespace {

void check_width(std::int64_t v, int width, const char* port) {
    if (!fits_signed(v, width)) {
        throw StimulusError(std::string("port ") + port + " exceeds its " + std::to_string(width) +
                            "-bit width: " + std::to_string(v));
    }
}

struct EffectiveOpmode {
    MuxX x;
    MuxY y;
    MuxZ z;
    MuxW w;
};

EffectiveOpmode resolve_opmode(const Dsp48e2Attrs& attrs, const Dsp48e2Ports& ports) {
    EffectiveOpmode o{
        attrs.policy_x == OpmodePolicy::Static ? attrs.static_x : ports.opmode_x,
        attrs.policy_y == OpmodePolicy::Static ? attrs.static_y : ports.opmode_y,
        attrs.policy_z == OpmodePolicy::Static ? attrs.static_z : ports.opmode_z,
        attrs.policy_w == OpmodePolicy::Static ? attrs.static_w : ports.opmode_w,
    };
    if ((o.x == MuxX::M) != (o.y == MuxY::M)) {
        throw ConfigError("opmode constraint violated: X and Y must select M together");
    }
    return o;
}

// A:B concatenation as seen by the X multiplexer: the selected A register
// sign-extended to 30 bits over the selected B register's raw 18 bits.
std::int64_t concat_ab(std::int64_t sel_a, std::int64_t sel_b) {
    const std::uint64_t raw = (to_bits(sel_a, 30) << 18) | to_bits(sel_b, 18);
    return sign_extend(raw, 48);
}

struct MulPath {
    std::int64_t ad; // pre-adder result feeding the multiplier
    std::int64_t m;  // exact signed product, 45 bits
};

// Multiplier path evaluated against a register snapshot (pre-tick values for
// the MREG capture, post-tick values for a bypassed M).
MulPath mul_path(const Dsp48e2State& regs, const Dsp48e2Attrs& attrs, const Dsp48e2Ports& ports) {
    const std::int64_t sel_a = ports.inmode_sel_a == StageSel::Stage1 ? regs.a1 : regs.a2;
    const std::int64_t sel_b = ports.inmode_sel_b == StageSel::Stage1 ? regs.b1 : regs.b2;
    const std::int64_t ad = attrs.use_preadder ? wrap_signed(sel_a + ports.d, 27) : sel_a;
    return MulPath{ad, wrap_signed(ad * sel_b, 45)};
}

std::int64_t alu(const EffectiveOpmode& o, std::int64_t m_value, std::int64_t sel_a, std::int64_t sel_b,
                 std::int64_t p_feedback, const Dsp48e2Attrs& attrs, const Dsp48e2Ports& ports) {
    std::int64_t x = 0;
    std::int64_t y = 0;
    std::int64_t z = 0;
    std::int64_t w = 0;
    switch (o.x) {
        case MuxX::Zero: x = 0; break;
        case MuxX::M: x = m_value; break; // Y==M contributes zero; the product occupies both lanes
        case MuxX::AB: x = concat_ab(sel_a, sel_b); break;
    }
    switch (o.y) {
        case MuxY::Zero: y = 0; break;
        case MuxY::M: y = 0; break;
        case MuxY::C: y = ports.c; break;
    }
    switch (o.z) {
        case MuxZ::Zero: z = 0; break;
        case MuxZ::Pcin: z = ports.pcin; break;
        case MuxZ::C: z = ports.c; break;
        case MuxZ::P: z = p_feedback; break;
    }
    switch (o.w) {
        case MuxW::Zero: w = 0; break;
        case MuxW::Rnd: w = attrs.rnd_constant; break;
        case MuxW::C: w = ports.c; break;
        case MuxW::P: w = p_feedback; break;
    }
    return simd_add(w, x, y, z, attrs.simd_mode);
}

} // namespace

std::int64_t simd_add(std::int64_t w, std::int64_t x, std::int64_t y, std::int64_t z, SimdMode mode) {
    int lane_width = 48;
    switch (mode) {
        case SimdMode::One48: lane_width = 48; break;
        case SimdMode::Two24: lane_width = 24; break;
        case SimdMode::Four12: lane_width = 12; break;
    }
    const std::uint64_t wb = to_bits(w, 48);
    const std::uint64_t xb = to_bits(x, 48);
    const std::uint64_t yb = to_bits(y, 48);
    const std::uint64_t zb = to_bits(z, 48);
    std::uint64_t result = 0;
    for (int lo = 0; lo < 48; lo += lane_width) {
        const std::uint64_t lm = bit_mask(lane_width);
        const std::uint64_t lane = ((wb >> lo) + (xb >> lo) + (yb >> lo) + (zb >> lo)) & lm;
        result |= lane << lo;
    }
    return sign_extend(result, 48);
}

std::pair<Dsp48e2State, Dsp48e2Outputs> step(const Dsp48e2State& state, const Dsp48e2Attrs& attrs,
                                             const Dsp48e2Ports& ports) {
    if (attrs.areg_stages != 1 && attrs.areg_stages != 2) throw ConfigError("areg_stages must be 1 or 2");
    if (attrs.breg_stages != 1 && attrs.breg_stages != 2) throw ConfigError("breg_stages must be 1 or 2");

    check_width(ports.a, 27, "a");
    check_width(ports.b, 18, "b");
    check_width(ports.c, 48, "c");
    check_width(ports.d, 27, "d");
    check_width(ports.acin, 27, "acin");
    check_width(ports.bcin, 18, "bcin");
    check_width(ports.pcin, 48, "pcin");
    check_width(attrs.rnd_constant, 48, "rnd_constant");

    const EffectiveOpmode o = resolve_opmode(attrs, ports);

    const std::int64_t a_src = attrs.a_input_source == InputSource::Direct ? ports.a : ports.acin;
    const std::int64_t b_src = attrs.b_input_source == InputSource::Direct ? ports.b : ports.bcin;

    Dsp48e2State ns = state;
    if (ports.ce_a1) ns.a1 = wrap_signed(a_src, 27);
    if (ports.ce_b1) ns.b1 = wrap_signed(b_src, 18);
    if (ports.ce_a2) ns.a2 = attrs.areg_stages == 2 ? state.a1 : wrap_signed(a_src, 27);
    if (ports.ce_b2) ns.b2 = attrs.breg_stages == 2 ? state.b1 : wrap_signed(b_src, 18);

    // M path: the MREG captures from pre-tick registers; a bypassed M settles
    // from the post-tick registers.
    const MulPath pre = mul_path(state, attrs, ports);
    ns.ad = pre.ad;
    ns.m = attrs.mreg_enabled ? pre.m : mul_path(ns, attrs, ports).m;

    // The P capture sees the M value that settled during the elapsed cycle:
    // the old MREG when registered, else the product of the old input regs.
    const std::int64_t m_for_p = attrs.mreg_enabled ? state.m : pre.m;
    const std::int64_t sel_a_pre = ports.inmode_sel_a == StageSel::Stage1 ? state.a1 : state.a2;
    const std::int64_t sel_b_pre = ports.inmode_sel_b == StageSel::Stage1 ? state.b1 : state.b2;
    const std::int64_t alu_pre = alu(o, m_for_p, sel_a_pre, sel_b_pre, state.p, attrs, ports);

    Dsp48e2Outputs out;
    if (attrs.preg_enabled) {
        ns.p = alu_pre;
        out.p = ns.p;
    } else {
        const std::int64_t sel_a_post = ports.inmode_sel_a == StageSel::Stage1 ? ns.a1 : ns.a2;
        const std::int64_t sel_b_post = ports.inmode_sel_b == StageSel::Stage1 ? ns.b1 : ns.b2;
        ns.p = alu(o, ns.m, sel_a_post, sel_b_post, state.p, attrs, ports);
        out.p = ns.p;
    }
    out.pcout = out.p;
    out.acout = attrs.areg_stages == 2 ? ns.a1 : ns.a2;
    out.bcout = attrs.breg_stages == 2 ? ns.b1 : ns.b2;
    return {ns, out};
}

int opmode_encoding(MuxW w, MuxX x, MuxY y, MuxZ z) {
    int xb = 0;
    switch (x) {
        case MuxX::Zero: xb = 0b00; break;
        case MuxX::M: xb = 0b01; break;
        case MuxX::AB: xb = 0b11; break;
    }
    int yb = 0;
    switch (y) {
        case MuxY::Zero: yb = 0b00; break;
        case MuxY::M: yb = 0b01; break;
        case MuxY::C: yb = 0b11; break;
    }
    int zb = 0;
    switch (z) {
        case MuxZ::Zero: zb = 0b000; break;
        case MuxZ::Pcin: zb = 0b001; break;
        case MuxZ::P: zb = 0b010; break;
        case MuxZ::C: zb = 0b011; break;
    }
    int wb = 0;
    switch (w) {
        case MuxW::Zero: wb = 0b00; break;
        case MuxW::P: wb = 0b01; break;
        case MuxW::Rnd: wb = 0b10; break;
        case MuxW::C: wb = 0b11; break;
    }
    return (wb << 7) | (zb << 4) | (yb << 2) | xb;
}

int inmode_encoding(StageSel sel_a, StageSel sel_b, bool use_preadder) {
    int enc = 0;
    if (sel_a == StageSel::Stage1) enc |= 1 << 0; // INMODE[0] = A1 select
    if (use_preadder) enc |= 1 << 2;              // INMODE[2] = D enable
    if (sel_b == StageSel::Stage1) enc |= 1 << 4; // INMODE[4] = B1 select
    return enc;
}

} // namespace dsp48sim
