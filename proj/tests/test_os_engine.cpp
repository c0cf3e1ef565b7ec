#include <doctest.h>

#include "dsp48sim/os_engine.hpp"
#include "dsp48sim/rng.hpp"

using namespace dsp48sim;

namespace {

Mat random_mat(Rng& rng, std::int64_t r, std::int64_t c) {
    Mat m(r, c);
    for (auto& v : m.data) v = rng.int8();
    return m;
}

OsConfig small_cfg(OsVariant v, bool packing, int N, int cpg, int G) {
    OsConfig c;
    c.variant = v;
    c.packing_enabled = packing;
    c.chain_len = N;
    c.chains_per_group = cpg;
    c.num_groups = G;
    return c;
}

Mat bias_with(std::int64_t b0, std::int64_t b1, int groups) {
    Mat b(groups, 2);
    for (int g = 0; g < groups; ++g) {
        b.at(g, 0) = b0;
        b.at(g, 1) = b1;
    }
    return b;
}

Mat expected_with_bias(const OsProblem& p, int groups, int wrap_width) {
    Mat e = ref_gemm(p.acts, p.wts);
    if (p.bias.rows != 0) {
        for (std::int64_t r = 0; r < e.rows; ++r) {
            for (int g = 0; g < groups; ++g) {
                e.at(r, 2 * g) += p.bias.at(g, r % 2);
                e.at(r, 2 * g + 1) += p.bias.at(g, r % 2);
            }
        }
    }
    for (auto& v : e.data) v = wrap_signed(v, wrap_width);
    return e;
}

} // namespace

TEST_CASE("slice counts match the structural formulas") {
    OsEngine enh(OsConfig::b1024(OsVariant::Enhanced));
    CHECK(enh.mult_slice_count() == 128);
    CHECK(enh.acc_slice_count() == 32);
    OsEngine off(OsConfig::b1024(OsVariant::Official));
    CHECK(off.mult_slice_count() == 128);
    CHECK(off.acc_slice_count() == 64);
}

TEST_CASE("interleaved product order: a_t w_t, a_t w_t+1, a_t+1 w_t, a_t+1 w_t+1") {
    // N=1 chain, no packing, a=(2,3), w=(5,7): 10, 14, 15, 21.
    OsConfig c = small_cfg(OsVariant::Enhanced, false, 1, 1, 1);
    OsEngine eng(c);
    OsProblem p;
    p.acts = Mat(2, 1);
    p.acts.at(0, 0) = 2;
    p.acts.at(1, 0) = 3;
    p.wts = Mat(1, 2);
    p.wts.at(0, 0) = 5;
    p.wts.at(0, 1) = 7;
    auto res = eng.run(p);
    CHECK(res.outputs.at(0, 0) == 10);
    CHECK(res.outputs.at(0, 1) == 14);
    CHECK(res.outputs.at(1, 0) == 15);
    CHECK(res.outputs.at(1, 1) == 21);
    // slot order through the drain path mirrors that order
    const auto& recs = res.drain_records[0];
    REQUIRE(recs.size() == 4);
    CHECK(sign_extend(to_bits(recs[0].second, 24), 24) == 10);
    CHECK(sign_extend(to_bits(recs[1].second, 24), 24) == 14);
    CHECK(sign_extend(to_bits(recs[2].second, 24), 24) == 15);
    CHECK(sign_extend(to_bits(recs[3].second, 24), 24) == 21);
}

TEST_CASE("interleave builder waveform shape") {
    Mat acts(2, 1);
    acts.at(0, 0) = 2;
    acts.at(1, 0) = 3;
    Mat wts(1, 2);
    wts.at(0, 0) = 5;
    wts.at(0, 1) = 7;
    auto st = interleave(acts, wts, false, 0, 1, 4);
    REQUIRE(st.windows == 1);
    // CE_B1 fires two ticks before CE_B2; the selector alternates every tick.
    for (std::size_t t = 0; t + 1 < st.sel_b.size(); ++t) CHECK(st.sel_b[t] != st.sel_b[t + 1]);
    CHECK(st.ce_b1[2]);
    CHECK(st.ce_b2[4]);
    CHECK(st.b_port[2] == 5);
    CHECK(st.b_port[4] == 7);
}

TEST_CASE("all-zero streams produce all-zero outputs") {
    OsConfig c = small_cfg(OsVariant::Enhanced, true, 2, 2, 2);
    OsEngine eng(c);
    OsProblem p;
    p.acts = Mat(4, 8);
    p.wts = Mat(8, 4);
    auto res = eng.run(p);
    for (auto v : res.outputs.data) CHECK(v == 0);
}

TEST_CASE("two-term chain matches hand-computed dot products") {
    OsConfig c = small_cfg(OsVariant::Enhanced, false, 2, 1, 1);
    OsEngine eng(c);
    OsProblem p;
    p.acts = Mat(2, 2);
    p.acts.at(0, 0) = 3;
    p.acts.at(0, 1) = -2;
    p.acts.at(1, 0) = 5;
    p.acts.at(1, 1) = 4;
    p.wts = Mat(2, 2);
    p.wts.at(0, 0) = 7;
    p.wts.at(0, 1) = -1;
    p.wts.at(1, 0) = 2;
    p.wts.at(1, 1) = 6;
    auto res = eng.run(p);
    CHECK(res.outputs.at(0, 0) == 3 * 7 + -2 * 2);
    CHECK(res.outputs.at(0, 1) == 3 * -1 + -2 * 6);
    CHECK(res.outputs.at(1, 0) == 5 * 7 + 4 * 2);
    CHECK(res.outputs.at(1, 1) == 5 * -1 + 4 * 6);
}

TEST_CASE("zero inputs with bias leave the bias in every slot") {
    OsConfig c = small_cfg(OsVariant::Enhanced, true, 1, 2, 1);
    OsEngine eng(c);
    OsProblem p;
    p.acts = Mat(4, 2);
    p.wts = Mat(2, 2);
    p.bias = bias_with(10, 20, 1);
    auto res = eng.run(p);
    for (const auto& rec : res.drain_records[0]) {
        CHECK(sign_extend(to_bits(rec.second, 24), 24) == 10);
        CHECK(sign_extend(to_bits(rec.second, 48) >> 24, 24) == 20);
    }
    for (std::int64_t r = 0; r < 4; ++r) {
        CHECK(res.outputs.at(r, 0) == (r % 2 == 0 ? 10 : 20));
        CHECK(res.outputs.at(r, 1) == (r % 2 == 0 ? 10 : 20));
    }
}

TEST_CASE("constant pairs accumulate per slot: bias (10,20) plus two loop iterations") {
    // Both chains contribute a constant (lo=1, hi=2) pair each fast tick:
    // after two windows every slot reads (10 + 2*2, 20 + 2*4) = (14, 28).
    OsConfig c = small_cfg(OsVariant::Enhanced, true, 1, 2, 1);
    OsEngine eng(c);
    OsProblem p;
    p.acts = Mat(4, 4);
    for (std::int64_t k = 0; k < 4; ++k) {
        p.acts.at(0, k) = 1;
        p.acts.at(1, k) = 2;
        p.acts.at(2, k) = 1;
        p.acts.at(3, k) = 2;
    }
    p.wts = Mat(4, 2);
    for (std::int64_t k = 0; k < 4; ++k) {
        p.wts.at(k, 0) = 1;
        p.wts.at(k, 1) = 1;
    }
    p.bias = bias_with(10, 20, 1);
    auto res = eng.run(p);
    for (const auto& rec : res.drain_records[0]) {
        CHECK(sign_extend(to_bits(rec.second, 24), 24) == 14);
        CHECK(sign_extend(to_bits(rec.second, 48) >> 24, 24) == 28);
    }
}

TEST_CASE("drain is four records over four consecutive fast ticks") {
    OsConfig c = small_cfg(OsVariant::Enhanced, true, 3, 2, 2);
    OsEngine eng(c);
    Rng rng(12);
    OsProblem p;
    p.acts = random_mat(rng, 4, 12);
    p.wts = random_mat(rng, 12, 4);
    auto res = eng.run(p);
    for (const auto& recs : res.drain_records) {
        REQUIRE(recs.size() == 4);
        for (int i = 1; i < 4; ++i) CHECK(recs[i].first == recs[0].first + i);
    }
    CHECK(res.readout_pairs_per_group == 4);
}

TEST_CASE("random enhanced GEMM matches the oracle") {
    Rng rng(0x0515);
    for (int trial = 0; trial < 16; ++trial) {
        const int N = static_cast<int>(rng.range(1, 5));
        const int cpg = static_cast<int>(rng.range(1, 2));
        const int G = static_cast<int>(rng.range(1, 4));
        const int W = static_cast<int>(rng.range(1, 6));
        const bool packing = rng.coin();
        OsConfig c = small_cfg(OsVariant::Enhanced, packing, N, cpg, G);
        OsEngine eng(c);
        OsProblem p;
        p.acts = random_mat(rng, eng.act_rows(), cpg * N * W);
        p.wts = random_mat(rng, cpg * N * W, 2 * G);
        p.bias = bias_with(rng.range(-1000, 1000), rng.range(-1000, 1000), G);
        auto res = eng.run(p);
        const Mat expect = expected_with_bias(p, G, 24);
        CAPTURE(trial);
        REQUIRE(res.outputs == expect);
    }
}

TEST_CASE("official engine reproduces weights on identity-like stimulus and random GEMM") {
    Rng rng(0xD0D0);
    for (int trial = 0; trial < 10; ++trial) {
        const int N = static_cast<int>(rng.range(1, 5));
        const int G = static_cast<int>(rng.range(1, 4));
        const int W = static_cast<int>(rng.range(1, 6));
        const bool packing = rng.coin();
        OsConfig c = small_cfg(OsVariant::Official, packing, N, 2, G);
        OsEngine eng(c);
        OsProblem p;
        p.acts = random_mat(rng, eng.act_rows(), 2 * N * W);
        p.wts = random_mat(rng, 2 * N * W, 2 * G);
        p.bias = bias_with(rng.range(-30000, 30000), rng.range(-30000, 30000), G);
        auto res = eng.run(p);
        const Mat expect = expected_with_bias(p, G, 29);
        CAPTURE(trial);
        REQUIRE(res.outputs == expect);
    }
}

TEST_CASE("variants agree on 24-bit-safe stimuli and on throughput") {
    Rng rng(0xAC3);
    for (int trial = 0; trial < 10; ++trial) {
        const int N = static_cast<int>(rng.range(1, 4));
        const int G = static_cast<int>(rng.range(1, 3));
        const int W = static_cast<int>(rng.range(1, 5));
        const bool packing = rng.coin();
        OsProblem p;
        OsConfig ce = small_cfg(OsVariant::Enhanced, packing, N, 2, G);
        OsConfig co = small_cfg(OsVariant::Official, packing, N, 2, G);
        OsEngine ee(ce), eo(co);
        p.acts = random_mat(rng, ee.act_rows(), 2 * N * W);
        p.wts = random_mat(rng, 2 * N * W, 2 * G);
        p.bias = bias_with(rng.range(-4096, 4096), rng.range(-4096, 4096), G);
        auto re = ee.run(p);
        auto ro = eo.run(p);
        CAPTURE(trial);
        REQUIRE(re.outputs == ro.outputs);
        REQUIRE(re.slow_ticks == ro.slow_ticks);
        CHECK(re.weight_bytes_per_slice_per_slow_tick == doctest::Approx(1.0));
        CHECK(ro.weight_bytes_per_slice_per_slow_tick == doctest::Approx(2.0));
        CHECK(re.readout_pairs_per_group == 4);
        CHECK(ro.readout_pairs_per_group == 2);
    }
}

TEST_CASE("enhanced wraps mod 2^24 where official does not") {
    OsConfig ce = small_cfg(OsVariant::Enhanced, true, 4, 2, 1);
    OsEngine eng(ce);
    Rng rng(0x88);
    OsProblem p;
    p.acts = random_mat(rng, 4, 8);
    p.wts = random_mat(rng, 8, 2);
    p.bias = bias_with((1 << 23) - 5, -(1 << 23) + 9, 1); // push sums across the lane boundary
    auto res = eng.run(p);
    const Mat expect = expected_with_bias(p, 1, 24);
    CHECK(res.outputs == expect);
}

TEST_CASE("ring slots are written only on their own tick phase") {
    OsConfig c = small_cfg(OsVariant::Enhanced, true, 4, 2, 2);
    OsEngine eng(c);
    Rng rng(0x99);
    OsProblem p;
    p.acts = random_mat(rng, 4, 16);
    p.wts = random_mat(rng, 16, 4);
    auto res = eng.run(p);
    REQUIRE(!res.slot_writes.empty());
    for (const auto& [tick, slot] : res.slot_writes) {
        CHECK(tick % 4 == slot);
    }
}

TEST_CASE("CE_B1/CE_B2 have period 4 with offset 2 and the selector alternates") {
    OsConfig c = small_cfg(OsVariant::Enhanced, true, 2, 2, 1);
    OsEngine eng(c);
    WaveformTrace trace;
    eng.attach_trace(&trace);
    Rng rng(0x31);
    OsProblem p;
    p.acts = random_mat(rng, 4, 8);
    p.wts = random_mat(rng, 8, 2);
    auto res = eng.run(p);
    (void)res;
    for (int h = 0; h < 2; ++h) {
        for (int q = 0; q < 2; ++q) {
            const std::string base = "os/g0/ch" + std::to_string(h) + "/s" + std::to_string(q) + "/";
            const auto ce1 = trace.id(base + "ce_b1");
            const auto ce2 = trace.id(base + "ce_b2");
            const auto sel = trace.id(base + "sel_b");
            std::vector<std::int64_t> ce1_high, ce2_high;
            for (std::int64_t t = 0; t < res.fast_ticks; ++t) {
                if (trace.value_at(ce1, t)) ce1_high.push_back(t);
                if (trace.value_at(ce2, t)) ce2_high.push_back(t);
                if (t > 0) CHECK(trace.value_at(sel, t) != trace.value_at(sel, t - 1));
            }
            REQUIRE(ce1_high.size() >= 2);
            for (std::size_t i = 1; i < ce1_high.size(); ++i) CHECK(ce1_high[i] - ce1_high[i - 1] == 4);
            for (std::size_t i = 1; i < ce2_high.size(); ++i) CHECK(ce2_high[i] - ce2_high[i - 1] == 4);
            // offset two fast ticks between the two enables
            CHECK(((ce2_high[0] - ce1_high[0]) % 4 + 4) % 4 == 2);
        }
    }
}

TEST_CASE("chain emits four partial-sum pairs per four fast ticks") {
    OsConfig c = small_cfg(OsVariant::Enhanced, true, 2, 2, 1);
    OsEngine eng(c);
    WaveformTrace trace;
    eng.attach_trace(&trace);
    Rng rng(0x77);
    OsProblem p;
    const int W = 3;
    p.acts = random_mat(rng, 4, 4 * W);
    p.wts = random_mat(rng, 4 * W, 2);
    auto res = eng.run(p);
    (void)res;
    // The tail P register changes with a fresh pair every fast tick across
    // the active window region: assert pairwise-distinct capture ticks by
    // checking the tail held W*4 distinct psum values (plus warmup) —
    // distinctness with random stimulus.
    const auto tail = trace.id("os/g0/ch0/s1/p");
    const auto changes = trace.change_ticks(tail);
    // at least 4 pairs per window must appear as distinct changes
    CHECK(static_cast<int>(changes.size()) >= 4 * W);
}

TEST_CASE("scheduling and shape errors") {
    OsConfig c = small_cfg(OsVariant::Enhanced, true, 2, 2, 1);
    OsEngine eng(c);
    OsProblem p;
    p.acts = Mat(4, 6); // not a multiple of 4
    p.wts = Mat(6, 2);
    CHECK_THROWS_AS(eng.run(p), StimulusError);
    OsConfig bad = c;
    bad.chain_len = 9; // packed chains cap at 7
    CHECK_THROWS_AS((void)OsEngine(bad), ConfigError);
}

TEST_CASE("serial and parallel execution agree") {
    OsConfig cs = OsConfig::b1024(OsVariant::Enhanced);
    cs.exec = ExecPolicy::ForceSerial;
    OsConfig cp = cs;
    cp.exec = ExecPolicy::ForceParallel;
    Rng rng(0x40);
    OsProblem p;
    p.acts = random_mat(rng, 4, 16);
    p.wts = random_mat(rng, 16, 32);
    auto a = OsEngine(cs).run(p);
    auto b = OsEngine(cp).run(p);
    CHECK(a.outputs == b.outputs);
}
