#include <doctest.h>

#include "dsp48sim/rng.hpp"
#include "dsp48sim/ws_engine.hpp"

using namespace dsp48sim;

namespace {

Mat random_mat(Rng& rng, std::int64_t r, std::int64_t c) {
    Mat m(r, c);
    for (auto& v : m.data) v = rng.int8();
    return m;
}

Mat identity(std::int64_t n) {
    Mat m(n, n);
    for (std::int64_t i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
}

WsConfig cfg(int rows, int cols, bool packing, FetchVariant fetch, int rounds = -1) {
    WsConfig c;
    c.rows = rows;
    c.cols = cols;
    c.packing_enabled = packing;
    c.fetch_variant = fetch;
    c.rounds_per_weight_set = rounds < 0 ? rows : rounds;
    return c;
}

Mat run_once(const WsConfig& c, const Mat& tile, const Mat& acts) {
    WsEngine eng(c);
    eng.preload_weights(tile);
    eng.swap_weights();
    return eng.run(acts).outputs;
}

} // namespace

TEST_CASE("slice counts match the structural formula") {
    CHECK(WsEngine(cfg(14, 14, true, FetchVariant::DspFetch)).slice_count() == 210);
    CHECK(WsEngine(cfg(1, 1, false, FetchVariant::DspFetch)).slice_count() == 2);
    WsEngine e(cfg(4, 4, true, FetchVariant::DspFetch));
    CHECK(e.slice_count() == 20);
    CHECK(e.effective_cols() == 8);
}

TEST_CASE("preload streams one slice per tick and lands each row's weight") {
    WsConfig c = cfg(4, 3, false, FetchVariant::DspFetch);
    WsEngine eng(c);
    Mat tile(4, 3);
    for (std::int64_t k = 0; k < 4; ++k)
        for (std::int64_t j = 0; j < 3; ++j) tile.at(k, j) = 10 * k + j;
    CHECK(eng.preload_weights(tile) == 4);
    // B1 of grid row p holds tile row p; B2 untouched until swap.
    // (internal check through the trace-free API: swap then run an identity)
    eng.swap_weights();
    auto out = eng.run(identity(4)).outputs;
    CHECK(out == tile);
}

TEST_CASE("preload of a 1-row array takes 1 tick") {
    WsEngine eng(cfg(1, 2, false, FetchVariant::DspFetch));
    Mat tile(1, 2);
    tile.at(0, 0) = 3;
    tile.at(0, 1) = -4;
    CHECK(eng.preload_weights(tile) == 1);
}

TEST_CASE("double preload without swap is a scheduling error") {
    WsEngine eng(cfg(2, 2, false, FetchVariant::DspFetch));
    Mat tile(2, 2);
    eng.preload_weights(tile);
    CHECK_THROWS_AS(eng.preload_weights(tile), ScheduleError);
}

TEST_CASE("swap without pending preload is a scheduling error") {
    WsEngine eng(cfg(2, 2, false, FetchVariant::DspFetch));
    CHECK_THROWS_AS(eng.swap_weights(), ScheduleError);
}

TEST_CASE("run before weights resident is a scheduling error") {
    WsEngine eng(cfg(2, 2, false, FetchVariant::DspFetch));
    CHECK_THROWS_AS(eng.run(Mat(2, 2)), ScheduleError);
}

TEST_CASE("identity activations reproduce the weight tile") {
    for (bool packing : {false, true}) {
        for (auto fetch : {FetchVariant::DspFetch, FetchVariant::ClbFetch}) {
            Rng rng(42);
            WsConfig c = cfg(5, 3, packing, fetch);
            WsEngine eng(c);
            Mat tile = random_mat(rng, 5, eng.effective_cols());
            auto out = run_once(c, tile, identity(5));
            CAPTURE(packing);
            REQUIRE(out == tile);
        }
    }
}

TEST_CASE("all-ones activations give column sums") {
    Rng rng(7);
    WsConfig c = cfg(6, 4, true, FetchVariant::DspFetch);
    WsEngine eng(c);
    Mat tile = random_mat(rng, 6, eng.effective_cols());
    Mat ones(3, 6);
    for (auto& v : ones.data) v = 1;
    auto out = run_once(c, tile, ones);
    for (std::int64_t j = 0; j < eng.effective_cols(); ++j) {
        std::int64_t sum = 0;
        for (std::int64_t k = 0; k < 6; ++k) sum += tile.at(k, j);
        for (std::int64_t i = 0; i < 3; ++i) REQUIRE(out.at(i, j) == sum);
    }
}

TEST_CASE("random GEMM matches the reference, all variants and packing modes") {
    Rng rng(0xBEEF);
    for (int trial = 0; trial < 24; ++trial) {
        const int rows = static_cast<int>(rng.range(1, 8));
        const int cols = static_cast<int>(rng.range(1, 8));
        const int batch = static_cast<int>(rng.range(1, 20));
        const bool packing = rng.coin();
        const auto fetch = rng.coin() ? FetchVariant::DspFetch : FetchVariant::ClbFetch;
        WsConfig c = cfg(rows, cols, packing, fetch);
        c.act_pipeline_stages = rng.coin() ? 1 : 2;
        WsEngine eng(c);
        Mat tile = random_mat(rng, rows, eng.effective_cols());
        Mat acts = random_mat(rng, batch, rows);
        auto out = run_once(c, tile, acts);
        CAPTURE(trial);
        REQUIRE(out == ref_gemm(acts, tile));
    }
}

TEST_CASE("packed columns stay exact when low-lane dot products exceed 17 bits") {
    // 16 rows of -128 * -128 drives a single lane sum to 16 * 16384, past the
    // 18-bit product field; the per-slice biased split must keep it exact.
    WsConfig c = cfg(16, 1, true, FetchVariant::DspFetch);
    WsEngine eng(c);
    Mat tile(16, 2);
    for (std::int64_t k = 0; k < 16; ++k) {
        tile.at(k, 0) = -128;
        tile.at(k, 1) = 127;
    }
    Mat acts(2, 16);
    for (auto& v : acts.data) v = -128;
    auto out = run_once(c, tile, acts);
    CHECK(out == ref_gemm(acts, tile));
    CHECK(out.at(0, 0) == 16 * 16384);
}

TEST_CASE("fetch variants produce identical outputs") {
    Rng rng(0xF00D);
    for (int trial = 0; trial < 6; ++trial) {
        const int rows = static_cast<int>(rng.range(2, 6));
        const int cols = static_cast<int>(rng.range(2, 6));
        const bool packing = rng.coin();
        WsConfig cd = cfg(rows, cols, packing, FetchVariant::DspFetch);
        WsConfig cc = cfg(rows, cols, packing, FetchVariant::ClbFetch);
        WsEngine ed(cd), ec(cc);
        Mat tile = random_mat(rng, rows, ed.effective_cols());
        Mat acts = random_mat(rng, 10, rows);
        REQUIRE(run_once(cd, tile, acts) == run_once(cc, tile, acts));
    }
}

TEST_CASE("modeled CLB weight register bits") {
    CHECK(WsEngine(cfg(14, 14, true, FetchVariant::DspFetch)).modeled_clb_weight_bits() == 0);
    CHECK(WsEngine(cfg(14, 14, true, FetchVariant::ClbFetch)).modeled_clb_weight_bits() == 14 * 28 * 8);
}

TEST_CASE("swap with an identical tile leaves outputs unchanged") {
    Rng rng(3);
    WsConfig c = cfg(3, 3, false, FetchVariant::DspFetch);
    WsEngine eng(c);
    Mat tile = random_mat(rng, 3, 3);
    Mat acts = random_mat(rng, 6, 3);
    eng.preload_weights(tile);
    eng.swap_weights();
    auto first = eng.run(acts).outputs;
    eng.preload_weights(tile);
    eng.swap_weights();
    auto second = eng.run(acts).outputs;
    CHECK(first == second);
    CHECK(first == ref_gemm(acts, tile));
}

TEST_CASE("streamed weight sets compute per-set GEMMs with full utilization") {
    Rng rng(0xCAFE);
    for (bool packing : {false, true}) {
        const int rows = 4, cols = 3, R = 4;
        WsConfig c = cfg(rows, cols, packing, FetchVariant::DspFetch, R);
        WsEngine eng(c);
        std::vector<Mat> tiles, batches;
        for (int j = 0; j < 3; ++j) {
            tiles.push_back(random_mat(rng, rows, eng.effective_cols()));
            batches.push_back(random_mat(rng, R, rows));
        }
        auto res = eng.run_stream(tiles, batches);
        CAPTURE(packing);
        CHECK(res.steady_utilization == doctest::Approx(1.0));
        for (int j = 0; j < 3; ++j) {
            const Mat expect = ref_gemm(batches[static_cast<std::size_t>(j)], tiles[static_cast<std::size_t>(j)]);
            for (std::int64_t i = 0; i < R; ++i) {
                for (std::int64_t col = 0; col < eng.effective_cols(); ++col) {
                    REQUIRE(res.outputs.at(j * R + i, col) == expect.at(i, col));
                }
            }
        }
    }
}

TEST_CASE("an unconsumed trailing prefetch does not disturb compute") {
    Rng rng(11);
    const int rows = 3, cols = 2;
    WsConfig c = cfg(rows, cols, false, FetchVariant::DspFetch);
    WsEngine a(c), b(c);
    Mat tile = random_mat(rng, rows, cols);
    Mat extra = random_mat(rng, rows, cols);
    Mat acts = random_mat(rng, 5, rows);
    auto plain = a.run_stream({tile}, {acts});
    auto with_prefetch = b.run_stream({tile, extra}, {acts});
    CHECK(plain.outputs == with_prefetch.outputs);
}

TEST_CASE("weight-register trace is stable between swap events") {
    WsConfig c = cfg(3, 2, false, FetchVariant::DspFetch, 4);
    WsEngine eng(c);
    WaveformTrace trace;
    eng.attach_trace(&trace);
    Rng rng(9);
    std::vector<Mat> tiles{random_mat(rng, 3, 2), random_mat(rng, 3, 2)};
    std::vector<Mat> batches{random_mat(rng, 4, 3), random_mat(rng, 4, 3)};
    eng.run_stream(tiles, batches);
    // every B2 changes at most once per swap event: initial swap + 1 boundary
    for (int p = 0; p < 3; ++p) {
        for (int col = 0; col < 2; ++col) {
            const auto name = "ws/" + std::to_string(p) + "_" + std::to_string(col) + "/b2";
            const auto changes = trace.change_ticks(trace.id(name));
            // first record is the initial 0 sample; at most two real changes
            std::size_t real_changes = 0;
            for (std::size_t i = 1; i < changes.size(); ++i) ++real_changes;
            REQUIRE(real_changes <= 2);
        }
    }
}

TEST_CASE("empty batch yields an empty result") {
    WsConfig c = cfg(2, 2, false, FetchVariant::DspFetch);
    WsEngine eng(c);
    Mat tile(2, 2);
    eng.preload_weights(tile);
    eng.swap_weights();
    auto out = eng.run(Mat(0, 2));
    CHECK(out.outputs.rows == 0);
}

TEST_CASE("serial and parallel engine execution agree") {
    Rng rng(0x5151);
    WsConfig cs = cfg(6, 6, true, FetchVariant::DspFetch);
    cs.exec = ExecPolicy::ForceSerial;
    WsConfig cp = cs;
    cp.exec = ExecPolicy::ForceParallel;
    Mat tile = random_mat(rng, 6, 12);
    Mat acts = random_mat(rng, 9, 6);
    CHECK(run_once(cs, tile, acts) == run_once(cp, tile, acts));
}
