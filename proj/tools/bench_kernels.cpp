// Benchmark comparing the serial reference tick kernel against the
// OpenMP-parallel one on a large weight-stationary array, plus the packing
// sweep in both modes. The two paths must agree bit for bit; this target
// only reports throughput.
#include <chrono>
#include <cstdio>
#include <string>

#include "dsp48sim/packing.hpp"
#include "dsp48sim/rng.hpp"
#include "dsp48sim/ws_engine.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

dsp48sim::Mat random_mat(dsp48sim::Rng& rng, std::int64_t r, std::int64_t c) {
    dsp48sim::Mat m(r, c);
    for (auto& v : m.data) v = rng.int8();
    return m;
}

double bench_ws(dsp48sim::ExecPolicy policy, int rows, int cols, int batch, std::int64_t* checksum) {
    using namespace dsp48sim;
    WsConfig cfg;
    cfg.rows = rows;
    cfg.cols = cols;
    cfg.packing_enabled = true;
    cfg.rounds_per_weight_set = batch;
    cfg.exec = policy;
    WsEngine eng(cfg);
    Rng rng(42);
    const Mat tile = random_mat(rng, rows, eng.effective_cols());
    const Mat acts = random_mat(rng, batch, rows);
    const auto start = Clock::now();
    auto res = eng.run_stream({tile}, {acts});
    const double dt = seconds_since(start);
    std::int64_t sum = 0;
    for (auto v : res.outputs.data) sum += v;
    *checksum = sum;
    const double slice_ticks = static_cast<double>(res.total_ticks) * eng.slice_count();
    std::printf("  %-8s %8.3f s   %10.1f Mslice-ticks/s\n",
                policy == ExecPolicy::ForceSerial ? "serial" : "parallel", dt, slice_ticks / dt / 1e6);
    return dt;
}

} // namespace

int main(int argc, char** argv) {
    const int rows = argc > 1 ? std::stoi(argv[1]) : 64;
    const int cols = argc > 2 ? std::stoi(argv[2]) : 64;
    const int batch = argc > 3 ? std::stoi(argv[3]) : 256;

#ifdef _OPENMP
    std::printf("openmp: %d threads\n", omp_get_max_threads());
#else
    std::printf("openmp: not enabled\n");
#endif

    std::printf("ws engine %dx%d, batch %d (%d slices)\n", rows, cols, batch, rows * cols + cols);
    std::int64_t sum_serial = 0;
    std::int64_t sum_parallel = 0;
    const double ts = bench_ws(dsp48sim::ExecPolicy::ForceSerial, rows, cols, batch, &sum_serial);
    const double tp = bench_ws(dsp48sim::ExecPolicy::ForceParallel, rows, cols, batch, &sum_parallel);
    if (sum_serial != sum_parallel) {
        std::printf("MISMATCH between serial and parallel results\n");
        return 1;
    }
    std::printf("  speedup  %.2fx (results identical)\n", ts / tp);

    std::printf("packing exhaustive sweep (2^24 cases)\n");
    {
        const auto start = Clock::now();
        const auto failures = dsp48sim::packing::exhaustive_check(false);
        std::printf("  %-8s %8.3f s   (%lld failures)\n", "serial", seconds_since(start),
                    static_cast<long long>(failures));
    }
    {
        const auto start = Clock::now();
        const auto failures = dsp48sim::packing::exhaustive_check(true);
        std::printf("  %-8s %8.3f s   (%lld failures)\n", "parallel", seconds_since(start),
                    static_cast<long long>(failures));
    }
    return 0;
}
