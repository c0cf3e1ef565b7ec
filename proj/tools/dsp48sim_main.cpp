// CLI front end: run scenario files, execute the exhaustive self-test
// suites, emit resource reports, and dump waveform traces.
//
// Exit codes: 0 all checks pass, 1 check failure, 2 usage/parse/config
// error, 3 I/O failure.
#include <chrono>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dsp48sim/dsp48e2.hpp"
#include "dsp48sim/packing.hpp"
#include "dsp48sim/rng.hpp"
#include "dsp48sim/scenario.hpp"

namespace {

int selftest_packing() {
    using namespace dsp48sim;
    const auto start = std::chrono::steady_clock::now();
    const std::int64_t failures = packing::exhaustive_check(true);
    const auto elapsed =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    std::printf("packing selftest: 16777216 cases, %lld failures, %lld ms\n",
                static_cast<long long>(failures), static_cast<long long>(elapsed.count()));
    if (failures == 0) return 0;
    // locate and report the first failing triple
    for (int hi = -128; hi <= 127; ++hi) {
        for (int lo = -128; lo <= 127; ++lo) {
            for (int w = -128; w <= 127; ++w) {
                const auto lp = packing::unpack_and_correct(packing::pack(hi, lo).packed27 * w);
                if (lp.p_hi != static_cast<std::int64_t>(hi) * w || lp.p_lo != static_cast<std::int64_t>(lo) * w) {
                    std::printf("first failing triple: hi=%d lo=%d w=%d -> (%lld, %lld)\n", hi, lo, w,
                                static_cast<long long>(lp.p_hi), static_cast<long long>(lp.p_lo));
                    return 1;
                }
            }
        }
    }
    return 1;
}

int selftest_simd(std::uint64_t seed) {
    using namespace dsp48sim;
    Rng rng(seed);
    const int trials = 1'000'000;
    for (int trial = 0; trial < trials; ++trial) {
        const SimdMode mode = static_cast<SimdMode>(trial % 3);
        const int lw = mode == SimdMode::One48 ? 48 : (mode == SimdMode::Two24 ? 24 : 12);
        const std::int64_t w = sign_extend(rng.next(), 48);
        const std::int64_t x = sign_extend(rng.next(), 48);
        const std::int64_t y = sign_extend(rng.next(), 48);
        const std::int64_t z = sign_extend(rng.next(), 48);
        const std::int64_t r = simd_add(w, x, y, z, mode);
        for (int lo_bit = 0; lo_bit < 48; lo_bit += lw) {
            const auto lane = [&](std::int64_t v) {
                return sign_extend(static_cast<std::uint64_t>(v) >> lo_bit, lw);
            };
            const std::int64_t expect = wrap_signed(lane(w) + lane(x) + lane(y) + lane(z), lw);
            if (lane(r) != expect) {
                std::printf("simd selftest: first failure at trial %d mode %d lane bit %d\n", trial,
                            static_cast<int>(mode), lo_bit);
                return 1;
            }
        }
    }
    std::printf("simd selftest: %d cases, 0 failures (seed %llu)\n", trials,
                static_cast<unsigned long long>(seed));
    return 0;
}

int print_result(const dsp48sim::ScenarioResult& res) {
    for (const auto& m : res.messages) std::printf("%s\n", m.c_str());
    std::printf(res.passed() ? "PASS\n" : "FAIL (exit %d)\n", res.exit_code);
    return res.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bit-exact DSP48E2 systolic engine simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;

    auto add_common = [&](CLI::App* cmd, bool needs_path) {
        if (needs_path) cmd->add_option("scenario", scenario_path, "scenario JSON file")->required();
        cmd->add_option("--out-dir", out_dir, "directory prefix for output artifacts");
        cmd->add_option("--seed", seed, "override the scenario seed");
    };

    auto* run_cmd = app.add_subcommand("run", "execute a scenario and its checks");
    add_common(run_cmd, true);
    auto* vcd_cmd = app.add_subcommand("vcd", "execute a scenario with waveform capture and write a VCD");
    add_common(vcd_cmd, true);
    auto* report_cmd = app.add_subcommand("report", "emit the resource report for a scenario's engine");
    add_common(report_cmd, true);

    std::string suite;
    auto* selftest_cmd = app.add_subcommand("selftest", "run built-in verification suites");
    selftest_cmd->add_option("suite", suite, "packing | simd | all")->required();
    selftest_cmd->add_option("--seed", seed, "seed for the randomized suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (run_cmd->parsed()) {
        return print_result(dsp48sim::run_scenario(scenario_path, seed, out_dir, false));
    }
    if (vcd_cmd->parsed()) {
        return print_result(dsp48sim::run_scenario(scenario_path, seed, out_dir, true));
    }
    if (report_cmd->parsed()) {
        return print_result(dsp48sim::report_scenario(scenario_path, out_dir));
    }
    if (selftest_cmd->parsed()) {
        if (suite == "packing") return selftest_packing();
        if (suite == "simd") return selftest_simd(seed.value_or(0xD5F));
        if (suite == "all") {
            const int a = selftest_packing();
            const int b = selftest_simd(seed.value_or(0xD5F));
            return a != 0 ? a : b;
        }
        std::fprintf(stderr, "unknown selftest suite '%s' (expected packing | simd | all)\n", suite.c_str());
        return 2;
    }
    return 2;
}
