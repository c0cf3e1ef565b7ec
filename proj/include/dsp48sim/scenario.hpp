// Scenario files drive the harness: a JSON document names an engine, its
// configuration, a stimulus (explicit matrices or seeded random), the checks
// to run, and the artifacts to write. Random stimuli are fully determined by
// the seed, so reruns produce byte-identical reports and waveform dumps.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dsp48sim/gemm_ref.hpp"

namespace dsp48sim {

struct ScenarioResult {
    int exit_code = 0;                 // 0 pass, 1 check failure, 2 config/parse, 3 io
    std::vector<std::string> messages; // one line per check or failure
    bool passed() const { return exit_code == 0; }
};

// Loads and executes a scenario file. seed_override replaces the file's seed
// when set; out_dir prefixes relative artifact paths; force_trace turns on
// waveform capture regardless of the file (used by the vcd verb).
ScenarioResult run_scenario(const std::string& path, std::optional<std::uint64_t> seed_override,
                            const std::string& out_dir, bool force_trace = false);

// Emits the resource report for the scenario's engine block.
ScenarioResult report_scenario(const std::string& path, const std::string& out_dir);

} // namespace dsp48sim
