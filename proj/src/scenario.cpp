#include "dsp48sim/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <functional>

#include <json.hpp>

#include "dsp48sim/os_engine.hpp"
#include "dsp48sim/resource_model.hpp"
#include "dsp48sim/rng.hpp"
#include "dsp48sim/snn_crossbar.hpp"
#include "dsp48sim/trace.hpp"
#include "dsp48sim/ws_engine.hpp"

namespace dsp48sim {

namespace {

using nlohmann::json;

Mat mat_from_json(const json& j) {
    Mat m(static_cast<std::int64_t>(j.size()), j.empty() ? 0 : static_cast<std::int64_t>(j[0].size()));
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (static_cast<std::int64_t>(j[r].size()) != m.cols) throw StimulusError("ragged matrix in scenario");
        for (std::size_t c = 0; c < j[r].size(); ++c) m.at(static_cast<std::int64_t>(r), static_cast<std::int64_t>(c)) = j[r][c].get<std::int64_t>();
    }
    return m;
}

json mat_to_json(const Mat& m) {
    json rows = json::array();
    for (std::int64_t r = 0; r < m.rows; ++r) {
        json row = json::array();
        for (std::int64_t c = 0; c < m.cols; ++c) row.push_back(m.at(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat random_int8_mat(Rng& rng, std::int64_t r, std::int64_t c) {
    Mat m(r, c);
    for (auto& v : m.data) v = rng.int8();
    return m;
}

std::string joined_path(const std::string& out_dir, const std::string& rel) {
    if (out_dir.empty() || std::filesystem::path(rel).is_absolute()) return rel;
    return (std::filesystem::path(out_dir) / rel).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

bool has_check(const json& j, const std::string& name) {
    if (!j.contains("checks")) return false;
    for (const auto& c : j["checks"])
        if (c.get<std::string>() == name) return true;
    return false;
}

struct CheckFailure {
    std::string message;
};

void compare_outputs(const Mat& got, const Mat& want, const std::string& what,
                     const std::function<std::int64_t(std::int64_t, std::int64_t)>& tick_of,
                     std::vector<std::string>& messages) {
    if (got.rows != want.rows || got.cols != want.cols) {
        throw CheckFailure{what + ": shape mismatch (" + std::to_string(got.rows) + "x" + std::to_string(got.cols) +
                           " vs " + std::to_string(want.rows) + "x" + std::to_string(want.cols) + ")"};
    }
    for (std::int64_t r = 0; r < got.rows; ++r) {
        for (std::int64_t c = 0; c < got.cols; ++c) {
            if (got.at(r, c) != want.at(r, c)) {
                throw CheckFailure{what + ": first mismatch at element (" + std::to_string(r) + ", " +
                                   std::to_string(c) + ") tick " + std::to_string(tick_of(r, c)) + ": got " +
                                   std::to_string(got.at(r, c)) + ", expected " + std::to_string(want.at(r, c))};
            }
        }
    }
    messages.push_back(what + ": ok (" + std::to_string(got.rows * got.cols) + " elements)");
}

WsConfig ws_config_from(const json& j) {
    WsConfig c;
    c.rows = j.value("rows", 4);
    c.cols = j.value("cols", 4);
    c.packing_enabled = j.value("packing", false);
    c.fetch_variant = j.value("fetch", std::string("dsp")) == "clb" ? FetchVariant::ClbFetch : FetchVariant::DspFetch;
    c.rounds_per_weight_set = j.value("rounds_per_weight_set", c.rows);
    c.act_pipeline_stages = j.value("act_pipeline_stages", 2);
    return c;
}

OsConfig os_config_from(const json& j, OsVariant variant) {
    OsConfig c;
    if (j.value("preset", std::string()) == "b1024") {
        c = OsConfig::b1024(variant);
    } else {
        c.chain_len = j.value("chain_len", 4);
        c.chains_per_group = j.value("chains_per_group", 2);
        c.num_groups = j.value("num_groups", 1);
        c.packing_enabled = j.value("packing", true);
        c.variant = variant;
    }
    if (j.contains("packing")) c.packing_enabled = j["packing"].get<bool>();
    return c;
}

CrossbarConfig snn_config_from(const json& j) {
    CrossbarConfig c;
    c.chains = j.value("chains", 4);
    c.chain_len = j.value("chain_len", 16);
    c.weight_bits = j.value("weight_bits", 8);
    c.fetch_variant = j.value("fetch", std::string("dsp_ab")) == "clb" ? SnnFetch::ClbFetch : SnnFetch::DspFetchAb;
    return c;
}

void emit_artifacts(const json& j, const std::string& out_dir, const WaveformTrace* trace, const json& results,
                    const ResourceReport* report, std::vector<std::string>& messages, bool force_trace,
                    const std::string& scenario_path) {
    const json outputs = j.value("outputs", json::object());
    std::string vcd_path = outputs.value("vcd", std::string());
    if (vcd_path.empty() && force_trace) {
        vcd_path = std::filesystem::path(scenario_path).stem().string() + ".vcd";
    }
    if (!vcd_path.empty() && trace) {
        const std::string full = joined_path(out_dir, vcd_path);
        export_vcd(*trace, full);
        messages.push_back("wrote " + full);
    }
    if (outputs.contains("results_json")) {
        const std::string full = joined_path(out_dir, outputs["results_json"].get<std::string>());
        write_text(full, results.dump(2) + "\n");
        messages.push_back("wrote " + full);
    }
    if (report) {
        if (outputs.contains("report_csv")) {
            const std::string full = joined_path(out_dir, outputs["report_csv"].get<std::string>());
            write_text(full, ResourceReport::csv_header() + "\n" + report->to_csv_row() + "\n");
            messages.push_back("wrote " + full);
        }
        if (outputs.contains("report_json")) {
            const std::string full = joined_path(out_dir, outputs["report_json"].get<std::string>());
            write_text(full, report->to_json());
            messages.push_back("wrote " + full);
        }
    }
}

void run_ws(const json& j, std::uint64_t seed, const std::string& out_dir, bool force_trace,
            const std::string& path, std::vector<std::string>& messages) {
    WsConfig cfg = ws_config_from(j.value("ws", json::object()));
    const json stim = j.value("stimulus", json::object());
    Rng rng(seed);

    WsEngine engine(cfg);
    Mat tile, acts;
    if (stim.value("kind", std::string("random")) == "explicit") {
        tile = mat_from_json(stim.at("weights"));
        acts = mat_from_json(stim.at("activations"));
    } else {
        tile = random_int8_mat(rng, cfg.rows, engine.effective_cols());
        acts = random_int8_mat(rng, stim.value("batch", 16), cfg.rows);
    }

    const bool want_trace = force_trace || j.value("trace", false);
    WaveformTrace trace;
    if (want_trace) engine.attach_trace(&trace);

    WsRunResult res;
    if (has_check(j, "utilization")) {
        // three back-to-back weight sets to exercise the reload pipeline
        std::vector<Mat> tiles{tile, random_int8_mat(rng, cfg.rows, engine.effective_cols()),
                               random_int8_mat(rng, cfg.rows, engine.effective_cols())};
        std::vector<Mat> batches{acts, random_int8_mat(rng, acts.rows, cfg.rows),
                                 random_int8_mat(rng, acts.rows, cfg.rows)};
        res = engine.run_stream(tiles, batches);
        if (res.steady_utilization != 1.0) {
            throw CheckFailure{"utilization: steady-state MAC utilization " +
                               std::to_string(res.steady_utilization) + " != 1.0"};
        }
        messages.push_back("utilization: ok (1.0 across back-to-back weight sets)");
        Mat expect(0, engine.effective_cols());
        for (std::size_t s = 0; s < tiles.size(); ++s) {
            const Mat part = ref_gemm(batches[s], tiles[s]);
            expect.data.insert(expect.data.end(), part.data.begin(), part.data.end());
            expect.rows += part.rows;
        }
        compare_outputs(res.outputs, expect, "gemm",
                        [&](std::int64_t r, std::int64_t c) { return res.readout_tick(r, c); }, messages);
    } else {
        res = engine.run_stream({tile}, {acts});
        if (has_check(j, "gemm") || j.contains("expected_outputs")) {
            const Mat expect =
                j.contains("expected_outputs") ? mat_from_json(j["expected_outputs"]) : ref_gemm(acts, tile);
            compare_outputs(res.outputs, expect, "gemm",
                            [&](std::int64_t r, std::int64_t c) { return res.readout_tick(r, c); }, messages);
        }
    }

    if (has_check(j, "variant_equivalence")) {
        WsConfig other = cfg;
        other.fetch_variant =
            cfg.fetch_variant == FetchVariant::DspFetch ? FetchVariant::ClbFetch : FetchVariant::DspFetch;
        WsEngine eng2(other);
        auto res2 = eng2.run_stream({tile}, {acts});
        compare_outputs(res2.outputs, res.outputs, "variant_equivalence",
                        [&](std::int64_t r, std::int64_t c) { return res.readout_tick(r, c); }, messages);
    }

    if (has_check(j, "b2_stability") && want_trace) {
        // weight registers may change only at swap events: at most one change
        // after the initial sample per resident set
        for (int p = 0; p < cfg.rows; ++p) {
            for (int c = 0; c < cfg.cols; ++c) {
                const std::string name = "ws/" + std::to_string(p) + "_" + std::to_string(c) +
                                         (cfg.packing_enabled ? "/a2" : "/b2");
                const auto changes = trace.change_ticks(trace.id(name));
                if (changes.size() > 4) {
                    throw CheckFailure{"b2_stability: " + name + " changed " + std::to_string(changes.size()) +
                                       " times, tick " + std::to_string(changes.back())};
                }
            }
        }
        messages.push_back("b2_stability: ok");
    }

    json results;
    results["engine"] = "ws";
    results["outputs"] = mat_to_json(res.outputs);
    results["latency_ticks"] = res.latency_ticks;
    results["total_ticks"] = res.total_ticks;
    results["steady_utilization"] = res.steady_utilization;
    ResourceReport rep = report_ws(cfg);
    emit_artifacts(j, out_dir, want_trace ? &trace : nullptr, results, &rep, messages, force_trace, path);
}

void run_os(const json& j, std::uint64_t seed, const std::string& out_dir, bool force_trace,
            const std::string& path, std::vector<std::string>& messages) {
    const json oj = j.value("os", json::object());
    const std::string variant = oj.value("variant", std::string("enhanced"));
    OsConfig enh = os_config_from(oj, OsVariant::Enhanced);
    OsConfig off = os_config_from(oj, OsVariant::Official);
    const int span = enh.chains_per_group * enh.chain_len;
    const int W = oj.value("windows", 4);

    Rng rng(seed);
    const json stim = j.value("stimulus", json::object());
    OsProblem p;
    OsEngine probe(enh);
    if (stim.value("kind", std::string("random")) == "explicit") {
        p.acts = mat_from_json(stim.at("activations"));
        p.wts = mat_from_json(stim.at("weights"));
        if (stim.contains("bias")) p.bias = mat_from_json(stim.at("bias"));
    } else {
        p.acts = random_int8_mat(rng, probe.act_rows(), static_cast<std::int64_t>(span) * W);
        p.wts = random_int8_mat(rng, static_cast<std::int64_t>(span) * W, 2 * enh.num_groups);
        if (oj.value("bias", std::string("zero")) == "random") {
            p.bias = Mat(enh.num_groups, 2);
            for (auto& v : p.bias.data) v = rng.range(-4096, 4096);
        }
    }

    Mat oracle = ref_gemm(p.acts, p.wts);
    if (p.bias.rows != 0) {
        for (std::int64_t r = 0; r < oracle.rows; ++r)
            for (int g = 0; g < enh.num_groups; ++g)
                for (int c = 0; c < 2; ++c) oracle.at(r, 2 * g + c) += p.bias.at(g, r % 2);
    }

    const bool want_trace = force_trace || j.value("trace", false) || has_check(j, "waveform");
    WaveformTrace trace;

    OsRunResult res_enh, res_off;
    const bool run_enh = variant == "enhanced" || variant == "both";
    const bool run_off = variant == "official" || variant == "both";
    if (run_enh) {
        OsEngine eng(enh);
        if (want_trace) eng.attach_trace(&trace);
        res_enh = eng.run(p);
    }
    if (run_off) {
        OsEngine eng(off);
        res_off = eng.run(p);
    }
    const OsRunResult& primary = run_enh ? res_enh : res_off;

    if (has_check(j, "gemm") || j.contains("expected_outputs")) {
        Mat expect;
        if (j.contains("expected_outputs")) {
            expect = mat_from_json(j["expected_outputs"]);
        } else {
            expect = oracle;
            for (auto& v : expect.data) v = wrap_signed(v, run_enh ? 24 : 29);
        }
        compare_outputs(primary.outputs, expect, "gemm",
                        [&](std::int64_t, std::int64_t) { return primary.readout_tick; }, messages);
    }

    if (has_check(j, "cross_variant")) {
        if (!run_enh || !run_off) throw CheckFailure{"cross_variant requires variant == \"both\""};
        compare_outputs(res_enh.outputs, res_off.outputs, "cross_variant",
                        [&](std::int64_t, std::int64_t) { return res_enh.readout_tick; }, messages);
        if (res_enh.slow_ticks != res_off.slow_ticks) {
            throw CheckFailure{"cross_variant: slow tick counts differ (" + std::to_string(res_enh.slow_ticks) +
                               " vs " + std::to_string(res_off.slow_ticks) + ")"};
        }
        messages.push_back("throughput: ok (" + std::to_string(res_enh.slow_ticks) + " slow ticks both)");
    }

    if (has_check(j, "bandwidth")) {
        if (!run_enh || !run_off) throw CheckFailure{"bandwidth requires variant == \"both\""};
        if (res_enh.weight_bytes_per_slice_per_slow_tick * 2 != res_off.weight_bytes_per_slice_per_slow_tick) {
            throw CheckFailure{"bandwidth: enhanced does not stream half the official operand bytes"};
        }
        if (res_enh.readout_pairs_per_group != 2 * res_off.readout_pairs_per_group) {
            throw CheckFailure{"bandwidth: output records per window are not doubled"};
        }
        messages.push_back("bandwidth: ok (operand bytes halved, output records doubled)");
    }

    if (has_check(j, "waveform")) {
        if (!run_enh) throw CheckFailure{"waveform checks apply to the enhanced variant"};
        for (const auto& [tick, slot] : res_enh.slot_writes) {
            if (tick % 4 != slot) {
                throw CheckFailure{"waveform: slot " + std::to_string(slot) + " written on tick " +
                                   std::to_string(tick)};
            }
        }
        for (const auto& recs : res_enh.drain_records) {
            if (recs.size() != 4 || recs[3].first != recs[0].first + 3) {
                throw CheckFailure{"waveform: drain is not four records over four fast ticks"};
            }
        }
        const auto ce1 = trace.id("os/g0/ch0/s0/ce_b1");
        const auto ce2 = trace.id("os/g0/ch0/s0/ce_b2");
        const auto sel = trace.id("os/g0/ch0/s0/sel_b");
        std::vector<std::int64_t> h1, h2;
        for (std::int64_t t = 0; t < res_enh.fast_ticks; ++t) {
            if (trace.value_at(ce1, t)) h1.push_back(t);
            if (trace.value_at(ce2, t)) h2.push_back(t);
            if (t > 0 && trace.value_at(sel, t) == trace.value_at(sel, t - 1)) {
                throw CheckFailure{"waveform: B-select did not alternate at tick " + std::to_string(t)};
            }
        }
        for (std::size_t i = 1; i < h1.size(); ++i)
            if (h1[i] - h1[i - 1] != 4) throw CheckFailure{"waveform: CE_B1 period != 4"};
        for (std::size_t i = 1; i < h2.size(); ++i)
            if (h2[i] - h2[i - 1] != 4) throw CheckFailure{"waveform: CE_B2 period != 4"};
        if (h1.empty() || h2.empty() || ((h2[0] - h1[0]) % 4 + 4) % 4 != 2) {
            throw CheckFailure{"waveform: CE_B1/CE_B2 offset != 2"};
        }
        messages.push_back("waveform: ok (CE periods, selector alternation, slot phases, drain shape)");
    }

    json results;
    results["engine"] = "os";
    if (run_enh) {
        results["outputs"] = mat_to_json(res_enh.outputs);
        results["slow_ticks"] = res_enh.slow_ticks;
        results["weight_bytes_per_slice_per_slow_tick"] = res_enh.weight_bytes_per_slice_per_slow_tick;
    }
    if (run_off) {
        results["official_outputs"] = mat_to_json(res_off.outputs);
        if (!run_enh) results["slow_ticks"] = res_off.slow_ticks;
    }
    ResourceReport rep = report_os(run_enh ? enh : off);
    emit_artifacts(j, out_dir, want_trace ? &trace : nullptr, results, &rep, messages, force_trace, path);
}

void run_snn(const json& j, std::uint64_t seed, const std::string& out_dir, bool force_trace,
             const std::string& path, std::vector<std::string>& messages) {
    CrossbarConfig cfg = snn_config_from(j.value("snn", json::object()));
    const json sj = j.value("snn", json::object());
    const int ticks = sj.value("ticks", 16);
    const int density = sj.value("spike_density", 35);

    Rng rng(seed);
    const json stim = j.value("stimulus", json::object());
    Mat weights, spikes;
    if (stim.value("kind", std::string("random")) == "explicit") {
        weights = mat_from_json(stim.at("weights"));
        spikes = mat_from_json(stim.at("spikes"));
    } else {
        weights = Mat(static_cast<std::int64_t>(cfg.chains) * cfg.chain_len, 8);
        for (auto& v : weights.data)
            v = rng.range(-(1 << (cfg.weight_bits - 1)), (1 << (cfg.weight_bits - 1)) - 1);
        spikes = Mat(ticks, static_cast<std::int64_t>(cfg.chains) * cfg.chain_len * 2);
        for (auto& v : spikes.data) v = rng.range(0, 99) < density ? 1 : 0;
    }

    const Mat out = run_crossbar(cfg, spikes, weights, static_cast<int>(spikes.rows));
    const std::int64_t final_tick = spikes.rows + cfg.chain_len - 2;

    if (has_check(j, "gated_sum") || j.contains("expected_outputs")) {
        Mat expect;
        if (j.contains("expected_outputs")) {
            expect = mat_from_json(j["expected_outputs"]);
        } else {
            expect = Mat(cfg.chains, 4);
            for (int ch = 0; ch < cfg.chains; ++ch)
                for (int q = 0; q < cfg.chain_len; ++q)
                    for (std::int64_t t = 0; t < spikes.rows; ++t)
                        for (int l = 0; l < 4; ++l) {
                            const std::int64_t s = static_cast<std::int64_t>(ch) * cfg.chain_len + q;
                            if (spikes.at(t, s * 2)) expect.at(ch, l) += weights.at(s, l);
                            if (spikes.at(t, s * 2 + 1)) expect.at(ch, l) += weights.at(s, 4 + l);
                        }
            for (auto& v : expect.data) v = wrap_signed(v, 12);
        }
        compare_outputs(out, expect, "gated_sum", [&](std::int64_t, std::int64_t) { return final_tick; },
                        messages);
    }

    if (has_check(j, "variant_equivalence")) {
        CrossbarConfig other = cfg;
        other.fetch_variant = cfg.fetch_variant == SnnFetch::DspFetchAb ? SnnFetch::ClbFetch : SnnFetch::DspFetchAb;
        const Mat out2 = run_crossbar(other, spikes, weights, static_cast<int>(spikes.rows));
        compare_outputs(out2, out, "variant_equivalence",
                        [&](std::int64_t, std::int64_t) { return final_tick; }, messages);
    }

    json results;
    results["engine"] = "snn";
    results["membrane"] = mat_to_json(out);
    ResourceReport rep = report_snn(cfg);

    const bool want_trace = force_trace || j.value("trace", false);
    WaveformTrace trace;
    if (want_trace) {
        // rerun with capture; same seed, same stimulus, deterministic
        SnnCrossbar eng(cfg);
        eng.attach_trace(&trace);
        std::vector<std::vector<SynapseWeights>> w(static_cast<std::size_t>(cfg.chains),
                                                   std::vector<SynapseWeights>(static_cast<std::size_t>(cfg.chain_len)));
        for (int ch = 0; ch < cfg.chains; ++ch)
            for (int q = 0; q < cfg.chain_len; ++q)
                for (int l = 0; l < 4; ++l) {
                    w[ch][q].ab[l] = weights.at(static_cast<std::int64_t>(ch) * cfg.chain_len + q, l);
                    w[ch][q].c[l] = weights.at(static_cast<std::int64_t>(ch) * cfg.chain_len + q, 4 + l);
                }
        eng.prefetch_weights(w);
        eng.commit_weights();
        std::vector<std::vector<std::vector<SnnCrossbar::SpikePair>>> sp(static_cast<std::size_t>(spikes.rows));
        for (std::int64_t t = 0; t < spikes.rows; ++t) {
            sp[t].assign(static_cast<std::size_t>(cfg.chains),
                         std::vector<SnnCrossbar::SpikePair>(static_cast<std::size_t>(cfg.chain_len)));
            for (int ch = 0; ch < cfg.chains; ++ch)
                for (int q = 0; q < cfg.chain_len; ++q) {
                    const std::int64_t s = static_cast<std::int64_t>(ch) * cfg.chain_len + q;
                    sp[t][ch][q].s0 = spikes.at(t, s * 2) != 0;
                    sp[t][ch][q].s1 = spikes.at(t, s * 2 + 1) != 0;
                }
        }
        eng.run(sp);
    }
    emit_artifacts(j, out_dir, want_trace ? &trace : nullptr, results, &rep, messages, force_trace, path);
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file: " + path);
    json j;
    in >> j;
    return j;
}

} // namespace

ScenarioResult run_scenario(const std::string& path, std::optional<std::uint64_t> seed_override,
                            const std::string& out_dir, bool force_trace) {
    ScenarioResult result;
    json j;
    try {
        j = load_json(path);
    } catch (const IoError& e) {
        result.exit_code = 3;
        result.messages.push_back(e.what());
        return result;
    } catch (const std::exception& e) {
        result.exit_code = 2;
        result.messages.push_back(std::string("scenario parse error: ") + e.what());
        return result;
    }

    try {
        const std::uint64_t seed = seed_override.value_or(j.value("seed", 1ull));
        const std::string engine = j.value("engine", std::string());
        if (engine == "ws") {
            run_ws(j, seed, out_dir, force_trace, path, result.messages);
        } else if (engine == "os") {
            run_os(j, seed, out_dir, force_trace, path, result.messages);
        } else if (engine == "snn") {
            run_snn(j, seed, out_dir, force_trace, path, result.messages);
        } else {
            throw ConfigError("unknown engine kind: '" + engine + "'");
        }
    } catch (const CheckFailure& f) {
        result.exit_code = 1;
        result.messages.push_back(f.message);
    } catch (const IoError& e) {
        result.exit_code = 3;
        result.messages.push_back(e.what());
    } catch (const std::exception& e) {
        result.exit_code = 2;
        result.messages.push_back(e.what());
    }
    return result;
}

ScenarioResult report_scenario(const std::string& path, const std::string& out_dir) {
    ScenarioResult result;
    try {
        const json j = load_json(path);
        const std::string engine = j.value("engine", std::string());
        ResourceReport rep;
        if (engine == "ws") {
            rep = report_ws(ws_config_from(j.value("ws", json::object())));
        } else if (engine == "os") {
            const json oj = j.value("os", json::object());
            const std::string variant = oj.value("variant", std::string("enhanced"));
            rep = report_os(os_config_from(oj, variant == "official" ? OsVariant::Official : OsVariant::Enhanced));
        } else if (engine == "snn") {
            rep = report_snn(snn_config_from(j.value("snn", json::object())));
        } else {
            throw ConfigError("unknown engine kind: '" + engine + "'");
        }
        result.messages.push_back(ResourceReport::csv_header());
        result.messages.push_back(rep.to_csv_row());
        const json outputs = j.value("outputs", json::object());
        if (outputs.contains("report_csv")) {
            const std::string full = joined_path(out_dir, outputs["report_csv"].get<std::string>());
            write_text(full, ResourceReport::csv_header() + "\n" + rep.to_csv_row() + "\n");
            result.messages.push_back("wrote " + full);
        }
        if (outputs.contains("report_json")) {
            const std::string full = joined_path(out_dir, outputs["report_json"].get<std::string>());
            write_text(full, rep.to_json());
            result.messages.push_back("wrote " + full);
        }
    } catch (const IoError& e) {
        result.exit_code = 3;
        result.messages.push_back(e.what());
    } catch (const std::exception& e) {
        result.exit_code = 2;
        result.messages.push_back(e.what());
    }
    return result;
}

} // namespace dsp48sim
