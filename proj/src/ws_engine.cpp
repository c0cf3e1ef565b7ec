#include "dsp48sim/ws_engine.hpp"

#include <algorithm>
#include <string>

#include "dsp48sim/packing.hpp"

namespace dsp48sim {

namespace {

bool use_parallel(ExecPolicy policy, std::size_t n) {
    switch (policy) {
        case ExecPolicy::ForceSerial: return false;
        case ExecPolicy::ForceParallel: return true;
        case ExecPolicy::Auto: return n >= 512;
    }
    return false;
}

void step_all(std::vector<Dsp48e2Slice>& slices, const std::vector<Dsp48e2Ports>& ports, ExecPolicy policy) {
    if (use_parallel(policy, slices.size())) {
        step_slices_parallel(slices, ports);
    } else {
        step_slices_serial(slices, ports);
    }
}

// TWO24 lane word carrying a bias-split packed product or psum.
std::int64_t lane_word24(std::int64_t hi, std::int64_t lo) {
    return sign_extend((to_bits(hi, 24) << 24) | to_bits(lo, 24), 48);
}

} // namespace

std::int64_t WsRunResult::readout_tick(std::int64_t act_row, std::int64_t out_col) const {
    const std::int64_t c = packing ? out_col / 2 : out_col;
    return t_act0 + act_row + rows + c + act_stages + 1;
}

WsEngine::WsEngine(const WsConfig& cfg) : cfg_(cfg) {
    if (cfg.rows < 1 || cfg.cols < 1) throw ConfigError("ws geometry must be at least 1x1");
    if (cfg.rounds_per_weight_set < cfg.rows)
        throw ConfigError("rounds_per_weight_set must be >= rows so prefetch can hide reloads");
    if (cfg.act_pipeline_stages != 1 && cfg.act_pipeline_stages != 2)
        throw ConfigError("act_pipeline_stages must be 1 or 2");

    const bool dsp_fetch = cfg.fetch_variant == FetchVariant::DspFetch;
    for (int p = 0; p < cfg.rows; ++p) {
        for (int c = 0; c < cfg.cols; ++c) {
            Dsp48e2Attrs a;
            a.mreg_enabled = true;
            a.preg_enabled = true;
            if (cfg.packing_enabled) {
                // weight pair on A, activations on B
                a.simd_mode = SimdMode::Two24;
                a.areg_stages = dsp_fetch ? 2 : 1;
                a.a_input_source = (dsp_fetch && p > 0) ? InputSource::Cascade : InputSource::Direct;
                a.breg_stages = cfg.act_pipeline_stages;
            } else {
                // weights on B, activations on A
                a.simd_mode = SimdMode::One48;
                a.breg_stages = dsp_fetch ? 2 : 1;
                a.b_input_source = (dsp_fetch && p > 0) ? InputSource::Cascade : InputSource::Direct;
                a.areg_stages = cfg.act_pipeline_stages;
            }
            slices_.emplace_back(a);
        }
    }
    for (int c = 0; c < cfg.cols; ++c) {
        Dsp48e2Attrs a;
        a.areg_stages = 1;
        a.breg_stages = 1;
        a.simd_mode = cfg.packing_enabled ? SimdMode::Two24 : SimdMode::One48;
        slices_.emplace_back(a);
    }
    prev_out_.assign(slices_.size(), Dsp48e2Outputs{});
    clb_chain_.assign(static_cast<std::size_t>(cfg.cols),
                      std::vector<std::int64_t>(static_cast<std::size_t>(cfg.rows), 0));
}

std::int64_t WsEngine::modeled_clb_weight_bits() const {
    if (cfg_.fetch_variant == FetchVariant::DspFetch) return 0;
    return static_cast<std::int64_t>(cfg_.rows) * effective_cols() * 8;
}

void WsEngine::validate_tile(const Mat& tile) const {
    if (tile.rows != cfg_.rows || tile.cols != effective_cols())
        throw StimulusError("weight tile must be rows x effective_cols");
    for (auto v : tile.data)
        if (!fits_signed(v, 8)) throw StimulusError("weight out of signed 8-bit range");
}

namespace {

struct StreamPlan {
    // Activation-set starts (prefix sums) and the tiles consumed at each swap.
    std::vector<std::int64_t> set_start; // size J+1, set_start[J] = total rows
    std::int64_t total = 0;
    int num_tiles = 0; // tiles available for reload scheduling (index 1..num_tiles-1 load mid-stream)
};

} // namespace

struct WsEngine::Schedule {};

WsRunResult WsEngine::execute(const std::vector<Mat>& tiles, const std::vector<Mat>& batches, bool initial_load) {
    const int rows = cfg_.rows;
    const int cols = cfg_.cols;
    const int s = cfg_.act_pipeline_stages;
    const bool packing = cfg_.packing_enabled;
    const bool dsp_fetch = cfg_.fetch_variant == FetchVariant::DspFetch;
    const int ecols = effective_cols();

    StreamPlan plan;
    plan.set_start.push_back(0);
    for (const auto& b : batches) {
        if (b.cols != rows) throw StimulusError("activation batch must be batch x rows");
        for (auto v : b.data)
            if (!fits_signed(v, 8)) throw StimulusError("activation out of signed 8-bit range");
        plan.set_start.push_back(plan.set_start.back() + b.rows);
    }
    plan.total = plan.set_start.back();
    plan.num_tiles = static_cast<int>(tiles.size());
    for (std::size_t j = 0; j + 1 < batches.size(); ++j) {
        if (batches[j].rows < rows) throw ScheduleError("every batch except the last needs at least `rows` rows");
    }

    // Concatenated activation lookup.
    auto act_at = [&](std::int64_t I, int k) -> std::int64_t {
        std::size_t j = 0;
        while (I >= plan.set_start[j + 1]) ++j;
        return batches[j].at(I - plan.set_start[j], k);
    };

    // Weight entry value for tile index j, stream position i (0 = first in),
    // column c: the first value streamed settles farthest from the entry.
    auto tile_entry = [&](int tile_idx, std::int64_t i, int c) -> std::int64_t {
        const Mat& tile = tiles[static_cast<std::size_t>(tile_idx)];
        const std::int64_t k = rows - 1 - i;
        if (!packing) return tile.at(k, c);
        return packing::pack(tile.at(k, 2 * c + 1), tile.at(k, 2 * c)).packed27;
    };

    const std::int64_t t_swap0 = initial_load ? rows + cols - 1 : -1;
    const std::int64_t t_act0 = initial_load ? rows + cols : 0;
    std::int64_t t_end = plan.total > 0 ? t_act0 + (plan.total - 1) + rows + (cols - 1) + s + 1 + 1 : t_act0;
    if (initial_load) t_end = std::max(t_end, t_swap0 + 1);

    WsRunResult res;
    res.outputs = Mat(plan.total, ecols);
    res.t_act0 = t_act0;
    res.rows = rows;
    res.cols = cols;
    res.act_stages = s;
    res.packing = packing;
    res.latency_ticks = rows + s + 1;
    res.total_ticks = t_end;

    // Reload/swap coordinates, shared by the tick loop.
    // swap of set j (j>=1) at slice (p,c): t_act0 + set_start[j] + p + c + s - 1
    // burst for tile j starts at the same coordinate of set j-1 and runs
    // rows - p pulses; the entry stream for tile j at column c carries
    // tile_entry(j, i, c) at tick B_j(0,c) + i.
    auto stream_coord = [&](std::int64_t t, int p, int c) { return t - t_act0 - p - c - s + 1; };

    auto find_set = [&](std::int64_t q) -> int {
        // largest j with set_start[j] <= q, or -1
        int j = -1;
        for (std::size_t i = 0; i < plan.set_start.size(); ++i) {
            if (plan.set_start[i] <= q) j = static_cast<int>(i);
        }
        return j;
    };

    std::vector<Dsp48e2Ports> ports(slices_.size());
    const std::int64_t interior_lo = t_act0 + s + 1 + (rows - 1) + (cols - 1);
    const std::int64_t interior_hi = t_act0 + s + plan.total; // inclusive
    std::int64_t interior_useful = 0;
    std::int64_t interior_ticks = std::max<std::int64_t>(0, interior_hi - interior_lo + 1);

    // Trace signal ids, declared lazily.
    struct SliceSigs {
        std::uint32_t a1, a2, b1, b2, p, ce_a1, ce_a2, ce_b1, ce_b2;
    };
    std::vector<SliceSigs> sigs;
    std::vector<std::uint32_t> acc_sigs;
    if (trace_) {
        for (int p = 0; p < rows; ++p) {
            for (int c = 0; c < cols; ++c) {
                const std::string base = "ws/" + std::to_string(p) + "_" + std::to_string(c) + "/";
                sigs.push_back(SliceSigs{
                    trace_->declare(base + "a1", 27), trace_->declare(base + "a2", 27),
                    trace_->declare(base + "b1", 18), trace_->declare(base + "b2", 18),
                    trace_->declare(base + "p", 48), trace_->declare(base + "ce_a1", 1),
                    trace_->declare(base + "ce_a2", 1), trace_->declare(base + "ce_b1", 1),
                    trace_->declare(base + "ce_b2", 1)});
            }
        }
        for (int c = 0; c < cols; ++c) acc_sigs.push_back(trace_->declare("ws/acc_" + std::to_string(c) + "/p", 48));
    }

    // one full-width weight-stream coordinate evaluation per (t, p, c)
    auto weight_ctrl = [&](std::int64_t t, int p, int c, bool& ce1, bool& ce2, std::int64_t& entry) {
        ce1 = false;
        ce2 = false;
        entry = 0;
        if (initial_load && plan.num_tiles > 0) {
            // initial bursts: slice (p,c) shifts at ticks [p+c, rows-1+c]
            if (t >= p + c && t <= rows - 1 + c) {
                ce1 = true;
                if (p == 0) entry = tile_entry(0, t - c, c);
            }
            if (t == t_swap0) ce2 = true;
        }
        if (t >= t_act0 && plan.num_tiles > 1) {
            const std::int64_t q = stream_coord(t, p, c);
            for (std::size_t j = 1; j + 1 < plan.set_start.size(); ++j) {
                if (q == plan.set_start[j]) ce2 = true; // swap at the set boundary
            }
            const int owner = find_set(q);
            if (owner >= 0) {
                const std::int64_t r = q - plan.set_start[static_cast<std::size_t>(owner)];
                const int tile_idx = owner + 1;
                if (r >= 0 && r < rows - p && tile_idx < plan.num_tiles) {
                    ce1 = true; // prefetch burst for the next tile
                    if (p == 0) entry = tile_entry(tile_idx, r, c);
                }
            }
        }
    };

    auto build_mac_ports = [&](std::int64_t t, int p, int c, const Dsp48e2State& st) -> Dsp48e2Ports {
        Dsp48e2Ports pt;
        const std::int64_t I = t - t_act0 - p - c;
        const std::int64_t act = (I >= 0 && I < plan.total) ? act_at(I, p) : 0;

        bool ce1_w, ce2_w;
        std::int64_t w_port;
        weight_ctrl(t, p, c, ce1_w, ce2_w, w_port);
        if (!dsp_fetch) {
            // fabric chain shifts; the slice sees only the stationary capture
            w_port = clb_chain_[static_cast<std::size_t>(c)][static_cast<std::size_t>(p)];
        }

        if (packing) {
            pt.b = act;
            pt.ce_b1 = pt.ce_b2 = true;
            pt.a = w_port;
            pt.ce_a1 = dsp_fetch && ce1_w;
            pt.ce_a2 = ce2_w;
            pt.opmode_x = MuxX::Zero;
            pt.opmode_y = MuxY::C;
            pt.opmode_z = p == 0 ? MuxZ::Zero : MuxZ::Pcin;
            const auto split = packing::split_biased(st.m + packing::kLaneBias);
            pt.c = lane_word24(split.hi, split.lo);
        } else {
            pt.a = act;
            pt.ce_a1 = pt.ce_a2 = true;
            pt.b = w_port;
            pt.ce_b1 = dsp_fetch && ce1_w;
            pt.ce_b2 = ce2_w;
            pt.opmode_x = MuxX::M;
            pt.opmode_y = MuxY::M;
            pt.opmode_z = p == 0 ? MuxZ::Zero : MuxZ::Pcin;
        }
        if (p > 0) {
            const auto& up = prev_out_[static_cast<std::size_t>((p - 1) * cols + c)];
            pt.acin = up.acout;
            pt.bcin = up.bcout;
            pt.pcin = up.pcout;
        }
        return pt;
    };

    const bool par = use_parallel(cfg_.exec, slices_.size());
    std::vector<Dsp48e2Outputs> next_out(slices_.size());
    const std::ptrdiff_t n_mac = static_cast<std::ptrdiff_t>(rows) * cols;
    const std::ptrdiff_t n_all = n_mac + cols;

    for (std::int64_t t = 0; t < t_end; ++t) {
        // CLB chain shift decisions use pre-tick values
        std::vector<std::pair<std::size_t, std::vector<std::int64_t>>> chain_updates;
        if (!dsp_fetch && plan.num_tiles > 0) {
            for (int c = 0; c < cols; ++c) {
                auto& chain = clb_chain_[static_cast<std::size_t>(c)];
                std::vector<std::int64_t> next = chain;
                bool changed = false;
                for (int p = 0; p < rows; ++p) {
                    bool ce1, ce2;
                    std::int64_t entry;
                    weight_ctrl(t, p, c, ce1, ce2, entry);
                    if (ce1) {
                        next[static_cast<std::size_t>(p)] = p == 0 ? entry : chain[static_cast<std::size_t>(p - 1)];
                        changed = true;
                    }
                }
                if (changed) chain_updates.emplace_back(static_cast<std::size_t>(c), std::move(next));
            }
        }

        // build, step, and collect per slice in one pass so slice state stays
        // local to its thread across the tick
#pragma omp parallel for schedule(static) if (par)
        for (std::ptrdiff_t idx = 0; idx < n_all; ++idx) {
            Dsp48e2Ports pt;
            if (idx < n_mac) {
                const int p = static_cast<int>(idx / cols);
                const int c = static_cast<int>(idx % cols);
                pt = build_mac_ports(t, p, c, slices_[static_cast<std::size_t>(idx)].state());
            } else {
                const int c = static_cast<int>(idx - n_mac);
                pt.opmode_z = MuxZ::Pcin;
                pt.pcin = prev_out_[static_cast<std::size_t>((rows - 1) * cols + c)].pcout;
            }
            auto& slice = slices_[static_cast<std::size_t>(idx)];
            slice.tick(pt);
            next_out[static_cast<std::size_t>(idx)] = slice.last_outputs();
            if (trace_) ports[static_cast<std::size_t>(idx)] = pt;
        }
        prev_out_.swap(next_out);
        for (auto& [c, next] : chain_updates) clb_chain_[c] = std::move(next);

        // useful-product accounting: slice (p,c) adds a streamed product when
        // t - t_act0 - p - c - s - 1 lands inside the activation stream
        if (t >= interior_lo && t <= interior_hi) {
            const std::int64_t T = t - t_act0 - s - 1;
            for (int p = 0; p < rows; ++p) {
                const std::int64_t lo = std::max<std::int64_t>(0, T - (plan.total - 1) - p);
                const std::int64_t hi = std::min<std::int64_t>(cols - 1, T - p);
                if (hi >= lo) interior_useful += hi - lo + 1;
            }
        }

        if (trace_) {
            for (int p = 0; p < rows; ++p) {
                for (int c = 0; c < cols; ++c) {
                    const std::size_t idx = static_cast<std::size_t>(p * cols + c);
                    const auto& st = slices_[idx].state();
                    const auto& sg = sigs[idx];
                    trace_->record(sg.a1, t, to_bits(st.a1, 27));
                    trace_->record(sg.a2, t, to_bits(st.a2, 27));
                    trace_->record(sg.b1, t, to_bits(st.b1, 18));
                    trace_->record(sg.b2, t, to_bits(st.b2, 18));
                    trace_->record(sg.p, t, to_bits(st.p, 48));
                    trace_->record(sg.ce_a1, t, ports[idx].ce_a1 ? 1 : 0);
                    trace_->record(sg.ce_a2, t, ports[idx].ce_a2 ? 1 : 0);
                    trace_->record(sg.ce_b1, t, ports[idx].ce_b1 ? 1 : 0);
                    trace_->record(sg.ce_b2, t, ports[idx].ce_b2 ? 1 : 0);
                }
            }
            for (int c = 0; c < cols; ++c) {
                trace_->record(acc_sigs[static_cast<std::size_t>(c)], t,
                               to_bits(slices_[static_cast<std::size_t>(rows * cols + c)].state().p, 48));
            }
        }

        // readout
        for (int c = 0; c < cols; ++c) {
            const std::int64_t I = t - t_act0 - rows - c - s - 1;
            if (I < 0 || I >= plan.total) continue;
            const std::int64_t pval = slices_[static_cast<std::size_t>(rows * cols + c)].state().p;
            if (packing) {
                const std::int64_t hi = sign_extend(to_bits(pval, 48) >> 24, 24);
                const std::int64_t lo_biased = static_cast<std::int64_t>(to_bits(pval, 24));
                const std::int64_t lo = wrap_signed(lo_biased - static_cast<std::int64_t>(rows) * packing::kLaneBias, 24);
                res.outputs.at(I, 2 * c) = lo;
                res.outputs.at(I, 2 * c + 1) = hi;
            } else {
                res.outputs.at(I, c) = pval;
            }
        }
    }

    res.steady_utilization =
        interior_ticks > 0
            ? static_cast<double>(interior_useful) / (static_cast<double>(interior_ticks) * rows * cols)
            : 0.0;
    return res;
}

std::int64_t WsEngine::preload_weights(const Mat& tile) {
    if (preload_pending_) throw ScheduleError("previous preload has not been swapped in yet");
    validate_tile(tile);
    const int rows = cfg_.rows;
    const int cols = cfg_.cols;
    const bool dsp_fetch = cfg_.fetch_variant == FetchVariant::DspFetch;

    auto entry = [&](std::int64_t i, int c) -> std::int64_t {
        const std::int64_t k = rows - 1 - i;
        if (!cfg_.packing_enabled) return tile.at(k, c);
        return packing::pack(tile.at(k, 2 * c + 1), tile.at(k, 2 * c)).packed27;
    };

    std::vector<Dsp48e2Ports> ports(slices_.size());
    for (std::int64_t t = 0; t < rows; ++t) {
        for (int p = 0; p < rows; ++p) {
            for (int c = 0; c < cols; ++c) {
                Dsp48e2Ports pt;
                const bool ce1 = t >= p; // burst [p, rows-1]
                const std::int64_t w_port = p == 0 && ce1 ? entry(t, c) : 0;
                if (cfg_.packing_enabled) {
                    pt.a = w_port;
                    pt.ce_a1 = dsp_fetch && ce1;
                    pt.ce_a2 = false;
                    pt.ce_b1 = pt.ce_b2 = false;
                    pt.opmode_x = MuxX::Zero;
                    pt.opmode_y = MuxY::C;
                } else {
                    pt.b = w_port;
                    pt.ce_b1 = dsp_fetch && ce1;
                    pt.ce_b2 = false;
                    pt.ce_a1 = pt.ce_a2 = false;
                    pt.opmode_x = MuxX::M;
                    pt.opmode_y = MuxY::M;
                }
                pt.opmode_z = p == 0 ? MuxZ::Zero : MuxZ::Pcin;
                if (p > 0) {
                    const auto& up = prev_out_[static_cast<std::size_t>((p - 1) * cols + c)];
                    pt.acin = up.acout;
                    pt.bcin = up.bcout;
                    pt.pcin = up.pcout;
                }
                ports[static_cast<std::size_t>(p * cols + c)] = pt;
            }
        }
        for (int c = 0; c < cols; ++c) {
            Dsp48e2Ports pt;
            pt.opmode_z = MuxZ::Pcin;
            pt.pcin = prev_out_[static_cast<std::size_t>((rows - 1) * cols + c)].pcout;
            ports[static_cast<std::size_t>(rows * cols + c)] = pt;
        }

        std::vector<std::vector<std::int64_t>> chain_next;
        if (!dsp_fetch) {
            chain_next = clb_chain_;
            for (int c = 0; c < cols; ++c) {
                for (int p = 0; p < rows; ++p) {
                    if (t >= p) {
                        chain_next[static_cast<std::size_t>(c)][static_cast<std::size_t>(p)] =
                            p == 0 ? entry(t, c) : clb_chain_[static_cast<std::size_t>(c)][static_cast<std::size_t>(p - 1)];
                    }
                }
            }
        }

        step_all(slices_, ports, cfg_.exec);
        for (std::size_t i = 0; i < slices_.size(); ++i) prev_out_[i] = slices_[i].last_outputs();
        if (!dsp_fetch) clb_chain_ = std::move(chain_next);
    }

    pending_tile_ = tile;
    preload_pending_ = true;
    return rows;
}

void WsEngine::swap_weights() {
    if (!preload_pending_) throw ScheduleError("swap requested with no completed preload pending");
    const int rows = cfg_.rows;
    const int cols = cfg_.cols;
    std::vector<Dsp48e2Ports> ports(slices_.size());
    for (int p = 0; p < rows; ++p) {
        for (int c = 0; c < cols; ++c) {
            Dsp48e2Ports pt;
            if (cfg_.packing_enabled) {
                pt.ce_a1 = false;
                pt.ce_a2 = true;
                pt.ce_b1 = pt.ce_b2 = false;
                pt.opmode_x = MuxX::Zero;
                pt.opmode_y = MuxY::C;
                if (cfg_.fetch_variant == FetchVariant::ClbFetch)
                    pt.a = clb_chain_[static_cast<std::size_t>(c)][static_cast<std::size_t>(p)];
            } else {
                pt.ce_b1 = false;
                pt.ce_b2 = true;
                pt.ce_a1 = pt.ce_a2 = false;
                pt.opmode_x = MuxX::M;
                pt.opmode_y = MuxY::M;
                if (cfg_.fetch_variant == FetchVariant::ClbFetch)
                    pt.b = clb_chain_[static_cast<std::size_t>(c)][static_cast<std::size_t>(p)];
            }
            pt.opmode_z = p == 0 ? MuxZ::Zero : MuxZ::Pcin;
            if (p > 0) {
                const auto& up = prev_out_[static_cast<std::size_t>((p - 1) * cols + c)];
                pt.acin = up.acout;
                pt.bcin = up.bcout;
                pt.pcin = up.pcout;
            }
            ports[static_cast<std::size_t>(p * cols + c)] = pt;
        }
    }
    for (int c = 0; c < cols; ++c) {
        Dsp48e2Ports pt;
        pt.opmode_z = MuxZ::Pcin;
        pt.pcin = prev_out_[static_cast<std::size_t>((rows - 1) * cols + c)].pcout;
        ports[static_cast<std::size_t>(rows * cols + c)] = pt;
    }
    step_all(slices_, ports, cfg_.exec);
    for (std::size_t i = 0; i < slices_.size(); ++i) prev_out_[i] = slices_[i].last_outputs();

    resident_tile_ = pending_tile_;
    preload_pending_ = false;
    weights_resident_ = true;
}

WsRunResult WsEngine::run(const Mat& acts) {
    if (!weights_resident_) throw ScheduleError("run requested before any weights were swapped in");
    return execute({}, {acts}, false);
}

WsRunResult WsEngine::run_stream(const std::vector<Mat>& tiles, const std::vector<Mat>& batches) {
    if (tiles.empty() || batches.empty()) throw StimulusError("run_stream needs at least one tile and one batch");
    if (tiles.size() != batches.size() && tiles.size() != batches.size() + 1)
        throw StimulusError("run_stream needs one tile per batch (plus an optional trailing prefetch)");
    for (const auto& tile : tiles) validate_tile(tile);

    for (auto& s : slices_) s.reset();
    prev_out_.assign(slices_.size(), Dsp48e2Outputs{});
    for (auto& chain : clb_chain_) std::fill(chain.begin(), chain.end(), 0);
    preload_pending_ = false;
    weights_resident_ = false;

    WsRunResult res = execute(tiles, batches, true);
    weights_resident_ = true;
    resident_tile_ = tiles[batches.size() - 1];
    return res;
}

} // namespace dsp48sim
