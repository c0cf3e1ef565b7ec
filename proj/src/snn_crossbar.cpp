#include "dsp48sim/snn_crossbar.hpp"

#include <algorithm>
#include <string>

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

std::int64_t lanes_to_word(const std::array<std::int64_t, 4>& lanes) {
    std::uint64_t w = 0;
    for (int l = 0; l < 4; ++l) w |= to_bits(lanes[l], 12) << (12 * l);
    return sign_extend(w, 48);
}

std::array<std::int64_t, 4> word_to_lanes(std::int64_t word) {
    std::array<std::int64_t, 4> lanes{};
    for (int l = 0; l < 4; ++l) lanes[static_cast<std::size_t>(l)] = sign_extend(to_bits(word, 48) >> (12 * l), 12);
    return lanes;
}

} // namespace

CrossbarSliceState::CrossbarSliceState() {
    Dsp48e2Attrs a;
    a.simd_mode = SimdMode::Four12;
    a.areg_stages = 1;
    a.breg_stages = 1;
    a.mreg_enabled = false;
    slice = Dsp48e2Slice(a);
}

std::array<std::int64_t, 4> step_crossbar(CrossbarSliceState& st, bool s0, bool s1,
                                          const std::array<std::int64_t, 4>& weights_ab,
                                          const std::array<std::int64_t, 4>& weights_c) {
    for (auto v : weights_ab)
        if (!fits_signed(v, 12)) throw StimulusError("AB weight lane out of signed 12-bit range");
    for (auto v : weights_c)
        if (!fits_signed(v, 12)) throw StimulusError("C weight lane out of signed 12-bit range");
    const std::int64_t ab = lanes_to_word(weights_ab);
    if (!fits_signed(ab >> 18, 27)) throw StimulusError("AB lane 3 exceeds the 27-bit concatenation range");

    // load tick: weight registers capture, P holds
    Dsp48e2Ports load;
    load.a = ab >> 18;
    load.b = sign_extend(to_bits(ab, 18), 18);
    load.opmode_x = MuxX::Zero;
    load.opmode_y = MuxY::Zero;
    load.opmode_z = MuxZ::P;
    st.slice.tick(load);

    // gated accumulation tick
    Dsp48e2Ports gate;
    gate.ce_a1 = gate.ce_a2 = gate.ce_b1 = gate.ce_b2 = false;
    gate.c = lanes_to_word(weights_c);
    gate.opmode_x = s0 ? MuxX::AB : MuxX::Zero;
    gate.opmode_y = s1 ? MuxY::C : MuxY::Zero;
    gate.opmode_z = MuxZ::P;
    const auto& out = st.slice.tick(gate);
    return word_to_lanes(out.p);
}

SnnCrossbar::SnnCrossbar(const CrossbarConfig& cfg) : cfg_(cfg) {
    if (cfg.chains < 1 || cfg.chain_len < 1) throw ConfigError("crossbar geometry must be at least 1x1");
    if (cfg.weight_bits < 1 || cfg.weight_bits > 12) throw ConfigError("weight_bits must be in [1, 12]");
    const bool dsp = cfg.fetch_variant == SnnFetch::DspFetchAb;
    for (int ch = 0; ch < cfg.chains; ++ch) {
        for (int q = 0; q < cfg.chain_len; ++q) {
            Dsp48e2Attrs a;
            a.simd_mode = SimdMode::Four12;
            a.mreg_enabled = false;
            a.areg_stages = dsp ? 2 : 1;
            a.breg_stages = dsp ? 2 : 1;
            a.a_input_source = (dsp && q > 0) ? InputSource::Cascade : InputSource::Direct;
            a.b_input_source = (dsp && q > 0) ? InputSource::Cascade : InputSource::Direct;
            slices_.emplace_back(a);
        }
    }
    prev_out_.assign(slices_.size(), Dsp48e2Outputs{});
    clb_c_chain_.assign(static_cast<std::size_t>(cfg.chains),
                        std::vector<std::int64_t>(static_cast<std::size_t>(cfg.chain_len), 0));
    clb_ab_chain_ = clb_c_chain_;
    resident_c_ = clb_c_chain_;
    resident_ab_clb_ = clb_c_chain_;
}

std::int64_t SnnCrossbar::modeled_clb_weight_bits() const {
    const std::int64_t per_set = static_cast<std::int64_t>(cfg_.chains) * cfg_.chain_len * 4 * cfg_.weight_bits;
    return cfg_.fetch_variant == SnnFetch::DspFetchAb ? per_set : 2 * per_set;
}

std::int64_t SnnCrossbar::ab_word(const SynapseWeights& w) const {
    const std::int64_t word = lanes_to_word(w.ab);
    if (!fits_signed(word >> 18, 27))
        throw StimulusError("AB lane 3 exceeds the 27-bit concatenation range");
    return word;
}

std::int64_t SnnCrossbar::c_word(const SynapseWeights& w) const { return lanes_to_word(w.c); }

void SnnCrossbar::validate_weights(const std::vector<std::vector<SynapseWeights>>& weights) const {
    if (static_cast<int>(weights.size()) != cfg_.chains) throw StimulusError("weight tensor chain count mismatch");
    for (const auto& chain : weights) {
        if (static_cast<int>(chain.size()) != cfg_.chain_len) throw StimulusError("weight tensor length mismatch");
        for (const auto& w : chain) {
            for (auto v : w.ab)
                if (!fits_signed(v, cfg_.weight_bits)) throw StimulusError("AB weight exceeds weight_bits");
            for (auto v : w.c)
                if (!fits_signed(v, cfg_.weight_bits)) throw StimulusError("C weight exceeds weight_bits");
        }
    }
}

std::int64_t SnnCrossbar::prefetch_weights(const std::vector<std::vector<SynapseWeights>>& weights) {
    if (prefetch_pending_) throw ScheduleError("previous prefetch has not been committed yet");
    validate_weights(weights);
    const int L = cfg_.chain_len;
    const bool dsp = cfg_.fetch_variant == SnnFetch::DspFetchAb;

    std::vector<Dsp48e2Ports> ports(slices_.size());
    for (std::int64_t t = 0; t < L; ++t) {
        for (int ch = 0; ch < cfg_.chains; ++ch) {
            for (int q = 0; q < L; ++q) {
                Dsp48e2Ports pt;
                const bool ce1 = t >= q;
                if (dsp && ce1 && q == 0) {
                    const std::int64_t word = ab_word(weights[static_cast<std::size_t>(ch)][static_cast<std::size_t>(L - 1 - t)]);
                    pt.a = word >> 18;
                    pt.b = sign_extend(to_bits(word, 18), 18);
                }
                pt.ce_a1 = pt.ce_b1 = dsp && ce1;
                pt.ce_a2 = pt.ce_b2 = false;
                pt.opmode_z = MuxZ::P; // membrane state undisturbed during reload
                if (q > 0) {
                    const auto& up = prev_out_[static_cast<std::size_t>(ch * L + q - 1)];
                    pt.acin = up.acout;
                    pt.bcin = up.bcout;
                }
                ports[static_cast<std::size_t>(ch * L + q)] = pt;
            }
        }

        // fabric staging chains shift on the same schedule
        auto shift = [&](std::vector<std::vector<std::int64_t>>& chains, auto entry_of) {
            for (int ch = 0; ch < cfg_.chains; ++ch) {
                auto& chain = chains[static_cast<std::size_t>(ch)];
                std::vector<std::int64_t> next = chain;
                for (int q = 0; q < L; ++q) {
                    if (t >= q) next[static_cast<std::size_t>(q)] = q == 0 ? entry_of(ch) : chain[static_cast<std::size_t>(q - 1)];
                }
                chain = std::move(next);
            }
        };
        shift(clb_c_chain_, [&](int ch) {
            return c_word(weights[static_cast<std::size_t>(ch)][static_cast<std::size_t>(L - 1 - t)]);
        });
        if (!dsp) {
            shift(clb_ab_chain_, [&](int ch) {
                return ab_word(weights[static_cast<std::size_t>(ch)][static_cast<std::size_t>(L - 1 - t)]);
            });
        }

        if (use_parallel(cfg_.exec, slices_.size())) {
            step_slices_parallel(slices_, ports);
        } else {
            step_slices_serial(slices_, ports);
        }
        for (std::size_t i = 0; i < slices_.size(); ++i) prev_out_[i] = slices_[i].last_outputs();
    }

    prefetch_pending_ = true;
    return L;
}

void SnnCrossbar::commit_weights() {
    if (!prefetch_pending_) throw ScheduleError("commit requested with no completed prefetch");
    const int L = cfg_.chain_len;
    const bool dsp = cfg_.fetch_variant == SnnFetch::DspFetchAb;
    std::vector<Dsp48e2Ports> ports(slices_.size());
    for (int ch = 0; ch < cfg_.chains; ++ch) {
        for (int q = 0; q < L; ++q) {
            Dsp48e2Ports pt;
            pt.ce_a1 = pt.ce_b1 = false;
            pt.ce_a2 = pt.ce_b2 = true;
            if (!dsp) {
                const std::int64_t word = clb_ab_chain_[static_cast<std::size_t>(ch)][static_cast<std::size_t>(q)];
                pt.a = word >> 18;
                pt.b = sign_extend(to_bits(word, 18), 18);
            }
            pt.opmode_z = MuxZ::P;
            ports[static_cast<std::size_t>(ch * L + q)] = pt;
        }
    }
    if (use_parallel(cfg_.exec, slices_.size())) {
        step_slices_parallel(slices_, ports);
    } else {
        step_slices_serial(slices_, ports);
    }
    for (std::size_t i = 0; i < slices_.size(); ++i) prev_out_[i] = slices_[i].last_outputs();

    resident_c_ = clb_c_chain_;
    if (!dsp) resident_ab_clb_ = clb_ab_chain_;
    prefetch_pending_ = false;
    weights_resident_ = true;
}

Mat SnnCrossbar::run(const std::vector<std::vector<std::vector<SpikePair>>>& spikes) {
    if (!weights_resident_) throw ScheduleError("run requested before weights were committed");
    const int L = cfg_.chain_len;
    const std::int64_t ticks = static_cast<std::int64_t>(spikes.size());
    for (const auto& per_tick : spikes) {
        if (static_cast<int>(per_tick.size()) != cfg_.chains) throw StimulusError("spike matrix chain mismatch");
        for (const auto& chain : per_tick)
            if (static_cast<int>(chain.size()) != L) throw StimulusError("spike matrix length mismatch");
    }

    std::vector<std::uint32_t> p_sigs, s0_sigs, s1_sigs;
    if (trace_) {
        for (int ch = 0; ch < cfg_.chains; ++ch) {
            for (int q = 0; q < L; ++q) {
                const std::string base = "snn/" + std::to_string(ch) + "_" + std::to_string(q) + "/";
                p_sigs.push_back(trace_->declare(base + "p", 48));
                s0_sigs.push_back(trace_->declare(base + "s0", 1));
                s1_sigs.push_back(trace_->declare(base + "s1", 1));
            }
        }
    }

    Mat membrane(cfg_.chains, 4);
    std::vector<Dsp48e2Ports> ports(slices_.size());
    std::vector<Dsp48e2Outputs> next(slices_.size());
    const bool par = use_parallel(cfg_.exec, slices_.size());
    const std::int64_t t_end = ticks + L - 1;
    for (std::int64_t t = 0; t < t_end; ++t) {
        // chains are independent within a tick
#pragma omp parallel for schedule(static) if (par)
        for (int ch = 0; ch < cfg_.chains; ++ch) {
            for (int q = 0; q < L; ++q) {
                Dsp48e2Ports pt;
                const std::int64_t i = t - q; // spike set applied at this slice
                bool s0 = false;
                bool s1 = false;
                if (i >= 0 && i < ticks) {
                    const auto& sp = spikes[static_cast<std::size_t>(i)][static_cast<std::size_t>(ch)]
                                           [static_cast<std::size_t>(q)];
                    s0 = sp.s0;
                    s1 = sp.s1;
                }
                pt.ce_a1 = pt.ce_a2 = pt.ce_b1 = pt.ce_b2 = false;
                pt.c = resident_c_[static_cast<std::size_t>(ch)][static_cast<std::size_t>(q)];
                pt.opmode_x = s0 ? MuxX::AB : MuxX::Zero;
                pt.opmode_y = s1 ? MuxY::C : MuxY::Zero;
                pt.opmode_z = q == 0 ? MuxZ::Zero : MuxZ::Pcin;
                if (q > 0) pt.pcin = prev_out_[static_cast<std::size_t>(ch * L + q - 1)].pcout;

                const std::size_t idx = static_cast<std::size_t>(ch * L + q);
                slices_[idx].tick(pt);
                next[idx] = slices_[idx].last_outputs();
                if (trace_) ports[idx] = pt;
            }
        }
        prev_out_.swap(next);

        if (trace_) {
            for (int ch = 0; ch < cfg_.chains; ++ch) {
                for (int q = 0; q < L; ++q) {
                    const std::size_t idx = static_cast<std::size_t>(ch * L + q);
                    trace_->record(p_sigs[idx], t, to_bits(slices_[idx].state().p, 48));
                    trace_->record(s0_sigs[idx], t, ports[idx].opmode_x == MuxX::AB ? 1 : 0);
                    trace_->record(s1_sigs[idx], t, ports[idx].opmode_y == MuxY::C ? 1 : 0);
                }
            }
        }

        // membrane accumulation at the chain tails, 12-bit lane wrap
        const std::int64_t i_out = t - (L - 1);
        if (i_out >= 0 && i_out < ticks) {
            for (int ch = 0; ch < cfg_.chains; ++ch) {
                const auto lanes = word_to_lanes(slices_[static_cast<std::size_t>(ch * L + L - 1)].state().p);
                for (int l = 0; l < 4; ++l) {
                    membrane.at(ch, l) = wrap_signed(membrane.at(ch, l) + lanes[static_cast<std::size_t>(l)], 12);
                }
            }
        }
    }
    return membrane;
}

Mat run_crossbar(const CrossbarConfig& cfg, const Mat& spike_matrix, const Mat& weight_rows, int ticks) {
    SnnCrossbar eng(cfg);
    const int L = cfg.chain_len;
    if (weight_rows.rows != static_cast<std::int64_t>(cfg.chains) * L || weight_rows.cols != 8)
        throw StimulusError("weight matrix must be chains*chain_len x 8");
    if (spike_matrix.rows != ticks || spike_matrix.cols != static_cast<std::int64_t>(cfg.chains) * L * 2)
        throw StimulusError("spike matrix must be ticks x chains*chain_len*2");

    std::vector<std::vector<SynapseWeights>> weights(static_cast<std::size_t>(cfg.chains));
    for (int ch = 0; ch < cfg.chains; ++ch) {
        for (int q = 0; q < L; ++q) {
            SynapseWeights w;
            for (int l = 0; l < 4; ++l) {
                w.ab[static_cast<std::size_t>(l)] = weight_rows.at(ch * L + q, l);
                w.c[static_cast<std::size_t>(l)] = weight_rows.at(ch * L + q, 4 + l);
            }
            weights[static_cast<std::size_t>(ch)].push_back(w);
        }
    }
    eng.prefetch_weights(weights);
    eng.commit_weights();

    std::vector<std::vector<std::vector<SnnCrossbar::SpikePair>>> spikes(static_cast<std::size_t>(ticks));
    for (int t = 0; t < ticks; ++t) {
        spikes[static_cast<std::size_t>(t)].assign(static_cast<std::size_t>(cfg.chains), {});
        for (int ch = 0; ch < cfg.chains; ++ch) {
            auto& chain = spikes[static_cast<std::size_t>(t)][static_cast<std::size_t>(ch)];
            chain.resize(static_cast<std::size_t>(L));
            for (int q = 0; q < L; ++q) {
                chain[static_cast<std::size_t>(q)].s0 = spike_matrix.at(t, (ch * L + q) * 2) != 0;
                chain[static_cast<std::size_t>(q)].s1 = spike_matrix.at(t, (ch * L + q) * 2 + 1) != 0;
            }
        }
    }
    return eng.run(spikes);
}

} // namespace dsp48sim
