// Structural resource accounting for the three engines: closed-form counts
// of slices, modeled register bits, multiplexer and adder-tree elements, and
// port widths per configuration and variant. The output-stationary formulas
// are calibrated once against the B1024 breakdown (chain_len 4, two chains
// per group, sixteen groups) and documented next to each formula; they scale
// with geometry but only the calibration point is contract-exact. Vivado
// absolutes (LUT/FF totals, frequency, power) are out of scope.
#pragma once

#include <cstdint>
#include <string>

#include "dsp48sim/os_engine.hpp"
#include "dsp48sim/snn_crossbar.hpp"
#include "dsp48sim/ws_engine.hpp"

namespace dsp48sim {

struct ResourceReport {
    std::int64_t dsp_mult = 0;
    std::int64_t dsp_acc = 0;
    std::int64_t clb_mux_elems = 0;
    std::int64_t addtree_lut = 0;
    std::int64_t addtree_ff = 0;
    std::int64_t addtree_carry = 0;
    std::int64_t weight_reg_bits_clb = 0;
    std::int64_t staging_ff_bits = 0;
    std::int64_t psum_ff = 0;
    std::int64_t wgt_img_ff = 0;
    std::int64_t wgt_width = 0;
    std::int64_t img_width = 0;
    std::int64_t psum_width = 0;

    std::int64_t dsp_total() const { return dsp_mult + dsp_acc; }

    // header row matches the field names, one CSV line of exact integers
    static std::string csv_header();
    std::string to_csv_row() const;
    std::string to_json() const;
};

ResourceReport report_ws(const WsConfig& cfg);
ResourceReport report_os(const OsConfig& cfg);
ResourceReport report_snn(const CrossbarConfig& cfg);

} // namespace dsp48sim
