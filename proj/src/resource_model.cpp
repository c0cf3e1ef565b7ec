#include "dsp48sim/resource_model.hpp"

#include <sstream>

namespace dsp48sim {

std::string ResourceReport::csv_header() {
    return "dsp_mult,dsp_acc,clb_mux_elems,addtree_lut,addtree_ff,addtree_carry,"
           "weight_reg_bits_clb,staging_ff_bits,psum_ff,wgt_img_ff,wgt_width,img_width,psum_width";
}

std::string ResourceReport::to_csv_row() const {
    std::ostringstream os;
    os << dsp_mult << ',' << dsp_acc << ',' << clb_mux_elems << ',' << addtree_lut << ',' << addtree_ff << ','
       << addtree_carry << ',' << weight_reg_bits_clb << ',' << staging_ff_bits << ',' << psum_ff << ','
       << wgt_img_ff << ',' << wgt_width << ',' << img_width << ',' << psum_width;
    return os.str();
}

std::string ResourceReport::to_json() const {
    std::ostringstream os;
    os << "{\n"
       << "  \"dsp_mult\": " << dsp_mult << ",\n"
       << "  \"dsp_acc\": " << dsp_acc << ",\n"
       << "  \"clb_mux_elems\": " << clb_mux_elems << ",\n"
       << "  \"addtree_lut\": " << addtree_lut << ",\n"
       << "  \"addtree_ff\": " << addtree_ff << ",\n"
       << "  \"addtree_carry\": " << addtree_carry << ",\n"
       << "  \"weight_reg_bits_clb\": " << weight_reg_bits_clb << ",\n"
       << "  \"staging_ff_bits\": " << staging_ff_bits << ",\n"
       << "  \"psum_ff\": " << psum_ff << ",\n"
       << "  \"wgt_img_ff\": " << wgt_img_ff << ",\n"
       << "  \"wgt_width\": " << wgt_width << ",\n"
       << "  \"img_width\": " << img_width << ",\n"
       << "  \"psum_width\": " << psum_width << "\n"
       << "}\n";
    return os.str();
}

ResourceReport report_ws(const WsConfig& cfg) {
    WsEngine probe(cfg); // validates geometry
    const std::int64_t rows = cfg.rows;
    const std::int64_t cols = cfg.cols;
    const std::int64_t ecols = probe.effective_cols();

    ResourceReport r;
    r.dsp_mult = rows * cols;
    r.dsp_acc = cols; // one P-chain terminating accumulator per column
    // one prefetch register set in fabric per slice unless it rides the
    // in-DSP stage-1 cascade
    r.weight_reg_bits_clb = cfg.fetch_variant == FetchVariant::ClbFetch ? rows * ecols * 8 : 0;
    // activation staging: one byte register per inter-column hop plus the
    // input-edge skew triangle
    r.staging_ff_bits = 8 * (rows * (cols - 1) + rows * (rows - 1) / 2);
    r.wgt_width = 8 * ecols;       // one tile row per prefetch tick
    r.img_width = 8 * rows;        // one activation per grid row per tick
    r.psum_width = 32 * ecols;     // de-skewed 32-bit results per column lane
    return r;
}

ResourceReport report_os(const OsConfig& cfg) {
    OsEngine probe(cfg);
    const std::int64_t chains = static_cast<std::int64_t>(cfg.chains_per_group) * cfg.num_groups;
    const std::int64_t mult = chains * cfg.chain_len;
    const bool official = cfg.variant == OsVariant::Official;

    ResourceReport r;
    r.dsp_mult = mult;                                            // B1024: 128
    r.dsp_acc = official ? 2 * chains : 2 * cfg.num_groups;       // B1024: 64 / 32
    r.clb_mux_elems = official ? mult : 0;                        // one DDR weight mux per slice: 128 / 0
    r.addtree_lut = official ? 36 * chains : 0;                   // two 18-bit pair adders per chain: 1152 / 0
    r.addtree_ff = official ? 38 * chains : 0;                    // two registered 19-bit sums per chain: 1216 / 0
    r.addtree_carry = official ? 6 * chains : 0;                  // three CARRY8 per pair adder: 192 / 0
    r.wgt_width = 4 * mult;                                       // weight reload bus, both variants: 512
    r.img_width = official ? 16 * chains : 8 * chains;            // DDR-muxed operand stream: 512 / 256
    r.psum_width = 72 * chains;                                   // two INT18 pairs per chain crossing domains: 2304
    r.psum_ff = r.psum_width * 3 / 2;                             // capture+hold staging, calibrated 1.5x: 3456
    r.wgt_img_ff = 24 * mult;                                     // three staged operand bytes per slice: 3072
    return r;
}

ResourceReport report_snn(const CrossbarConfig& cfg) {
    SnnCrossbar probe(cfg);
    ResourceReport r;
    r.dsp_mult = static_cast<std::int64_t>(cfg.chains) * cfg.chain_len; // calibration: 64
    r.dsp_acc = 0;
    r.weight_reg_bits_clb = probe.modeled_clb_weight_bits();
    r.wgt_width = 8LL * cfg.weight_bits;  // one synapse word per chain per prefetch tick
    r.img_width = 2LL * cfg.chains * cfg.chain_len; // spike bits per tick
    r.psum_width = 48LL * cfg.chains;               // four 12-bit lanes per chain
    return r;
}

} // namespace dsp48sim
