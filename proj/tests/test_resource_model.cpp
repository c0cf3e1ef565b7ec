#include <doctest.h>

#include "dsp48sim/resource_model.hpp"

using namespace dsp48sim;

TEST_CASE("ws report: 14x14 packed engine") {
    WsConfig c;
    c.rows = 14;
    c.cols = 14;
    c.packing_enabled = true;
    c.rounds_per_weight_set = 14;

    c.fetch_variant = FetchVariant::DspFetch;
    auto dsp = report_ws(c);
    CHECK(dsp.dsp_total() == 210);
    CHECK(dsp.weight_reg_bits_clb == 0);

    c.fetch_variant = FetchVariant::ClbFetch;
    auto clb = report_ws(c);
    CHECK(clb.dsp_total() == 210);
    CHECK(clb.weight_reg_bits_clb == 14 * 28 * 8);
    CHECK(clb.weight_reg_bits_clb == 3136);
}

TEST_CASE("ws report: 1x1 floor case") {
    WsConfig c;
    c.rows = 1;
    c.cols = 1;
    c.packing_enabled = false;
    c.rounds_per_weight_set = 1;
    auto r = report_ws(c);
    CHECK(r.dsp_total() == 2);
    CHECK(r.staging_ff_bits == 0);
}

TEST_CASE("os report reproduces the B1024 breakdown for both variants") {
    auto off = report_os(OsConfig::b1024(OsVariant::Official));
    CHECK(off.wgt_width == 512);
    CHECK(off.img_width == 512);
    CHECK(off.psum_width == 2304);
    CHECK(off.psum_ff == 3456);
    CHECK(off.wgt_img_ff == 3072);
    CHECK(off.dsp_mult == 128);
    CHECK(off.dsp_acc == 64);
    CHECK(off.clb_mux_elems == 128);
    CHECK(off.addtree_lut == 1152);
    CHECK(off.addtree_ff == 1216);
    CHECK(off.addtree_carry == 192);

    auto enh = report_os(OsConfig::b1024(OsVariant::Enhanced));
    CHECK(enh.wgt_width == 512);
    CHECK(enh.img_width == 256);
    CHECK(enh.psum_width == 2304);
    CHECK(enh.psum_ff == 3456);
    CHECK(enh.wgt_img_ff == 3072);
    CHECK(enh.dsp_mult == 128);
    CHECK(enh.dsp_acc == 32);
    CHECK(enh.clb_mux_elems == 0);
    CHECK(enh.addtree_lut == 0);
    CHECK(enh.addtree_ff == 0);
    CHECK(enh.addtree_carry == 0);
}

TEST_CASE("os report floor case: one slice, one ring pair") {
    OsConfig c;
    c.chain_len = 1;
    c.chains_per_group = 1;
    c.num_groups = 1;
    c.variant = OsVariant::Enhanced;
    c.packing_enabled = false;
    auto r = report_os(c);
    CHECK(r.dsp_mult == 1);
    CHECK(r.dsp_acc == 2);
    CHECK(r.clb_mux_elems == 0);
}

TEST_CASE("snn report matches the calibration geometry and the halving rule") {
    CrossbarConfig c; // 4 chains x 16
    auto dsp = report_snn(c);
    CHECK(dsp.dsp_mult == 64);
    c.fetch_variant = SnnFetch::ClbFetch;
    auto clb = report_snn(c);
    CHECK(clb.dsp_mult == 64);
    CHECK(dsp.weight_reg_bits_clb * 2 == clb.weight_reg_bits_clb);

    CrossbarConfig tiny;
    tiny.chains = 1;
    tiny.chain_len = 1;
    CHECK(report_snn(tiny).dsp_mult == 1);
}

TEST_CASE("reports agree with instantiated slice counts") {
    WsConfig wc;
    wc.rows = 5;
    wc.cols = 7;
    wc.packing_enabled = true;
    wc.rounds_per_weight_set = 5;
    CHECK(report_ws(wc).dsp_total() == WsEngine(wc).slice_count());

    for (auto v : {OsVariant::Official, OsVariant::Enhanced}) {
        auto oc = OsConfig::b1024(v);
        auto r = report_os(oc);
        OsEngine eng(oc);
        CHECK(r.dsp_mult == eng.mult_slice_count());
        CHECK(r.dsp_acc == eng.acc_slice_count());
    }

    CrossbarConfig cc;
    CHECK(report_snn(cc).dsp_mult == SnnCrossbar(cc).slice_count());
}

TEST_CASE("csv round formatting") {
    auto r = report_os(OsConfig::b1024(OsVariant::Enhanced));
    CHECK(ResourceReport::csv_header().substr(0, 8) == "dsp_mult");
    const auto row = r.to_csv_row();
    CHECK(row.substr(0, 4) == "128,");
    CHECK(r.to_json().find("\"dsp_acc\": 32") != std::string::npos);
}
