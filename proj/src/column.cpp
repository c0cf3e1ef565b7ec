#include "dsp48sim/column.hpp"

namespace dsp48sim {

CascadeColumn::CascadeColumn(std::vector<Dsp48e2Attrs> attrs) {
    for (std::size_t i = 0; i < attrs.size(); ++i) {
        const auto& a = attrs[i];
        if (i == 0 && (a.a_input_source == InputSource::Cascade || a.b_input_source == InputSource::Cascade)) {
            throw ConfigError("column position 0 cannot use cascade input sources");
        }
        slices_.emplace_back(a);
    }
    prev_outputs_.assign(slices_.size(), Dsp48e2Outputs{});
}

void CascadeColumn::tick(std::vector<Dsp48e2Ports>& ports) {
    if (ports.size() != slices_.size()) throw StimulusError("port vector size mismatch");
    for (std::size_t i = 1; i < slices_.size(); ++i) {
        ports[i].acin = prev_outputs_[i - 1].acout;
        ports[i].bcin = prev_outputs_[i - 1].bcout;
        ports[i].pcin = prev_outputs_[i - 1].pcout;
    }
    step_slices_parallel(slices_, ports);
    for (std::size_t i = 0; i < slices_.size(); ++i) prev_outputs_[i] = slices_[i].last_outputs();
}

void CascadeColumn::reset() {
    for (auto& s : slices_) s.reset();
    prev_outputs_.assign(slices_.size(), Dsp48e2Outputs{});
}

void step_slices_serial(std::vector<Dsp48e2Slice>& slices, const std::vector<Dsp48e2Ports>& ports) {
    for (std::size_t i = 0; i < slices.size(); ++i) slices[i].tick(ports[i]);
}

void step_slices_parallel(std::vector<Dsp48e2Slice>& slices, const std::vector<Dsp48e2Ports>& ports) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(slices.size());
    // Each slice touches only its own state, so the loop is a pure map. The
    // threshold keeps small arrays on one thread.
#pragma omp parallel for schedule(static) if (n >= 512)
    for (std::ptrdiff_t i = 0; i < n; ++i) slices[i].tick(ports[i]);
}

} // namespace dsp48sim
