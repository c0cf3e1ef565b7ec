// Cascade wiring for a column of slices. Slice i's acin/bcin/pcin come from
// slice i-1's acout/bcout/pcout as they stood before the current tick, so
// every cascade hop costs exactly one tick. Evaluation snapshots the previous
// outputs first, which also makes the per-slice updates independent; the
// parallel path exploits that and is bitwise identical to the serial one.
#pragma once

#include <cstddef>
#include <vector>

#include "dsp48sim/dsp48e2.hpp"

namespace dsp48sim {

class CascadeColumn {
public:
    CascadeColumn() = default;
    explicit CascadeColumn(std::vector<Dsp48e2Attrs> attrs);

    std::size_t size() const { return slices_.size(); }
    const Dsp48e2Slice& slice(std::size_t i) const { return slices_[i]; }

    // Steps every slice once. `ports[i]` supplies slice i's non-cascade
    // inputs; the cascade fields are overwritten from the stored neighbor
    // outputs. Position 0 keeps its caller-provided cascade inputs.
    void tick(std::vector<Dsp48e2Ports>& ports);

    void reset();

private:
    std::vector<Dsp48e2Slice> slices_;
    std::vector<Dsp48e2Outputs> prev_outputs_;
};

// Serial reference for the column update; the OpenMP kernel in tick() must
// match it bit for bit (checked by tests).
void step_slices_serial(std::vector<Dsp48e2Slice>& slices, const std::vector<Dsp48e2Ports>& ports);
void step_slices_parallel(std::vector<Dsp48e2Slice>& slices, const std::vector<Dsp48e2Ports>& ports);

} // namespace dsp48sim
