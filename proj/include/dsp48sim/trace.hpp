// Named-signal waveform capture. Signals are declared once with a width;
// record() stores a value change only when the value differs from the
// previous tick, which maps directly onto VCD emission.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dsp48sim/bits.hpp"

namespace dsp48sim {

struct TraceEvent {
    std::int64_t tick;
    std::uint32_t signal;
    std::int64_t value;
};

class WaveformTrace {
public:
    // Hierarchical names use '/' separators, e.g. "ws/3_2/b2".
    std::uint32_t declare(const std::string& name, int width);

    void record(std::uint32_t signal, std::int64_t tick, std::int64_t value);

    bool empty() const { return events_.empty(); }
    std::size_t signal_count() const { return names_.size(); }
    const std::string& name(std::uint32_t signal) const { return names_[signal]; }
    int width(std::uint32_t signal) const { return widths_[signal]; }
    const std::vector<TraceEvent>& events() const { return events_; }

    std::uint32_t id(const std::string& name) const;

    // Value of a signal as of `tick` (last change at or before it), or 0.
    std::int64_t value_at(std::uint32_t signal, std::int64_t tick) const;

    // Ticks at which the signal changed value.
    std::vector<std::int64_t> change_ticks(std::uint32_t signal) const;

private:
    std::vector<std::string> names_;
    std::vector<int> widths_;
    std::vector<std::int64_t> last_value_;
    std::vector<bool> seen_;
    std::map<std::string, std::uint32_t> by_name_;
    std::vector<TraceEvent> events_; // ordered by tick (monotone recording enforced)
    std::int64_t max_tick_ = -1;
};

// Writes the trace as an IEEE 1364 value-change dump. Throws StimulusError on
// an empty trace and std::ios_base::failure-like IoError on write failure.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void export_vcd(const WaveformTrace& trace, const std::string& path);
std::string vcd_to_string(const WaveformTrace& trace);

} // namespace dsp48sim
