#include "dsp48sim/trace.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace dsp48sim {

std::uint32_t WaveformTrace::declare(const std::string& name, int width) {
    if (auto it = by_name_.find(name); it != by_name_.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(names_.size());
    names_.push_back(name);
    widths_.push_back(width);
    last_value_.push_back(0);
    seen_.push_back(false);
    by_name_.emplace(name, id);
    return id;
}

void WaveformTrace::record(std::uint32_t signal, std::int64_t tick, std::int64_t value) {
    if (tick < max_tick_) throw StimulusError("trace records must be tick-ordered");
    max_tick_ = std::max(max_tick_, tick);
    if (seen_[signal] && last_value_[signal] == value) return;
    seen_[signal] = true;
    last_value_[signal] = value;
    events_.push_back(TraceEvent{tick, signal, value});
}

std::uint32_t WaveformTrace::id(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw StimulusError("unknown trace signal: " + name);
    return it->second;
}

std::int64_t WaveformTrace::value_at(std::uint32_t signal, std::int64_t tick) const {
    std::int64_t v = 0;
    for (const auto& e : events_) {
        if (e.tick > tick) break;
        if (e.signal == signal) v = e.value;
    }
    return v;
}

std::vector<std::int64_t> WaveformTrace::change_ticks(std::uint32_t signal) const {
    std::vector<std::int64_t> ticks;
    for (const auto& e : events_) {
        if (e.signal == signal) ticks.push_back(e.tick);
    }
    return ticks;
}

namespace {

// VCD identifier from the printable ASCII range, shortest-first.
std::string vcd_id(std::uint32_t n) {
    std::string s;
    do {
        s.push_back(static_cast<char>('!' + n % 94));
        n /= 94;
    } while (n != 0);
    return s;
}

void emit_value(std::ostream& os, std::int64_t value, int width, const std::string& id) {
    if (width == 1) {
        os << (value & 1) << id << '\n';
        return;
    }
    os << 'b';
    for (int bit = width - 1; bit >= 0; --bit) os << ((value >> bit) & 1);
    os << ' ' << id << '\n';
}

} // namespace

std::string vcd_to_string(const WaveformTrace& trace) {
    if (trace.empty()) throw StimulusError("refusing to export an empty trace");

    std::ostringstream os;
    os << "$date\n    (deterministic)\n$end\n";
    os << "$version\n    dsp48sim vcd writer\n$end\n";
    os << "$timescale 1ns $end\n";

    // One scope level per '/' component.
    std::vector<std::string> open_scope;
    for (std::uint32_t s = 0; s < trace.signal_count(); ++s) {
        const std::string& full = trace.name(s);
        std::vector<std::string> parts;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= full.size(); ++i) {
            if (i == full.size() || full[i] == '/') {
                parts.push_back(full.substr(start, i - start));
                start = i + 1;
            }
        }
        const std::string leaf = parts.back();
        parts.pop_back();
        std::size_t common = 0;
        while (common < open_scope.size() && common < parts.size() && open_scope[common] == parts[common]) ++common;
        while (open_scope.size() > common) {
            os << "$upscope $end\n";
            open_scope.pop_back();
        }
        while (open_scope.size() < parts.size()) {
            os << "$scope module " << parts[open_scope.size()] << " $end\n";
            open_scope.push_back(parts[open_scope.size()]);
        }
        os << "$var wire " << trace.width(s) << ' ' << vcd_id(s) << ' ' << leaf << " $end\n";
    }
    while (!open_scope.empty()) {
        os << "$upscope $end\n";
        open_scope.pop_back();
    }
    os << "$enddefinitions $end\n";

    std::int64_t current_tick = -1;
    bool in_dumpvars = false;
    for (const auto& e : trace.events()) {
        if (e.tick != current_tick) {
            if (in_dumpvars) {
                os << "$end\n";
                in_dumpvars = false;
            }
            if (current_tick == -1 && e.tick == 0) {
                os << "#0\n$dumpvars\n";
                in_dumpvars = true;
            } else {
                os << '#' << e.tick << '\n';
            }
            current_tick = e.tick;
        }
        emit_value(os, e.value, trace.width(e.signal), vcd_id(e.signal));
    }
    if (in_dumpvars) os << "$end\n";
    return os.str();
}

void export_vcd(const WaveformTrace& trace, const std::string& path) {
    const std::string text = vcd_to_string(trace);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

} // namespace dsp48sim
