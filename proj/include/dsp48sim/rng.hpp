// Deterministic RNG for stimulus generation. splitmix64 keeps scenario
// reproducibility independent of the standard library's distribution
// implementations.
#pragma once

#include <cstdint>

namespace dsp48sim {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [lo, hi], inclusive.
    std::int64_t range(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next() % span);
    }

    std::int64_t int8() { return range(-128, 127); }
    bool coin() { return (next() & 1) != 0; }

private:
    std::uint64_t state_;
};

} // namespace dsp48sim
