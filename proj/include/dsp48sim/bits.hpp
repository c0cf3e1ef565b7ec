// Two's-complement helpers for fixed-width register values. All register
// contents are stored sign-extended in int64_t; wrapping is mod 2^width.
#pragma once

#include <cstdint>
#include <stdexcept>

namespace dsp48sim {

constexpr std::uint64_t bit_mask(int width) {
    return width >= 64 ? ~0ull : (1ull << width) - 1ull;
}

// Interprets the low `width` bits of `raw` as a signed two's-complement value.
constexpr std::int64_t sign_extend(std::uint64_t raw, int width) {
    const std::uint64_t m = bit_mask(width);
    raw &= m;
    const std::uint64_t sign = 1ull << (width - 1);
    return (raw & sign) ? static_cast<std::int64_t>(raw | ~m) : static_cast<std::int64_t>(raw);
}

// Wraps an arbitrary integer to a signed `width`-bit value.
constexpr std::int64_t wrap_signed(std::int64_t v, int width) {
    return sign_extend(static_cast<std::uint64_t>(v), width);
}

constexpr bool fits_signed(std::int64_t v, int width) {
    const std::int64_t lo = -(std::int64_t{1} << (width - 1));
    const std::int64_t hi = (std::int64_t{1} << (width - 1)) - 1;
    return v >= lo && v <= hi;
}

constexpr std::uint64_t to_bits(std::int64_t v, int width) {
    return static_cast<std::uint64_t>(v) & bit_mask(width);
}

// Error categories used across the simulator. The CLI maps these to exit codes.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StimulusError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ScheduleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace dsp48sim
