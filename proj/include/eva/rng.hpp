#pragma once

#include <cstdint>

namespace eva {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit_double(std::uint64_t x) { return static_cast<double>(x >> 11) * 0x1.0p-53; }

/// Independent per-item seed derived from a batch seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed ^ splitmix64(index + 0x632BE59BD9B4E019ull));
}

} // namespace eva
