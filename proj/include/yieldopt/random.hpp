#pragma once

#include <cstdint>

namespace yieldopt {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based stream: the draw for (seed, row, column) depends on nothing
/// else, so sample points can be produced in any order or in parallel.
constexpr std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t row, std::uint64_t column) {
    return mix64(mix64(mix64(seed) ^ row) ^ (column * 0xd6e8feb86659fd93ULL));
}

/// Uniform in [0, 1) with 53 random bits.
constexpr double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

constexpr double counter_uniform(std::uint64_t seed, std::uint64_t row, std::uint64_t column) {
    return to_unit(counter_bits(seed, row, column));
}

/// Derives an independent seed for a named sub-stream.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

/// Sequential SplitMix64 stream for algorithms that draw in a fixed order.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return to_unit(next()); }
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)); }

private:
    std::uint64_t state_;
};

}  // namespace yieldopt
