#pragma once

// Portable randomness. The engine is std::mt19937_64, whose output sequence is
// fixed by the C++ standard; the distributions below are defined here instead
// of using <random> distributions, whose algorithms vary between standard
// libraries.

#include <cstdint>
#include <random>
#include <span>

namespace capsim {

using Rng = std::mt19937_64;

/// SplitMix64 finaliser, used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Uniform in [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(Rng &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n). One engine draw.
std::uint64_t uniform_index(Rng &rng, std::uint64_t n);

/// Index i with probability weights[i] / sum(weights). One engine draw.
/// Zero-weight entries are never returned. Requires a positive total.
std::size_t categorical(Rng &rng, std::span<const double> weights);

/// Stream seeds derived from a run seed.
inline std::uint64_t population_stream(std::uint64_t seed) { return seed; }
inline std::uint64_t dynamics_stream(std::uint64_t seed) { return splitmix64(seed); }
inline std::uint64_t schedule_stream(std::uint64_t seed) { return splitmix64(splitmix64(seed)); }

} // namespace capsim
