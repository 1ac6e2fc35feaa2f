#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace driftwatch {

/// Portable 64-bit generator (splitmix64). The full update rule, so the
/// stream can be reproduced in any language from the seed alone:
///
///   state    <- state + 0x9E3779B97F4A7C15   (mod 2^64)
///   z        <- state
///   z        <- (z xor (z >> 30)) * 0xBF58476D1CE4E5B9
///   z        <- (z xor (z >> 27)) * 0x94D049BB133111EB
///   output   <- z xor (z >> 31)
///
/// Doubles are (output >> 11) * 2^-53, giving a uniform draw in [0, 1).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in (0, 1]; safe as a log() argument.
    double next_open_closed() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform index in [0, n). n must be positive.
    std::size_t next_index(std::size_t n) {
        auto i = static_cast<std::size_t>(next_double() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

    /// Gaussian draw via Box-Muller; consumes exactly two uniforms, no
    /// cached spare, so the call sequence alone determines the stream.
    double next_normal(double mean, double stddev) {
        constexpr double two_pi = 6.283185307179586;
        const double u1 = next_open_closed();
        const double u2 = next_double();
        return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    /// Categorical draw from probabilities summing to 1.
    std::size_t next_categorical(std::span<const double> probs) {
        const double u = next_double();
        double cum = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            cum += probs[i];
            if (u < cum) return i;
        }
        return probs.empty() ? 0 : probs.size() - 1;
    }

private:
    std::uint64_t state_;
};

/// Counter-based stream derivation: mixes (seed, index) into a fresh
/// generator so per-iteration results do not depend on loop scheduling.
inline SplitMix64 derive_rng(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 mixer(seed ^ (0xA0761D6478BD642FULL * (index + 1)));
    return SplitMix64(mixer.next_u64());
}

} // namespace driftwatch
