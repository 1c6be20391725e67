#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bootlaw {

// std::uniform_real_distribution / std::normal_distribution are allowed to
// differ between standard libraries, which would break the "same seed, same
// dataset everywhere" promise.  mt19937_64 itself is fully specified, so we
// map its raw output ourselves.

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

/// Standard normal via Box-Muller.  Consumes exactly two raw draws.
inline double normal01(std::mt19937_64& rng) {
    const double u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    // 1 - u1 keeps the log argument in (0, 1], avoiding log(0).
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
}

} // namespace bootlaw
