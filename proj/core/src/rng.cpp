#include "wavesim/rng.hpp"

#include <cmath>

namespace wavesim {

// splitmix64 finalizer; bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t zigzag(std::int64_t k) {
    const std::uint64_t u = static_cast<std::uint64_t>(k);
    return (u << 1) ^ static_cast<std::uint64_t>(k >> 63);
}

double gaussian_draw(std::uint64_t seed, std::uint64_t replication,
                     std::uint32_t row, std::int64_t index) {
    // Stateless counter construction: hash the full key, then one
    // Box-Muller evaluation.  No generator state exists, so any draw can
    // be produced independently and in any order.
    std::uint64_t h = mix64(seed ^ 0xA0761D6478BD642Full);
    h = mix64(h ^ replication);
    h = mix64(h ^ row);
    h = mix64(h ^ zigzag(index));
    const std::uint64_t h2 = mix64(h ^ 0xD6E8FEB86659FD93ull);

    // u1 in (0,1] so the logarithm is finite; u2 in [0,1).
    const double u1 =
        (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(h2 >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace wavesim
