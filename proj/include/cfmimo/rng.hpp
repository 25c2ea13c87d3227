#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace cfmimo {

using cplx = std::complex<double>;
using Engine = std::mt19937_64;

/// Purposes of independent random streams derived from the master seed.
enum class Stream : std::uint64_t {
    Drop = 1,
    LineOfSight = 2,
    Fading = 3,
    PilotNoise = 4,
    Startup = 5,
};

namespace detail {
// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
} // namespace detail

/// Seed for the stream keyed by (seed, purpose, indices...). Equal keys give
/// equal streams, so two runs that differ only in scheme see identical
/// fading and noise.
inline std::uint64_t stream_seed(std::uint64_t seed, Stream purpose,
                                 std::initializer_list<std::uint64_t> indices = {}) {
    std::uint64_t h = detail::mix64(seed ^ detail::mix64(static_cast<std::uint64_t>(purpose)));
    for (auto i : indices)
        h = detail::mix64(h ^ (i + 0x632be59bd9b4e019ULL));
    return h;
}

inline Engine make_engine(std::uint64_t seed, Stream purpose, std::initializer_list<std::uint64_t> indices = {}) {
    return Engine(stream_seed(seed, purpose, indices));
}

/// Standard circularly-symmetric complex Gaussian CN(0, 1).
inline cplx complex_normal(Engine& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    constexpr double s = 0.70710678118654752440;
    const double re = n(rng);
    const double im = n(rng);
    return {s * re, s * im};
}

} // namespace cfmimo
