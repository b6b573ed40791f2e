// Seeded random streams. Every stochastic routine in the library derives its
// engine from an explicit seed plus stream indices, so results are fully
// reproducible and independent of scheduling.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace matchup {

// splitmix64 finalizer; good avalanche, cheap.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    return mix64(mix64(a) ^ (0x9e3779b97f4a7c15ULL + b));
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix64(mix64(a, b), c);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                           std::uint64_t d) {
    return mix64(mix64(a, b, c), d);
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed) { return Engine(mix64(seed)); }
inline Engine make_engine(std::uint64_t seed, std::uint64_t s1) {
    return Engine(mix64(seed, s1));
}
inline Engine make_engine(std::uint64_t seed, std::uint64_t s1, std::uint64_t s2) {
    return Engine(mix64(seed, s1, s2));
}
inline Engine make_engine(std::uint64_t seed, std::uint64_t s1, std::uint64_t s2,
                          std::uint64_t s3) {
    return Engine(mix64(seed, s1, s2, s3));
}

// Uniform in (0,1). Hand-rolled instead of std::uniform_real_distribution so
// the draw count per call is fixed and the bit stream is stable.
inline double rnd_uniform(Engine& eng) {
    // 53 random bits; +0.5 keeps the value strictly inside (0,1).
    return (static_cast<double>(eng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

// Standard normal via Box-Muller, no cached spare: exactly two draws per call.
inline double rnd_norm(Engine& eng) {
    double u1 = rnd_uniform(eng);
    double u2 = rnd_uniform(eng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// Integer in [0, n).
inline int rnd_below(Engine& eng, int n) {
    return static_cast<int>(eng() % static_cast<std::uint64_t>(n));
}

// Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 handled by boosting.
inline double rnd_gamma(Engine& eng, double shape) {
    if (shape < 1.0) {
        double u = rnd_uniform(eng);
        return rnd_gamma(eng, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = rnd_norm(eng);
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        double u = rnd_uniform(eng);
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
}

inline double rnd_beta(Engine& eng, double a, double b) {
    double x = rnd_gamma(eng, a);
    double y = rnd_gamma(eng, b);
    return x / (x + y);
}

}  // namespace matchup
