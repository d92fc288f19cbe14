#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace kploc {

/// Mixes a stream of values into a single 64-bit seed (splitmix64 finalizer).
/// Used to derive independent per-index substreams so that parallel order
/// never changes results.
inline std::uint64_t derive_seed(std::uint64_t seed) { return seed; }

template <typename... Rest>
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t first, Rest... rest) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL + first;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return derive_seed(z, static_cast<std::uint64_t>(rest)...);
}

/// Seeded random source with explicit distribution transforms. The raw
/// mt19937_64 stream is fully specified by the standard and the transforms
/// below avoid the implementation-defined std::*_distribution classes, so
/// identical seeds give identical draws on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform index in [0, n). n must be positive.
    std::size_t uniform_index(std::size_t n) {
        // Rejection sampling over the smallest covering power of two.
        std::uint64_t mask = n - 1;
        mask |= mask >> 1;
        mask |= mask >> 2;
        mask |= mask >> 4;
        mask |= mask >> 8;
        mask |= mask >> 16;
        mask |= mask >> 32;
        for (;;) {
            const std::uint64_t v = engine_() & mask;
            if (v < n) return static_cast<std::size_t>(v);
        }
    }

    /// Standard normal via the Marsaglia polar method (no trig).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    /// Gamma(shape, 1) via Marsaglia-Tsang squeeze; shape must be positive.
    double gamma(double shape) {
        if (shape < 1.0) {
            // Boost to shape+1 and scale back.
            const double g = gamma(shape + 1.0);
            return g * std::pow(uniform_nonzero(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_nonzero();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    /// Beta(alpha, beta) sample in (0,1). Degenerate conventions:
    /// beta == 0 yields exactly 1, alpha == 0 yields exactly 0.
    double beta(double alpha, double beta) {
        if (beta == 0.0) return 1.0;
        if (alpha == 0.0) return 0.0;
        const double a = gamma(alpha);
        const double b = gamma(beta);
        return a / (a + b);
    }

private:
    double uniform_nonzero() {
        double u;
        do {
            u = uniform01();
        } while (u == 0.0);
        return u;
    }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace kploc
