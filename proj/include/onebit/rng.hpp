#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace onebit {

// SplitMix64 finalizer (Steele/Lea/Flood; Vigna's fixed-increment variant).
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// A splittable pseudo-random stream. Streams are derived, never shared:
// every (experiment, n-index, mu-index, trial) cell hashes its coordinates
// into an independent state, so results do not depend on scheduling.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += kGolden;
        return mix64(state_);
    }

    // Uniform on the open interval (0,1); never returns an endpoint, so it
    // is safe to push through a quantile function.
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Marsaglia's polar method.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * next_unit() - 1.0;
            v = 2.0 * next_unit() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double r = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * r;
        have_spare_ = true;
        return u * r;
    }

    // Gamma(shape, 1) via Marsaglia-Tsang, with the usual boost for shape < 1.
    double next_gamma(double shape) {
        if (shape < 1.0) {
            const double g = next_gamma(shape + 1.0);
            return g * std::pow(next_unit(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = next_normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = next_unit();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Derives an independent stream from a master seed and a path of coordinates.
// Hash-chaining each component keeps derivation order-sensitive, so
// (a,b) and (b,a) give unrelated streams.
inline RngStream derive_stream(std::uint64_t master_seed,
                               std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix64(master_seed + kGolden);
    for (std::uint64_t c : path) {
        h = mix64(h + kGolden);
        h = mix64(h ^ c);
    }
    return RngStream(h);
}

}  // namespace onebit
