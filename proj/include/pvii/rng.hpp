#pragma once

// Self-contained random number generation: xoshiro256++ seeded through
// splitmix64, plus the variate transforms the sampler needs. Everything is
// written out explicitly (no std::*_distribution) so that a given seed
// produces the same stream on every platform and compiler.

#include <cmath>
#include <cstdint>

namespace pvii {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace detail

class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = detail::splitmix64(sm);
    }

    // Counter-based stream derivation: the stream for (master, k1, k2) is a
    // pure function of its arguments, so replicate k of an experiment gets
    // the same draws no matter which worker runs it.
    static Rng stream(std::uint64_t master, std::uint64_t k1, std::uint64_t k2 = 0) {
        std::uint64_t h = master;
        h ^= detail::splitmix64(h) + 0x9E3779B97F4A7C15ull * (k1 + 1);
        h ^= detail::splitmix64(h) + 0xD1B54A32D192ED03ull * (k2 + 1);
        return Rng(detail::splitmix64(h));
    }

    std::uint64_t next() {
        const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1).
    double uniform_pos() {
        double u;
        do {
            u = uniform01();
        } while (u == 0.0);
        return u;
    }

    // Standard normal via the Marsaglia polar method; the spare deviate is
    // cached so consecutive calls consume the stream in pairs.
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
        const double factor = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * factor;
        have_spare_ = true;
        return u * factor;
    }

    // Gamma(shape, 1) by Marsaglia-Tsang, with the standard power boost for
    // shape < 1.
    double gamma(double shape) {
        if (shape < 1.0) {
            const double u = uniform_pos();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / (3.0 * std::sqrt(d));
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_pos();
            const double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
            if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }

  private:
    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace pvii
