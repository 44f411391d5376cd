#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pcp {

/// Deterministic draws on top of std::mt19937_64. The standard pins that
/// generator's output exactly, and the transforms below avoid
/// std::*_distribution (whose streams vary across standard libraries), so a
/// seed reproduces bit-identical values on any conforming platform.
class Rng {
 public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; the paired draw is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    uint64_t next_u64() { return gen_(); }

 private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Stable per-trial seed derivation (splitmix64 of seed ^ index).
inline uint64_t derive_seed(uint64_t base, uint64_t index) {
    uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace pcp
