#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace smilecnn {

/// splitmix64 step (Steele, Lea & Flood 2014). Used to derive independent
/// sub-seeds from a master seed; the constants are the published ones.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Sub-seed for run/config number `ordinal` under `master`. Adding more
/// ordinals later never changes the seeds of earlier ones.
inline uint64_t derive_seed(uint64_t master, uint64_t ordinal) {
    return splitmix64(master + splitmix64(ordinal + 1));
}

/// Deterministic random source. The engine is std::mt19937_64, whose output
/// sequence is fixed by the C++ standard, so identical seeds give identical
/// streams on every platform. All mappings from raw 64-bit words to doubles
/// and bounded ints are done here by hand because the standard library
/// distributions are not portable across implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in the open interval (a, b).
    double uniform(double a, double b) {
        double u = next_double();
        while (u == 0.0) u = next_double();
        return a + (b - a) * u;
    }

    /// Uniform integer in [0, n). Rejection sampling keeps it unbiased.
    uint64_t below(uint64_t n) {
        const uint64_t threshold = (0 - n) % n;
        for (;;) {
            uint64_t x = engine_();
            if (x >= threshold) return x % n;
        }
    }

    /// Standard normal via Box-Muller. The second value of each pair is
    /// cached so consecutive calls consume the stream deterministically.
    double normal(double mean = 0.0, double stddev = 1.0) {
        if (has_spare_) {
            has_spare_ = false;
            return mean + stddev * spare_;
        }
        double u1 = next_double();
        while (u1 == 0.0) u1 = next_double();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return mean + stddev * r * std::cos(theta);
    }

    /// Fisher-Yates shuffle driven by below().
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace smilecnn
