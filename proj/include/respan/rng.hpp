#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace respan {

// splitmix64 finalizer (Steele/Lea/Flood). Used for seeding and seed derivation.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic standard-normal stream.
//
// Integer core: xoshiro256++ seeded via splitmix64, so the u64 sequence is
// bit-identical across platforms. Float conversion is fixed to
// (u64 >> 11) * 2^-53, and normals come from the Marsaglia polar method
// with the usual cached second variate. The double values therefore depend
// only on IEEE-754 arithmetic plus libm sqrt/log; stochastic tests assert
// distributional tolerances, not exact floats.
class SeededGaussian {
public:
    explicit SeededGaussian(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) w = splitmix64_next(s);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in [0, 1), 53 significant bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n), rejection on the high multiples.
    std::uint64_t uniform_below(std::uint64_t n) {
        const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    // N(0,1) via the polar method; rejection keeps the pair inside the unit disk.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        cached_ = v * m;
        has_cached_ = true;
        return u * m;
    }

    // Child stream for worker `index`: splitmix64 of (master XOR mixed index).
    static std::uint64_t derived_seed(std::uint64_t master, std::uint64_t index) {
        std::uint64_t s = index + 0x9E3779B97F4A7C15ULL;
        const std::uint64_t mixed = splitmix64_next(s);
        std::uint64_t t = master ^ mixed;
        return splitmix64_next(t);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
    double cached_ = 0.0;
    bool has_cached_ = false;
};

} // namespace respan
