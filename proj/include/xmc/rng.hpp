#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace xmc {

// Seeded random source. The engine is std::mt19937_64 (bit-exact by the
// standard); the distributions are implemented here because the std::
// distribution classes are not stable across library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t uniform_int(std::uint64_t n) {
        // Lemire multiply-shift with rejection; unbiased and reproducible.
        __uint128_t m = static_cast<__uint128_t>(engine_()) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                m = static_cast<__uint128_t>(engine_()) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    int index(std::size_t n) { return static_cast<int>(uniform_int(n)); }

    bool bernoulli(double p) { return uniform() < p; }

    // Standard normal via Box-Muller; one deviate per call, no state carried.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = uniform_int(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// Derives an independent stream seed from (seed, index); splitmix64 finalizer.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stage tags for derive_seed: standalone commands that derive their stream
// from (seed, tag) reproduce the matching full-pipeline stage exactly.
namespace seed_stream {
inline constexpr std::uint64_t split = 1;
inline constexpr std::uint64_t tune = 2;
inline constexpr std::uint64_t train = 3;
inline constexpr std::uint64_t cv = 4;
inline constexpr std::uint64_t explain = 5;
} // namespace seed_stream

} // namespace xmc
