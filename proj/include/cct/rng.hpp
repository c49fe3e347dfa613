#pragma once

#include <cstdint>
#include <random>

namespace cct {

// 64-bit mixing finalizer (splitmix64). Used to derive independent seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic RNG: a seeded mt19937_64 engine plus the sampling
// primitives used across the project. All randomized procedures take an
// Rng& so a run is reproducible from a single base seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(mix64(seed)) {}

    // Derives a child seed for stream `idx`; children of distinct indices
    // (or distinct parents) are independent for all practical purposes.
    static std::uint64_t derive(std::uint64_t base, std::uint64_t idx) {
        return mix64(base + 0x9e3779b97f4a7c15ull * (idx + 1));
    }

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, n). Rejection sampling keeps it exactly uniform.
    std::uint64_t uniform_u64(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t rem = (~std::uint64_t{0} % n + 1) % n;  // 2^64 mod n
        const std::uint64_t bound = ~std::uint64_t{0} - rem;        // last acceptable value
        for (;;) {
            std::uint64_t v = eng_();
            if (v <= bound) return v % n;
        }
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + std::int64_t(uniform_u64(std::uint64_t(hi - lo + 1)));
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Poisson(lambda): Knuth's product method for small lambda, Hormann's
    // PTRD transformed-rejection method otherwise.
    std::int64_t poisson(double lambda);

private:
    std::int64_t poisson_knuth(double lambda);
    std::int64_t poisson_ptrd(double lambda);

    std::mt19937_64 eng_;
};

}  // namespace cct
