#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>

#include "kdif/math.hpp"

// Deterministic random streams. The library does not use <random>
// distributions because their output is not bit-stable across standard
// library implementations, and reproducibility of every artifact for a given
// seed is part of the contract. The generator is xoshiro256++ seeded through
// a splitmix64 expansion; substreams for (replicate, item, bootstrap draw)
// tuples are derived by hashing, so results never depend on scheduling order.

namespace kdif {

// splitmix64 finalizer; also serves as the hash combiner for stream
// derivation.
[[nodiscard]] inline std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) noexcept {
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x = mix64(x);
            word = x;
        }
        // All-zero state is invalid for xoshiro; mix64 of 0 is nonzero, so
        // this can only happen through astronomically unlucky seeding.
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) {
            state_[0] = 0x9E3779B97F4A7C15ULL;
        }
    }

    [[nodiscard]] std::uint64_t next_u64() noexcept {
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

    // Uniform on [0,1) with 53 random bits.
    [[nodiscard]] double uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal by inverse-CDF transform; the offset keeps the uniform
    // argument strictly inside (0,1).
    [[nodiscard]] double normal() {
        const double u = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
        return normal_quantile(u);
    }

    [[nodiscard]] double normal(double mean, double sd) { return mean + sd * normal(); }

    [[nodiscard]] bool bernoulli(double p) noexcept { return uniform() < p; }

    // Index drawn proportionally to the positive weights behind the
    // cumulative sums `cum` (cum.back() == total weight).
    [[nodiscard]] std::size_t discrete(std::span<const double> cum) {
        if (cum.empty()) throw std::invalid_argument("discrete: empty weight table");
        const double r = uniform() * cum.back();
        std::size_t lo = 0, hi = cum.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (cum[mid] <= r) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        return lo;
    }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

// Independent stream addressed by up to three coordinates (for example
// replicate, item, bootstrap index). Distinct tuples give unrelated streams;
// the same tuple always gives the same stream.
[[nodiscard]] inline Rng derive_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                       std::uint64_t c = 0) noexcept {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ mix64(a));
    h = mix64(h ^ mix64(b));
    h = mix64(h ^ mix64(c));
    return Rng(h);
}

}  // namespace kdif
