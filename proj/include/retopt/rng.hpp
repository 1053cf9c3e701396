#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace retopt {

// splitmix64 finalizer; used to derive independent stream seeds from a base seed.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return mix64(base ^ mix64(stream));
}

// Registry of stream tags hung off one run seed. Everything that consumes
// randomness draws from its own derived stream so adding draws in one place
// never shifts another.
namespace streams {
inline constexpr std::uint64_t network = 1;        // UE layout, demand, shadowing
inline constexpr std::uint64_t collect_episode = 2;
inline constexpr std::uint64_t collect_actions = 3;
inline constexpr std::uint64_t dqn_train_episode = 4;
inline constexpr std::uint64_t dqn_train = 5;      // init + exploration + replay picks
inline constexpr std::uint64_t eval_episode = 6;
inline constexpr std::uint64_t eval_actions = 7;
inline constexpr std::uint64_t spibb_train = 8;    // further mixed with (n, n_wedge)
inline constexpr std::uint64_t subsample = 9;      // further mixed with n
}  // namespace streams

// Deterministic RNG with hand-rolled transforms so that draws are stable
// across standard-library implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // [0, 1)
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller (cosine branch only).
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Uniform integer in [lo, hi], unbiased by rejection.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1ull;
        if (range == 0) return static_cast<std::int64_t>(gen_());  // full 64-bit span
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
        std::uint64_t x = gen_();
        while (x >= limit) x = gen_();
        return lo + static_cast<std::int64_t>(x % range);
    }

    std::uint64_t next_u64() { return gen_(); }

  private:
    std::mt19937_64 gen_;
};

}  // namespace retopt
