#pragma once

#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

namespace pinn {

// Counter-based generator: the i-th draw of stream s under seed k is
// splitmix64(k * C0 ^ s * C1 + i). No hidden state beyond the counter, so a
// (seed, stream) pair always reproduces the same sequence.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : key_(mix(seed * 0x9E3779B97F4A7C15ULL ^ (stream + 1) * 0xD1B54A32D192ED03ULL)) {}

    std::uint64_t next_u64() noexcept { return mix(key_ + counter_++ * 0x9E3779B97F4A7C15ULL); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    // Uniform integer on [0, n), rejection sampled to avoid modulo bias.
    std::uint64_t below(std::uint64_t n) noexcept {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t r = next_u64();
        while (r >= limit) r = next_u64();
        return r % n;
    }

    // Fisher-Yates shuffle of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        std::iota(p.begin(), p.end(), std::size_t{0});
        for (std::size_t i = n; i > 1; --i) {
            std::swap(p[i - 1], p[below(i)]);
        }
        return p;
    }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    static std::uint64_t mix(std::uint64_t z) noexcept {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Stream ids used across the project so independent draws never overlap.
namespace streams {
inline constexpr std::uint64_t kInterior = 1;
inline constexpr std::uint64_t kObservations = 2;
inline constexpr std::uint64_t kGlorot = 3;
inline constexpr std::uint64_t kMonteCarlo = 4;
} // namespace streams

} // namespace pinn
