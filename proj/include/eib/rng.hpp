// rng.hpp
//
// Counter-based, splittable random source. Every stream is a (key, counter)
// pair; output i is the SplitMix64 finalizer applied to key + i * golden.
// Splitting hashes a stream id into a fresh key, so parallel workers can each
// own an independent stream derived from (base seed, index) without sharing
// state.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace eib {

inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic child seed for stream `stream` under `base`.
inline constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
    return mix64(mix64(base + 0x9e3779b97f4a7c15ULL) ^ (stream * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed) noexcept : key_(mix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        return mix64(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL);
    }

    [[nodiscard]] CounterRng split(std::uint64_t stream) const noexcept {
        return CounterRng(derive_seed(key_, stream));
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform index in [0, n).
    std::uint64_t below(std::uint64_t n) noexcept {
        // Lemire's multiply-shift; bias is < n / 2^64, irrelevant at our sizes.
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>((*this)()) * n) >> 64);
    }

    double standard_exponential() noexcept { return -std::log1p(-uniform()); }

    double standard_normal() noexcept {
        // Box-Muller; one value per call keeps the stream position simple.
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace eib
