// toy.hpp
//
// Synthetic binary classification data. Two prototypes split the bit string
// in half (X0 = first half ones, X1 = second half ones, labels 0 and 1). Each
// instance receives floor(N) flips with N ~ U[0, R); every flip picks a digit
// uniformly with replacement, so two flips can cancel.
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eib/error.hpp"
#include "eib/prob.hpp"
#include "eib/rng.hpp"

namespace eib::toy {

struct ToyConfig {
    double r = 2.0;
    std::size_t m = 2000;
    std::uint64_t seed = 0;
    std::size_t n_bits = 10;

    void validate() const {
        if (!(r >= 0.0) || !std::isfinite(r)) fail(ErrorKind::InvalidConfig, "noise level r must be >= 0");
        if (m < 2 || m % 2 != 0) fail(ErrorKind::InvalidConfig, "m must be even and >= 2");
        if (n_bits < 2 || n_bits % 2 != 0 || n_bits > 64) fail(ErrorKind::InvalidConfig, "n_bits must be even, in [2, 64]");
    }
};

/// Instances are bit strings b0..b(n-1) packed with b0 as the most significant
/// bit, so the code is also the canonical integer order.
struct ToyDataset {
    std::size_t n_bits = 10;
    std::vector<std::uint64_t> instances;
    std::vector<std::size_t> labels;

    [[nodiscard]] std::size_t size() const noexcept { return instances.size(); }
};

inline std::uint64_t prototype(std::size_t label, std::size_t n_bits) {
    const std::size_t half = n_bits / 2;
    const std::uint64_t low = (half == 64 ? ~0ULL : ((1ULL << half) - 1));
    return label == 0 ? (low << half) : low;
}

inline bool bit(std::uint64_t code, std::size_t i, std::size_t n_bits) { return (code >> (n_bits - 1 - i)) & 1ULL; }

inline std::string bit_string(std::uint64_t code, std::size_t n_bits) {
    std::string s(n_bits, '0');
    for (std::size_t i = 0; i < n_bits; ++i) s[i] = bit(code, i, n_bits) ? '1' : '0';
    return s;
}

inline std::size_t hamming(std::uint64_t a, std::uint64_t b) { return static_cast<std::size_t>(std::popcount(a ^ b)); }

/// First m/2 examples are (X0, 0), the rest (X1, 1), each corrupted by its own flips.
inline ToyDataset generate(const ToyConfig& cfg) {
    cfg.validate();
    CounterRng rng(cfg.seed);
    ToyDataset d;
    d.n_bits = cfg.n_bits;
    d.instances.reserve(cfg.m);
    d.labels.reserve(cfg.m);
    for (std::size_t k = 0; k < cfg.m; ++k) {
        const std::size_t label = k < cfg.m / 2 ? 0 : 1;
        std::uint64_t code = prototype(label, cfg.n_bits);
        const auto flips = static_cast<std::size_t>(std::floor(cfg.r * rng.uniform()));
        for (std::size_t f = 0; f < flips; ++f) code ^= 1ULL << (cfg.n_bits - 1 - rng.below(cfg.n_bits));
        d.instances.push_back(code);
        d.labels.push_back(label);
    }
    return d;
}

/// Distinct observed instances in ascending integer order.
inline std::vector<std::uint64_t> alphabet(const ToyDataset& data) {
    std::vector<std::uint64_t> a = data.instances;
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

/// Empirical joint over `alpha` (defaults to the data's own alphabet).
/// Instances outside `alpha` are an error.
inline JointDistribution to_empirical_joint(const ToyDataset& data, const std::vector<std::uint64_t>& alpha) {
    if (data.size() == 0) fail(ErrorKind::DomainError, "empty dataset");
    std::map<std::uint64_t, std::size_t> index;
    for (std::size_t i = 0; i < alpha.size(); ++i) index.emplace(alpha[i], i);
    Matrix counts(alpha.size(), 2);
    for (std::size_t k = 0; k < data.size(); ++k) {
        const auto it = index.find(data.instances[k]);
        if (it == index.end()) fail(ErrorKind::UnknownInstance, "instance not in alphabet");
        counts(it->second, data.labels[k]) += 1.0;
    }
    for (double& v : counts.flat()) v /= static_cast<double>(data.size());
    std::vector<std::string> xl;
    for (auto c : alpha) xl.push_back(bit_string(c, data.n_bits));
    return JointDistribution(std::move(counts), std::move(xl), {"0", "1"});
}

inline JointDistribution to_empirical_joint(const ToyDataset& data) { return to_empirical_joint(data, alphabet(data)); }

/// Nearest prototype by Hamming distance, ties to label 0.
inline std::size_t nearest_prototype(std::uint64_t code, std::size_t n_bits) {
    return hamming(code, prototype(1, n_bits)) < hamming(code, prototype(0, n_bits)) ? 1 : 0;
}

using Predictor = std::function<std::optional<std::size_t>(std::uint64_t)>;
using Fallback = std::function<std::size_t(std::uint64_t)>;

/// Fraction of examples whose prediction matches the label; instances the
/// predictor declines (nullopt) go to `fallback`.
inline double accuracy(const ToyDataset& data, const Predictor& predict, const Fallback& fallback = {}) {
    if (data.size() == 0) return 0.0;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < data.size(); ++k) {
        const auto code = data.instances[k];
        std::optional<std::size_t> yhat = predict ? predict(code) : std::nullopt;
        const std::size_t y = yhat ? *yhat : (fallback ? fallback(code) : nearest_prototype(code, data.n_bits));
        hits += (y == data.labels[k]);
    }
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

inline double mean_hamming_to_prototype(const ToyDataset& data) {
    double s = 0.0;
    for (std::size_t k = 0; k < data.size(); ++k)
        s += static_cast<double>(hamming(data.instances[k], prototype(data.labels[k], data.n_bits)));
    return data.size() ? s / static_cast<double>(data.size()) : 0.0;
}

}  // namespace eib::toy
