// gauss.hpp
//
// Representation-discrepancy formulas for diagonal Gaussian representations
// and the closed-form regularizer of the variational EIB loss, each with a
// Monte-Carlo counterpart.
//
// l1_shared_cov evaluates the coordinate product
//
//     prod_i (4 Phi(|mu1_i - mu2_i| / (2 sigma_i)) - 2).
//
// At d = 1 this is exactly the L1 distance between the two densities. For
// d > 1 it is not: it vanishes as soon as one coordinate agrees and can
// exceed 2. l1_monte_carlo estimates the true L1 distance so the two can be
// compared.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eib/assignment.hpp"
#include "eib/error.hpp"
#include "eib/matrix.hpp"
#include "eib/rng.hpp"

namespace eib {

/// Diagonal-covariance Gaussian; `var` holds variances, not deviations.
struct DiagGaussian {
    std::vector<double> mean;
    std::vector<double> var;

    DiagGaussian() = default;
    DiagGaussian(std::vector<double> m, std::vector<double> v) : mean(std::move(m)), var(std::move(v)) { validate(); }

    void validate() const {
        if (mean.empty() || mean.size() != var.size()) {
            fail(ErrorKind::DimensionMismatch, "DiagGaussian needs equal-length non-empty mean and var");
        }
        for (double s2 : var)
            if (!(s2 > 0.0) || !std::isfinite(s2)) fail(ErrorKind::DomainError, "variances must be positive and finite");
    }

    [[nodiscard]] std::size_t dim() const noexcept { return mean.size(); }

    [[nodiscard]] double log_density(std::span<const double> t) const {
        double lp = 0.0;
        for (std::size_t i = 0; i < dim(); ++i) {
            const double z = t[i] - mean[i];
            lp -= 0.5 * (std::log(2.0 * std::numbers::pi * var[i]) + z * z / var[i]);
        }
        return lp;
    }

    bool operator==(const DiagGaussian&) const = default;
};

inline double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double l1_shared_cov(const DiagGaussian& g1, const DiagGaussian& g2) {
    if (g1.dim() != g2.dim()) fail(ErrorKind::DimensionMismatch, "l1_shared_cov: dimension mismatch");
    double prod = 1.0;
    for (std::size_t i = 0; i < g1.dim(); ++i) {
        if (std::abs(g1.var[i] - g2.var[i]) > 1e-12 * std::max(1.0, std::abs(g1.var[i]))) {
            fail(ErrorKind::CovarianceMismatch, "coordinate " + std::to_string(i) + " has different variances");
        }
        const double z = std::abs(g1.mean[i] - g2.mean[i]) / (2.0 * std::sqrt(g1.var[i]));
        // 4 Phi(z) - 2 == 2 erf(z / sqrt 2); erf keeps full relative accuracy near 0.
        prod *= 2.0 * std::erf(z / std::numbers::sqrt2);
    }
    return prod;
}

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

namespace detail {

/// Running mean and sample standard error.
class MeanAccumulator {
public:
    void add(double v) {
        ++n_;
        const double d = v - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (v - mean_);
    }
    [[nodiscard]] McEstimate result() const {
        const double var = n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
        return {mean_, std::sqrt(var / static_cast<double>(n_))};
    }

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

inline void sample_into(const DiagGaussian& g, CounterRng& rng, std::vector<double>& out) {
    out.resize(g.dim());
    for (std::size_t i = 0; i < g.dim(); ++i) out[i] = g.mean[i] + std::sqrt(g.var[i]) * rng.standard_normal();
}

}  // namespace detail

/// Importance-sampled ∫|p1 - p2| with the equal mixture (p1 + p2)/2 as proposal;
/// the weight |p1 - p2| / mixture equals 2 |tanh((log p1 - log p2) / 2)|.
inline McEstimate l1_monte_carlo(const DiagGaussian& g1, const DiagGaussian& g2, std::uint64_t n, std::uint64_t seed) {
    if (g1.dim() != g2.dim()) fail(ErrorKind::DimensionMismatch, "l1_monte_carlo: dimension mismatch");
    if (n < 1000) fail(ErrorKind::DomainError, "l1_monte_carlo needs n >= 1000");
    CounterRng rng(seed);
    detail::MeanAccumulator acc;
    std::vector<double> t;
    for (std::uint64_t k = 0; k < n; ++k) {
        detail::sample_into((rng() & 1U) ? g2 : g1, rng, t);
        acc.add(2.0 * std::abs(std::tanh(0.5 * (g1.log_density(t) - g2.log_density(t)))));
    }
    return acc.result();
}

struct PairingResult {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<double> l1;  // per pair
    double total_l1 = 0.0;
    double epsilon = 0.0;
};

inline constexpr std::size_t kAssignmentBudget = 512;

/// Exact minimum-total-L1 bijection between the two lists.
inline PairingResult optimal_pairing(const std::vector<DiagGaussian>& source, const std::vector<DiagGaussian>& target) {
    if (source.size() != target.size()) fail(ErrorKind::LengthMismatch, "pairing needs equal list lengths");
    if (source.size() > kAssignmentBudget) {
        fail(ErrorKind::AssignmentBudgetExceeded, "at most " + std::to_string(kAssignmentBudget) + " items");
    }
    const std::size_t n = source.size();
    Matrix cost(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) cost(i, j) = l1_shared_cov(source[i], target[j]);
    const Assignment a = solve_assignment(cost);
    PairingResult r;
    for (std::size_t i = 0; i < n; ++i) {
        r.pairs.emplace_back(i, a.col_of_row[i]);
        r.l1.push_back(cost(i, a.col_of_row[i]));
        r.total_l1 += r.l1.back();
    }
    return r;
}

/// epsilon = 2 sqrt(|T|) (2 + sqrt(2 log(1/delta))) / sqrt(m).
inline double prop1_epsilon(std::size_t m, double delta, std::size_t t_card) {
    if (!(delta > 0.0 && delta < 1.0)) fail(ErrorKind::DomainError, "delta must lie in (0,1)");
    if (m == 0 || t_card == 0) fail(ErrorKind::DomainError, "m and |T| must be positive");
    return 2.0 * std::sqrt(static_cast<double>(t_card)) * (2.0 + std::sqrt(2.0 * std::log(1.0 / delta))) /
           std::sqrt(static_cast<double>(m));
}

/// Pairing plus its slack; `t_card` is the caller's discretization cardinality.
inline PairingResult prop1_pairing(const std::vector<DiagGaussian>& source, const std::vector<DiagGaussian>& target,
                                   double delta, std::size_t t_card) {
    if (source.size() != target.size()) fail(ErrorKind::LengthMismatch, "prop1_bound needs equal list lengths");
    if (source.empty()) fail(ErrorKind::LengthMismatch, "prop1_bound needs at least one pair");
    PairingResult r = optimal_pairing(source, target);
    r.epsilon = prop1_epsilon(source.size(), delta, t_card);
    return r;
}

/// (1/m) sum over the optimal pairing of the pairwise L1 formula, plus epsilon.
inline double prop1_bound(const std::vector<DiagGaussian>& source, const std::vector<DiagGaussian>& target,
                          double delta, std::size_t t_card) {
    const PairingResult r = prop1_pairing(source, target, delta, t_card);
    return r.total_l1 / static_cast<double>(source.size()) + r.epsilon;
}

/// (1/n) sum_i mean over G_S,i x G_T,i of the pairwise L1 formula, plus epsilon.
inline double group_rd_bound(const std::vector<std::vector<DiagGaussian>>& source_groups,
                             const std::vector<std::vector<DiagGaussian>>& target_groups, double epsilon) {
    if (source_groups.size() != target_groups.size()) fail(ErrorKind::LengthMismatch, "group counts differ");
    if (source_groups.empty()) fail(ErrorKind::EmptyGroup, "no groups");
    double sum = 0.0;
    for (std::size_t i = 0; i < source_groups.size(); ++i) {
        const auto& gs = source_groups[i];
        const auto& gt = target_groups[i];
        if (gs.empty() || gt.empty()) fail(ErrorKind::EmptyGroup, "group " + std::to_string(i) + " is empty");
        double inner = 0.0;
        for (const auto& a : gs)
            for (const auto& b : gt) inner += l1_shared_cov(a, b);
        sum += inner / (static_cast<double>(gs.size()) * static_cast<double>(gt.size()));
    }
    return sum / static_cast<double>(source_groups.size()) + epsilon;
}

/// Closed form of ∫ p(t|x) log(p(t|x)^alpha / b(t|y)) dt for diagonal
/// Gaussians p_enc = N(mu1, s1^2), b_enc = N(mu2, s2^2):
///   sum_j (1-alpha)/2 ln 2pi - alpha ln s1 + ln s2 - alpha/2
///         + (mu1^2 + mu2^2 - 2 mu1 mu2 + s1^2) / (2 s2^2)
inline double eib_var_regularizer(const DiagGaussian& p_enc, const DiagGaussian& b_enc, double alpha) {
    if (p_enc.dim() != b_enc.dim()) fail(ErrorKind::DimensionMismatch, "regularizer: dimension mismatch");
    double sum = 0.0;
    for (std::size_t j = 0; j < p_enc.dim(); ++j) {
        const double mu1 = p_enc.mean[j], mu2 = b_enc.mean[j];
        const double s1 = std::sqrt(p_enc.var[j]), s2 = std::sqrt(b_enc.var[j]);
        sum += 0.5 * (1.0 - alpha) * std::log(2.0 * std::numbers::pi) - alpha * std::log(s1) + std::log(s2) -
               0.5 * alpha + (mu1 * mu1 + mu2 * mu2 - 2.0 * mu1 * mu2 + p_enc.var[j]) / (2.0 * b_enc.var[j]);
    }
    return sum;
}

/// Monte-Carlo estimate of the same integral, sampling t ~ p_enc.
inline McEstimate eib_var_regularizer_monte_carlo(const DiagGaussian& p_enc, const DiagGaussian& b_enc, double alpha,
                                                  std::uint64_t n, std::uint64_t seed) {
    if (p_enc.dim() != b_enc.dim()) fail(ErrorKind::DimensionMismatch, "regularizer: dimension mismatch");
    if (n < 2) fail(ErrorKind::DomainError, "need at least two samples");
    CounterRng rng(seed);
    detail::MeanAccumulator acc;
    std::vector<double> t;
    for (std::uint64_t k = 0; k < n; ++k) {
        detail::sample_into(p_enc, rng, t);
        acc.add(alpha * p_enc.log_density(t) - b_enc.log_density(t));
    }
    return acc.result();
}

struct VarLossItem {
    DiagGaussian p_enc;
    DiagGaussian b_enc;
    double ce_term = 0.0;
};

/// (1/m) sum_n [regularizer(n) + beta * ce_term(n)].
inline double var_loss(const std::vector<VarLossItem>& batch, double alpha, double beta) {
    if (batch.empty()) fail(ErrorKind::EmptyBatch, "var_loss needs a non-empty batch");
    double sum = 0.0;
    for (const auto& item : batch) sum += eib_var_regularizer(item.p_enc, item.b_enc, alpha) + beta * item.ce_term;
    return sum / static_cast<double>(batch.size());
}

}  // namespace eib
