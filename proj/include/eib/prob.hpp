// prob.hpp
//
// Finite-alphabet probability kernels. Natural logarithms throughout, so all
// information quantities are in nats, with the convention 0 log 0 = 0.
//
// Probability containers validate on construction: entries below -1e-12 are
// rejected, tiny negatives are clamped to zero, and a total mass that misses
// 1 by more than 1e-12 but less than 1e-9 is renormalized. Anything further
// off is an error rather than silent drift.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "eib/error.hpp"
#include "eib/matrix.hpp"
#include "eib/rng.hpp"

namespace eib {

inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kRenormTolerance = 1e-9;
inline constexpr double kNegativeTolerance = 1e-12;

namespace detail {

inline double checked_mass(std::span<const double> p, const char* what) {
    double sum = 0.0;
    for (double v : p) {
        if (!(v >= -kNegativeTolerance)) fail(ErrorKind::NegativeEntry, std::string(what) + " has a negative or NaN entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > kRenormTolerance) {
        fail(ErrorKind::NotNormalized, std::string(what) + " sums to " + std::to_string(sum));
    }
    return sum;
}

/// Clamp tiny negatives and renormalize in place when within the renorm band.
inline void normalize_in_place(std::span<double> p, const char* what) {
    const double sum = checked_mass(p, what);
    for (double& v : p) v = std::max(v, 0.0);
    if (std::abs(sum - 1.0) > kNormTolerance) {
        const double s = std::accumulate(p.begin(), p.end(), 0.0);
        for (double& v : p) v /= s;
    }
}

inline std::vector<std::string> default_labels(std::size_t n) {
    std::vector<std::string> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::to_string(i);
    return out;
}

inline double xlogx(double v) noexcept { return v > 0.0 ? v * std::log(v) : 0.0; }

}  // namespace detail

/// Shannon entropy -sum p log p of a probability vector.
inline double entropy(std::span<const double> p) {
    detail::checked_mass(p, "distribution");
    double h = 0.0;
    for (double v : p) h -= detail::xlogx(v);
    const double upper = std::log(static_cast<double>(p.size()));
    return std::clamp(h, 0.0, upper);
}

/// KL divergence sum p log(p/q). Returns +infinity when p puts mass where q
/// has none; the solver consumes this inside exp(-.) where it yields 0.
inline double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) fail(ErrorKind::DimensionMismatch, "kl_divergence: length mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
        d += p[i] * std::log(p[i] / q[i]);
    }
    return std::max(d, 0.0);
}

/// phi(x) = x log(1/x) on (0, 1/e], 1/e above, 0 at 0. Continuous, concave,
/// non-decreasing; |a log a - b log b| <= phi(|a - b|) on [0,1].
inline double phi(double x) {
    if (!(x >= 0.0 && x <= 1.0)) fail(ErrorKind::DomainError, "phi: argument outside [0,1]");
    constexpr double inv_e = 0.36787944117144233;
    if (x == 0.0) return 0.0;
    if (x <= inv_e) return -x * std::log(x);
    return inv_e;
}

/// Finite joint distribution p(x, y) over instance x label alphabets.
class JointDistribution {
public:
    JointDistribution() = default;

    explicit JointDistribution(Matrix probs, std::vector<std::string> x_labels = {},
                               std::vector<std::string> y_labels = {})
        : probs_(std::move(probs)), x_labels_(std::move(x_labels)), y_labels_(std::move(y_labels)) {
        if (probs_.rows() == 0 || probs_.cols() == 0) {
            fail(ErrorKind::DimensionMismatch, "joint distribution needs |X| >= 1 and |Y| >= 1");
        }
        detail::normalize_in_place(probs_.flat(), "joint distribution");
        if (x_labels_.empty()) x_labels_ = detail::default_labels(probs_.rows());
        if (y_labels_.empty()) y_labels_ = detail::default_labels(probs_.cols());
        if (x_labels_.size() != probs_.rows() || y_labels_.size() != probs_.cols()) {
            fail(ErrorKind::DimensionMismatch, "label count does not match probability matrix");
        }
    }

    [[nodiscard]] std::size_t x_card() const noexcept { return probs_.rows(); }
    [[nodiscard]] std::size_t y_card() const noexcept { return probs_.cols(); }
    double operator()(std::size_t x, std::size_t y) const noexcept { return probs_(x, y); }
    [[nodiscard]] const Matrix& probs() const noexcept { return probs_; }
    [[nodiscard]] const std::vector<std::string>& x_labels() const noexcept { return x_labels_; }
    [[nodiscard]] const std::vector<std::string>& y_labels() const noexcept { return y_labels_; }

    [[nodiscard]] std::vector<double> marginal_x() const {
        std::vector<double> px(x_card(), 0.0);
        for (std::size_t x = 0; x < x_card(); ++x)
            for (double v : probs_.row(x)) px[x] += v;
        return px;
    }

    [[nodiscard]] std::vector<double> marginal_y() const {
        std::vector<double> py(y_card(), 0.0);
        for (std::size_t x = 0; x < x_card(); ++x)
            for (std::size_t y = 0; y < y_card(); ++y) py[y] += probs_(x, y);
        return py;
    }

    /// p(y|x) for every x; rows with p(x) = 0 are left all-zero.
    [[nodiscard]] Matrix label_given_instance() const {
        Matrix out(x_card(), y_card());
        for (std::size_t x = 0; x < x_card(); ++x) {
            double px = 0.0;
            for (double v : probs_.row(x)) px += v;
            if (px <= 0.0) continue;
            for (std::size_t y = 0; y < y_card(); ++y) out(x, y) = probs_(x, y) / px;
        }
        return out;
    }

private:
    Matrix probs_;
    std::vector<std::string> x_labels_;
    std::vector<std::string> y_labels_;
};

/// I(X;Y) = H(X) + H(Y) - H(X,Y) over the rows and columns of `joint`.
inline double mutual_information(const JointDistribution& joint) {
    const auto px = joint.marginal_x();
    const auto py = joint.marginal_y();
    const double mi = entropy(px) + entropy(py) - entropy(joint.probs().flat());
    if (mi < 0.0 && mi >= -1e-10) return 0.0;
    return mi;
}

/// Row-stochastic conditional p(t|x).
class Encoder {
public:
    Encoder() = default;

    explicit Encoder(Matrix probs) : probs_(std::move(probs)) {
        if (probs_.rows() == 0 || probs_.cols() == 0) {
            fail(ErrorKind::DimensionMismatch, "encoder needs |X| >= 1 and |T| >= 1");
        }
        for (std::size_t x = 0; x < probs_.rows(); ++x) detail::normalize_in_place(probs_.row(x), "encoder row");
    }

    /// Hard encoder sending instance x to cluster assignment[x].
    static Encoder deterministic(std::span<const std::size_t> assignment, std::size_t t_card) {
        Matrix m(assignment.size(), t_card);
        for (std::size_t x = 0; x < assignment.size(); ++x) {
            if (assignment[x] >= t_card) fail(ErrorKind::DimensionMismatch, "assignment outside T");
            m(x, assignment[x]) = 1.0;
        }
        return Encoder(std::move(m));
    }

    /// Encoder whose every row equals `row`.
    static Encoder constant(std::span<const double> row, std::size_t x_card) {
        Matrix m(x_card, row.size());
        for (std::size_t x = 0; x < x_card; ++x) std::copy(row.begin(), row.end(), m.row(x).begin());
        return Encoder(std::move(m));
    }

    [[nodiscard]] std::size_t x_card() const noexcept { return probs_.rows(); }
    [[nodiscard]] std::size_t t_card() const noexcept { return probs_.cols(); }
    double operator()(std::size_t x, std::size_t t) const noexcept { return probs_(x, t); }
    [[nodiscard]] std::span<const double> row(std::size_t x) const noexcept { return probs_.row(x); }
    [[nodiscard]] const Matrix& probs() const noexcept { return probs_; }

    bool operator==(const Encoder&) const = default;

private:
    Matrix probs_;
};

inline void require_compatible(const JointDistribution& joint, const Encoder& enc) {
    if (enc.x_card() != joint.x_card()) {
        fail(ErrorKind::DimensionMismatch, "encoder has " + std::to_string(enc.x_card()) +
                                               " rows but the joint has |X| = " + std::to_string(joint.x_card()));
    }
}

/// p(t) = sum_x p(x) p(t|x).
inline std::vector<double> induced_marginal(const JointDistribution& joint, const Encoder& enc) {
    require_compatible(joint, enc);
    const auto px = joint.marginal_x();
    std::vector<double> pt(enc.t_card(), 0.0);
    for (std::size_t x = 0; x < joint.x_card(); ++x)
        for (std::size_t t = 0; t < enc.t_card(); ++t) pt[t] += px[x] * enc(x, t);
    return pt;
}

/// p(t, y) = sum_x p(t|x) p(x, y), as a |T| x |Y| matrix.
inline Matrix induced_joint_ty(const JointDistribution& joint, const Encoder& enc) {
    require_compatible(joint, enc);
    Matrix pty(enc.t_card(), joint.y_card());
    for (std::size_t x = 0; x < joint.x_card(); ++x)
        for (std::size_t t = 0; t < enc.t_card(); ++t) {
            const double w = enc(x, t);
            if (w == 0.0) continue;
            for (std::size_t y = 0; y < joint.y_card(); ++y) pty(t, y) += w * joint(x, y);
        }
    return pty;
}

/// p(y|t). Clusters with p(t) = 0 are dead: their rows stay zero and are
/// flagged instead of raising.
struct Decoder {
    Matrix probs;
    std::vector<bool> dead;

    [[nodiscard]] std::size_t t_card() const noexcept { return probs.rows(); }
    [[nodiscard]] std::size_t y_card() const noexcept { return probs.cols(); }
    [[nodiscard]] bool is_dead(std::size_t t) const { return dead.at(t); }
    [[nodiscard]] std::size_t live_count() const {
        return static_cast<std::size_t>(std::count(dead.begin(), dead.end(), false));
    }
};

inline Decoder induced_decoder(const JointDistribution& joint, const Encoder& enc) {
    Matrix pty = induced_joint_ty(joint, enc);
    Decoder dec{Matrix(enc.t_card(), joint.y_card()), std::vector<bool>(enc.t_card(), false)};
    for (std::size_t t = 0; t < enc.t_card(); ++t) {
        double pt = 0.0;
        for (double v : pty.row(t)) pt += v;
        if (pt <= 0.0) {
            dec.dead[t] = true;
            continue;
        }
        for (std::size_t y = 0; y < joint.y_card(); ++y) dec.probs(t, y) = pty(t, y) / pt;
    }
    return dec;
}

/// Multinomial sample of size m from a joint: integer counts per cell.
struct EmpiricalDraw {
    std::vector<std::uint64_t> counts;  // row-major |X| x |Y|
    std::size_t x_card = 0;
    std::size_t y_card = 0;
    std::uint64_t m = 0;

    [[nodiscard]] std::uint64_t count(std::size_t x, std::size_t y) const { return counts.at(x * y_card + y); }

    /// The empirical joint p^(x, y) = counts / m, sharing the population labels.
    [[nodiscard]] JointDistribution joint(const JointDistribution& like) const {
        Matrix p(x_card, y_card);
        for (std::size_t i = 0; i < counts.size(); ++i) p.flat()[i] = static_cast<double>(counts[i]) / static_cast<double>(m);
        return JointDistribution(std::move(p), like.x_labels(), like.y_labels());
    }

    [[nodiscard]] JointDistribution joint() const {
        Matrix p(x_card, y_card);
        for (std::size_t i = 0; i < counts.size(); ++i) p.flat()[i] = static_cast<double>(counts[i]) / static_cast<double>(m);
        return JointDistribution(std::move(p));
    }

    static EmpiricalDraw from_counts(std::vector<std::uint64_t> counts, std::size_t x_card, std::size_t y_card) {
        if (counts.size() != x_card * y_card) fail(ErrorKind::DimensionMismatch, "count matrix size");
        const std::uint64_t m = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
        if (m == 0) fail(ErrorKind::DomainError, "empirical draw needs m >= 1");
        return EmpiricalDraw{std::move(counts), x_card, y_card, m};
    }
};

/// i.i.d. multinomial draw via sequential conditional binomials.
inline EmpiricalDraw sample_empirical(const JointDistribution& joint, std::uint64_t m, std::uint64_t seed) {
    if (m == 0) fail(ErrorKind::DomainError, "sample_empirical needs m >= 1");
    CounterRng rng(seed);
    const auto cells = joint.probs().flat();
    std::vector<std::uint64_t> counts(cells.size(), 0);
    std::size_t last = 0;
    for (std::size_t i = 0; i < cells.size(); ++i)
        if (cells[i] > 0.0) last = i;
    std::uint64_t remaining = m;
    double rest_mass = 1.0;
    for (std::size_t i = 0; i < cells.size() && remaining > 0; ++i) {
        if (cells[i] <= 0.0) continue;
        if (i == last || rest_mass <= cells[i]) {
            counts[i] = remaining;
            remaining = 0;
            break;
        }
        const double p = std::clamp(cells[i] / rest_mass, 0.0, 1.0);
        std::binomial_distribution<std::int64_t> binom(static_cast<std::int64_t>(remaining), p);
        const auto k = static_cast<std::uint64_t>(binom(rng));
        counts[i] = k;
        remaining -= k;
        rest_mass -= cells[i];
    }
    return EmpiricalDraw{std::move(counts), joint.x_card(), joint.y_card(), m};
}

}  // namespace eib
