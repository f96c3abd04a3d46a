// bounds.hpp
//
// Source generalization bounds for |I(Y;T) - I^(Y;T)| and the target error
// decomposition
//
//     eps_T(h) <= eps^_S(h) + delta_S(h) + d_HdH(p(t), q(t)) + lambda.
//
// Both bounds are built on the plug-in factor
//
//     D = (2 + sqrt(2 log((|Y| + 2) / delta))) / sqrt(m),
//
// the L2 deviation of |Y| + 2 empirical distributions holding simultaneously
// with probability 1 - delta.
//
// Entropy bound ("ours"): with C = D / sqrt(min_x p(x)) and
// C' = D / sqrt(min_{x,y} p(x|y)),
//
//     C1 = -sqrt(m) C log C              C2 = sqrt(m) C / sqrt(min_t p(t))
//     C3 = -sqrt(m) C' log C'            C4 = sqrt(m) C' / sqrt(min_{t,y} p(t|y))
//     C5 = sqrt(m) D / sqrt(min_y p^(y))
//
//     total = ((C1 + C3) sqrt(|T| - 1) + C2 H(T) + C4 H(T|Y)
//              + C5 sqrt((log|T| - H^(T|Y)) H^(T|Y))) / sqrt(m)
//
// valid when C <= 1, C sqrt(p(t)(1 - p(t))) <= 1/e, C' <= 1 and
// C' sqrt(p(t|y)(1 - p(t|y))) <= 1/e for every t, y.
//
// Mutual-information bound ("previous"): its constants are not available in
// closed form, so it is instantiated from its order expression with |X| and
// |Y| replaced by 1/min_x p(x) and 1/min_y p(y). With q = 2 sqrt(2 log 2 D X),
//
//     total = -2 q log q sqrt(|T|) sqrt(I(X;T)) + 2 q |T|^{3/4} I(X;T)^{1/4}
//             + 2 D Y I^(X;T)
//
// valid when 0 < q < 1 and q p(t) sqrt(KL[p(x|t) || p(x)]) < 1/e for every t.
//
// All minima run over nonzero entries only.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "eib/error.hpp"
#include "eib/parallel.hpp"
#include "eib/prob.hpp"
#include "eib/rng.hpp"

namespace eib {

inline constexpr double kInvE = 0.36787944117144233;
inline constexpr std::uint64_t kEnumerationBudget = 10'000'000;
inline constexpr double kInfoNoiseFloor = 1e-14;

struct BoundInputs {
    JointDistribution joint;
    EmpiricalDraw empirical;
    Encoder encoder;
    double delta = 0.1;

    [[nodiscard]] std::uint64_t m() const noexcept { return empirical.m; }

    void validate() const {
        if (!(delta > 0.0 && delta < 1.0)) fail(ErrorKind::DomainError, "delta must lie in (0,1)");
        if (empirical.x_card != joint.x_card() || empirical.y_card != joint.y_card()) {
            fail(ErrorKind::DimensionMismatch, "empirical draw does not match the joint's alphabets");
        }
        if (empirical.m == 0) fail(ErrorKind::DomainError, "empirical draw needs m >= 1");
        require_compatible(joint, encoder);
    }
};

/// Lemma-A2 style plug-in factor with the (|Y| + 2) / delta union.
inline double plugin_deviation(std::uint64_t m, std::size_t y_card, double delta) {
    return (2.0 + std::sqrt(2.0 * std::log((static_cast<double>(y_card) + 2.0) / delta))) /
           std::sqrt(static_cast<double>(m));
}

namespace detail {

inline double min_nonzero(std::span<const double> v) {
    double best = std::numeric_limits<double>::infinity();
    for (double x : v)
        if (x > 0.0) best = std::min(best, x);
    return best;
}

/// H(T|Y) = sum_y p(y) H(p(t|y)) from a |T| x |Y| joint.
inline double conditional_entropy_t_given_y(const Matrix& pty) {
    double h = 0.0;
    for (std::size_t y = 0; y < pty.cols(); ++y) {
        double py = 0.0;
        for (std::size_t t = 0; t < pty.rows(); ++t) py += pty(t, y);
        if (py <= 0.0) continue;
        for (std::size_t t = 0; t < pty.rows(); ++t) h -= detail::xlogx(pty(t, y) / py) * py;
    }
    return std::max(h, 0.0);
}

inline double mi_of(const Matrix& m) {
    std::vector<double> r(m.rows(), 0.0), c(m.cols(), 0.0);
    double hj = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) {
            r[i] += m(i, j);
            c[j] += m(i, j);
            hj -= xlogx(m(i, j));
        }
    double hr = 0.0, hc = 0.0;
    for (double v : r) hr -= xlogx(v);
    for (double v : c) hc -= xlogx(v);
    // The fourth-root term of the previous bound turns rounding residue into
    // visible mass, so residue below the noise floor is reported as zero.
    const double mi = hr + hc - hj;
    return mi < kInfoNoiseFloor ? 0.0 : mi;
}

/// p(x, t) = p(x) p(t|x).
inline Matrix joint_xt(const JointDistribution& joint, const Encoder& enc) {
    const auto px = joint.marginal_x();
    Matrix out(enc.x_card(), enc.t_card());
    for (std::size_t x = 0; x < enc.x_card(); ++x)
        for (std::size_t t = 0; t < enc.t_card(); ++t) out(x, t) = px[x] * enc(x, t);
    return out;
}

}  // namespace detail

/// I(Y;T) of the encoder pushed through a joint.
inline double information_yt(const JointDistribution& joint, const Encoder& enc) {
    return detail::mi_of(induced_joint_ty(joint, enc));
}

inline double information_xt(const JointDistribution& joint, const Encoder& enc) {
    require_compatible(joint, enc);
    return detail::mi_of(detail::joint_xt(joint, enc));
}

/// |I(Y;T) - I^(Y;T)| for a fixed encoder on the population and the draw.
inline double generalization_gap(const BoundInputs& in) {
    in.validate();
    const JointDistribution emp = in.empirical.joint(in.joint);
    return std::abs(information_yt(in.joint, in.encoder) - information_yt(emp, in.encoder));
}

struct MinProbs {
    double px = 0.0;          // min_x p(x)
    double pt = 0.0;          // min_t p(t)
    double px_given_y = 0.0;  // min_{x,y} p(x|y)
    double pt_given_y = 0.0;  // min_{t,y} p(t|y)
    double emp_py = 0.0;      // min_y p^(y)
};

struct OurBoundReport {
    double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0, c5 = 0.0;
    double term_tcard = 0.0, term_ht = 0.0, term_htgy = 0.0, term_hat = 0.0;
    double total = 0.0;
    bool a37 = false, a38 = false, a39 = false, a40 = false;
    MinProbs min_probs;
    double h_t = 0.0, h_t_given_y = 0.0, emp_h_t_given_y = 0.0;

    [[nodiscard]] bool constraints_ok() const noexcept { return a37 && a38 && a39 && a40; }
};

inline OurBoundReport our_bound(const BoundInputs& in) {
    in.validate();
    const JointDistribution& joint = in.joint;
    const std::size_t tc = in.encoder.t_card();
    const double m = static_cast<double>(in.m());
    const double sqrt_m = std::sqrt(m);
    const double dev = plugin_deviation(in.m(), joint.y_card(), in.delta);

    const auto px = joint.marginal_x();
    const auto py = joint.marginal_y();
    for (std::size_t y = 0; y < py.size(); ++y) {
        if (py[y] <= 0.0) fail(ErrorKind::DegenerateDistribution, "p(x|y) has empty support for label " + std::to_string(y));
    }
    const auto pt = induced_marginal(joint, in.encoder);
    const Matrix pty = induced_joint_ty(joint, in.encoder);

    OurBoundReport r;
    r.min_probs.px = detail::min_nonzero(px);
    r.min_probs.pt = detail::min_nonzero(pt);
    double mxy = std::numeric_limits<double>::infinity();
    double mty = std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < joint.y_card(); ++y) {
        for (std::size_t x = 0; x < joint.x_card(); ++x)
            if (joint(x, y) > 0.0) mxy = std::min(mxy, joint(x, y) / py[y]);
        for (std::size_t t = 0; t < tc; ++t)
            if (pty(t, y) > 0.0) mty = std::min(mty, pty(t, y) / py[y]);
    }
    r.min_probs.px_given_y = mxy;
    r.min_probs.pt_given_y = mty;

    const JointDistribution emp = in.empirical.joint(joint);
    r.min_probs.emp_py = detail::min_nonzero(emp.marginal_y());
    const Matrix emp_pty = induced_joint_ty(emp, in.encoder);

    r.h_t = entropy(pt);
    r.h_t_given_y = detail::conditional_entropy_t_given_y(pty);
    r.emp_h_t_given_y = detail::conditional_entropy_t_given_y(emp_pty);

    const double c_x = dev / std::sqrt(r.min_probs.px);
    const double c_xy = dev / std::sqrt(r.min_probs.px_given_y);
    r.c1 = -sqrt_m * c_x * std::log(c_x);
    r.c2 = sqrt_m * c_x / std::sqrt(r.min_probs.pt);
    r.c3 = -sqrt_m * c_xy * std::log(c_xy);
    r.c4 = sqrt_m * c_xy / std::sqrt(r.min_probs.pt_given_y);
    r.c5 = sqrt_m * dev / std::sqrt(r.min_probs.emp_py);

    const double log_t = std::log(static_cast<double>(tc));
    const double spread = std::max((log_t - r.emp_h_t_given_y) * r.emp_h_t_given_y, 0.0);
    r.term_tcard = (r.c1 + r.c3) * std::sqrt(static_cast<double>(tc - 1)) / sqrt_m;
    r.term_ht = r.c2 * r.h_t / sqrt_m;
    r.term_htgy = r.c4 * r.h_t_given_y / sqrt_m;
    r.term_hat = r.c5 * std::sqrt(spread) / sqrt_m;
    r.total = r.term_tcard + r.term_ht + r.term_htgy + r.term_hat;

    r.a37 = c_x > 0.0 && c_x <= 1.0;
    r.a38 = std::all_of(pt.begin(), pt.end(), [&](double p) { return c_x * std::sqrt((1.0 - p) * p) <= kInvE; });
    r.a39 = c_xy > 0.0 && c_xy <= 1.0;
    r.a40 = true;
    for (std::size_t y = 0; y < joint.y_card(); ++y)
        for (std::size_t t = 0; t < tc; ++t) {
            const double p = pty(t, y) / py[y];
            if (c_xy * std::sqrt(p * (1.0 - p)) > kInvE) r.a40 = false;
        }
    return r;
}

struct PrevBoundReport {
    double d_const = 0.0;
    double scale = 0.0;  // q = 2 sqrt(2 log 2 D / min_x p(x))
    double term1 = 0.0, term2 = 0.0, term3 = 0.0;
    double total = 0.0;
    bool a41 = false, a42 = false;
    double i_xt = 0.0, emp_i_xt = 0.0;

    [[nodiscard]] bool constraints_ok() const noexcept { return a41 && a42; }
};

inline PrevBoundReport previous_bound(const BoundInputs& in) {
    in.validate();
    const JointDistribution& joint = in.joint;
    const std::size_t tc = in.encoder.t_card();
    const auto px = joint.marginal_x();
    const auto py = joint.marginal_y();
    for (std::size_t y = 0; y < py.size(); ++y) {
        if (py[y] <= 0.0) fail(ErrorKind::DegenerateDistribution, "p(x|y) has empty support for label " + std::to_string(y));
    }
    PrevBoundReport r;
    r.d_const = plugin_deviation(in.m(), joint.y_card(), in.delta);
    const double x_eff = 1.0 / detail::min_nonzero(px);
    const double y_eff = 1.0 / detail::min_nonzero(py);
    r.scale = 2.0 * std::sqrt(2.0 * std::log(2.0) * r.d_const * x_eff);
    r.i_xt = information_xt(joint, in.encoder);
    r.emp_i_xt = information_xt(in.empirical.joint(joint), in.encoder);

    const double t = static_cast<double>(tc);
    const double q = r.scale;
    r.term1 = -2.0 * q * std::log(q) * std::sqrt(t) * std::sqrt(r.i_xt);
    r.term2 = 2.0 * q * std::pow(t, 0.75) * std::pow(r.i_xt, 0.25);
    r.term3 = 2.0 * r.d_const * y_eff * r.emp_i_xt;
    r.total = r.term1 + r.term2 + r.term3;

    r.a41 = q > 0.0 && q < 1.0;
    r.a42 = true;
    const auto pt = induced_marginal(joint, in.encoder);
    const Matrix pxt = detail::joint_xt(joint, in.encoder);
    for (std::size_t k = 0; k < tc; ++k) {
        if (pt[k] <= 0.0) continue;
        std::vector<double> x_given_t(joint.x_card());
        for (std::size_t x = 0; x < joint.x_card(); ++x) x_given_t[x] = pxt(x, k) / pt[k];
        const double kl = kl_divergence(x_given_t, px);
        if (!(q * pt[k] * std::sqrt(kl) < kInvE)) r.a42 = false;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Hypothesis enumeration over all maps T -> Y.

using Hypothesis = std::vector<std::size_t>;

inline std::uint64_t hypothesis_count(std::size_t t_card, std::size_t y_card) {
    std::uint64_t n = 1;
    for (std::size_t i = 0; i < t_card; ++i) {
        n *= y_card;
        if (n > kEnumerationBudget) return kEnumerationBudget + 1;
    }
    return n;
}

/// Calls fn(h) for every h : T -> Y in odometer order (h[0] fastest).
template <class Fn>
void for_each_hypothesis(std::size_t t_card, std::size_t y_card, Fn&& fn) {
    const std::uint64_t n = hypothesis_count(t_card, y_card);
    if (n > kEnumerationBudget) {
        fail(ErrorKind::EnumerationBudgetExceeded,
             "|Y|^|T| exceeds " + std::to_string(kEnumerationBudget) + " hypotheses");
    }
    Hypothesis h(t_card, 0);
    for (std::uint64_t k = 0; k < n; ++k) {
        fn(static_cast<const Hypothesis&>(h));
        for (std::size_t i = 0; i < t_card; ++i) {
            if (++h[i] < y_card) break;
            h[i] = 0;
        }
    }
}

/// sup_h |E_p 1{h*(t) != h(t)} - E_q 1{h*(t) != h(t)}| over all h : T -> Y.
inline double hdh_distance_exhaustive(std::span<const double> p_t, std::span<const double> q_t,
                                      const Hypothesis& h_star, std::size_t y_card) {
    if (p_t.size() != q_t.size() || h_star.size() != p_t.size()) {
        fail(ErrorKind::DimensionMismatch, "hdh_distance_exhaustive: |T| mismatch");
    }
    double best = 0.0;
    for_each_hypothesis(p_t.size(), y_card, [&](const Hypothesis& h) {
        double diff = 0.0;
        for (std::size_t t = 0; t < h.size(); ++t)
            if (h[t] != h_star[t]) diff += p_t[t] - q_t[t];
        best = std::max(best, std::abs(diff));
    });
    return best;
}

struct DecompositionReport {
    double eps_target = 0.0;
    double eps_source_emp = 0.0;
    double eps_source = 0.0;
    double delta_s = 0.0;
    double d_hdh = 0.0;
    double lambda = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

/// Quantities shared by every hypothesis in one decomposition check.
class Decomposition {
public:
    Decomposition(const JointDistribution& source, const JointDistribution& target, const Encoder& enc,
                  const EmpiricalDraw& empirical_source) {
        if (source.x_card() != target.x_card() || source.y_card() != target.y_card()) {
            fail(ErrorKind::DimensionMismatch, "source and target joints must share alphabets");
        }
        if (empirical_source.x_card != source.x_card() || empirical_source.y_card != source.y_card()) {
            fail(ErrorKind::DimensionMismatch, "empirical draw does not match the source joint");
        }
        y_card_ = source.y_card();
        p_t_ = induced_marginal(source, enc);
        q_t_ = induced_marginal(target, enc);
        p_hat_t_ = induced_marginal(empirical_source.joint(source), enc);

        // Ground-truth-induced labeling from the source decoder, ties to the
        // smallest label; dead clusters map to label 0.
        const Decoder dec = induced_decoder(source, enc);
        labeling_.assign(enc.t_card(), 0);
        for (std::size_t t = 0; t < enc.t_card(); ++t) {
            const auto row = dec.probs.row(t);
            labeling_[t] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
        }

        lambda_ = std::numeric_limits<double>::infinity();
        for_each_hypothesis(enc.t_card(), y_card_, [&](const Hypothesis& h) {
            const double s = error(p_t_, h) + error(q_t_, h);
            if (s < lambda_) {
                lambda_ = s;
                h_star_ = h;
            }
        });
        d_hdh_ = hdh_distance_exhaustive(p_t_, q_t_, h_star_, y_card_);
    }

    [[nodiscard]] DecompositionReport report(const Hypothesis& h) const {
        if (h.size() != labeling_.size()) fail(ErrorKind::DimensionMismatch, "hypothesis must map every t");
        for (std::size_t v : h)
            if (v >= y_card_) fail(ErrorKind::DimensionMismatch, "hypothesis label outside Y");
        DecompositionReport r;
        r.eps_target = error(q_t_, h);
        r.eps_source = error(p_t_, h);
        r.eps_source_emp = error(p_hat_t_, h);
        r.delta_s = std::abs(r.eps_source_emp - r.eps_source);
        r.d_hdh = d_hdh_;
        r.lambda = lambda_;
        r.rhs = r.eps_source_emp + r.delta_s + r.d_hdh + r.lambda;
        r.holds = r.eps_target <= r.rhs + 1e-12;
        return r;
    }

    [[nodiscard]] const Hypothesis& labeling() const noexcept { return labeling_; }
    [[nodiscard]] const Hypothesis& h_star() const noexcept { return h_star_; }
    [[nodiscard]] std::size_t y_card() const noexcept { return y_card_; }
    [[nodiscard]] std::size_t t_card() const noexcept { return labeling_.size(); }
    [[nodiscard]] const std::vector<double>& source_marginal() const noexcept { return p_t_; }
    [[nodiscard]] const std::vector<double>& target_marginal() const noexcept { return q_t_; }

private:
    [[nodiscard]] double error(const std::vector<double>& mass, const Hypothesis& h) const {
        double e = 0.0;
        for (std::size_t t = 0; t < h.size(); ++t)
            if (h[t] != labeling_[t]) e += mass[t];
        return e;
    }

    std::size_t y_card_ = 0;
    std::vector<double> p_t_, q_t_, p_hat_t_;
    Hypothesis labeling_, h_star_;
    double lambda_ = 0.0;
    double d_hdh_ = 0.0;
};

inline DecompositionReport verify_decomposition(const JointDistribution& source, const JointDistribution& target,
                                                const Encoder& enc, const EmpiricalDraw& empirical_source,
                                                const Hypothesis& h) {
    return Decomposition(source, target, enc, empirical_source).report(h);
}

// ---------------------------------------------------------------------------
// Simulation protocol comparing the two bounds across sample sizes.

enum class Generator { Uniform, Normal };

inline std::string_view to_string(Generator g) { return g == Generator::Uniform ? "uniform" : "normal"; }

/// Positive random entries, U(0,1) or |N(0,1)|, normalized to unit mass.
inline std::vector<double> random_simplex_point(CounterRng& rng, std::size_t n, Generator gen) {
    std::vector<double> v(n);
    double z = 0.0;
    for (double& x : v) {
        x = gen == Generator::Uniform ? rng.uniform() : std::abs(rng.standard_normal());
        z += x;
    }
    for (double& x : v) x /= z;
    return v;
}

struct BoundSimConfig {
    std::vector<std::uint64_t> m_grid{10, 100, 1000, 10000, 100000, 1000000};
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    Generator generator = Generator::Uniform;
    std::size_t x_card = 3;
    std::size_t t_card = 2;
    std::size_t y_card = 2;
    double delta = 0.1;
    std::size_t threads = 1;
};

struct BoundTrialRow {
    std::uint64_t m = 0;
    std::size_t trial = 0;
    std::string bound;  // "ours" or "previous"
    bool constraints_ok = false;
    double value = 0.0;
    double gap = 0.0;
};

struct BoundSummaryRow {
    std::uint64_t m = 0;
    std::string bound;
    double error_rate = 0.0;
    double mean_value = 0.0;  // NaN when no trial satisfied the constraints
};

struct BoundSimResult {
    std::vector<BoundTrialRow> trials;
    std::vector<BoundSummaryRow> summary;
};

/// One trial's population joint and encoder. The draw is shared across the m
/// grid (common random numbers); only the empirical sample depends on m.
inline std::pair<JointDistribution, Encoder> simulation_instance(const BoundSimConfig& cfg, std::size_t trial) {
    CounterRng rng(derive_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(cfg.generator)), trial));
    auto cells = random_simplex_point(rng, cfg.x_card * cfg.y_card, cfg.generator);
    Matrix joint(cfg.x_card, cfg.y_card);
    std::copy(cells.begin(), cells.end(), joint.flat().begin());
    Matrix enc(cfg.x_card, cfg.t_card);
    for (std::size_t x = 0; x < cfg.x_card; ++x) {
        auto row = random_simplex_point(rng, cfg.t_card, cfg.generator);
        std::copy(row.begin(), row.end(), enc.row(x).begin());
    }
    return {JointDistribution(std::move(joint)), Encoder(std::move(enc))};
}

inline BoundSimResult bound_simulation(const BoundSimConfig& cfg) {
    if (cfg.trials < 1) fail(ErrorKind::InvalidConfig, "trials must be >= 1");
    if (cfg.m_grid.empty()) fail(ErrorKind::InvalidConfig, "m grid must be non-empty");
    const std::size_t n_m = cfg.m_grid.size();
    auto per_task = parallel_map(n_m * cfg.trials, cfg.threads, [&](std::size_t task) {
        const std::size_t mi = task / cfg.trials;
        const std::size_t trial = task % cfg.trials;
        const std::uint64_t m = cfg.m_grid[mi];
        auto [joint, enc] = simulation_instance(cfg, trial);
        const std::uint64_t sample_seed =
            derive_seed(derive_seed(cfg.seed ^ 0x5bd1e995ULL, static_cast<std::uint64_t>(cfg.generator)), task);
        BoundInputs in{joint, sample_empirical(joint, m, sample_seed), enc, cfg.delta};
        const double gap = generalization_gap(in);
        const OurBoundReport ours = our_bound(in);
        const PrevBoundReport prev = previous_bound(in);
        return std::array<BoundTrialRow, 2>{
            BoundTrialRow{m, trial, "ours", ours.constraints_ok(), ours.total, gap},
            BoundTrialRow{m, trial, "previous", prev.constraints_ok(), prev.total, gap}};
    });

    BoundSimResult out;
    for (const auto& pair : per_task)
        for (const auto& row : pair) out.trials.push_back(row);

    for (std::size_t mi = 0; mi < n_m; ++mi) {
        for (const char* name : {"ours", "previous"}) {
            std::size_t violations = 0, ok = 0;
            double sum = 0.0;
            for (const auto& row : out.trials) {
                if (row.m != cfg.m_grid[mi] || row.bound != name) continue;
                if (row.constraints_ok) {
                    ++ok;
                    sum += row.value;
                } else {
                    ++violations;
                }
            }
            out.summary.push_back({cfg.m_grid[mi], name, static_cast<double>(violations) / static_cast<double>(cfg.trials),
                                   ok ? sum / static_cast<double>(ok) : std::numeric_limits<double>::quiet_NaN()});
        }
    }
    return out;
}

}  // namespace eib
