// experiments.hpp
//
// Experiment drivers shared by the CLI and the acceptance suite. Grid points
// run through parallel_map, each with a seed derived from (base seed, index),
// and results come back in grid order.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eib/bounds.hpp"
#include "eib/error.hpp"
#include "eib/gauss.hpp"
#include "eib/parallel.hpp"
#include "eib/prob.hpp"
#include "eib/rng.hpp"
#include "eib/solver.hpp"
#include "eib/toy.hpp"

namespace eib::exp {

/// n evenly spaced points covering [lo, hi] inclusive.
inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n == 0) fail(ErrorKind::InvalidConfig, "grid must be non-empty");
    std::vector<double> out(n, lo);
    if (n == 1) return out;
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    out.back() = hi;
    return out;
}

inline constexpr std::uint64_t kDefaultJointSeed = 20240607;

/// Fixed seeded 8 x 2 joint used for the information-plane sweeps:
/// p(x) ~ Dirichlet(1), p(y|x) ~ Beta(1/2, 1/2) drawn as a ratio of squared
/// normals.
inline JointDistribution default_joint() {
    CounterRng rng(kDefaultJointSeed);
    Matrix p(8, 2);
    double z = 0.0;
    for (std::size_t x = 0; x < p.rows(); ++x) {
        const double px = rng.standard_exponential();
        const double na = rng.standard_normal(), nb = rng.standard_normal();
        const double a = na * na, b = nb * nb;
        p(x, 0) = px * a / (a + b);
        p(x, 1) = px * b / (a + b);
        z += px;
    }
    for (double& v : p.flat()) v /= z;
    return JointDistribution(std::move(p));
}

// ---------------------------------------------------------------------------
// Information-plane sweep

enum class Axis { Beta, Alpha };

inline std::string_view to_string(Axis a) { return a == Axis::Beta ? "beta" : "alpha"; }

struct SweepConfig {
    Axis axis = Axis::Beta;
    std::vector<double> grid;  // empty selects the default for the axis
    EibConfig solver{};        // alpha (beta axis) or beta (alpha axis) is held fixed
    std::size_t threads = 1;

    [[nodiscard]] std::vector<double> effective_grid() const {
        if (!grid.empty()) return grid;
        return axis == Axis::Beta ? linspace(1.5, 51.5, 500) : linspace(0.0, 1.0, 201);
    }

    /// Defaults: alpha = 1 on the beta axis, beta = 4.5 on the alpha axis, |T| = 4.
    static SweepConfig defaults(Axis axis) {
        SweepConfig c;
        c.axis = axis;
        c.solver.t_cardinality = 4;
        if (axis == Axis::Beta) c.solver.alpha = 1.0;
        else c.solver.beta = 4.5;
        return c;
    }
};

struct SweepRow {
    double value = 0.0;
    InfoSummary summary;
    bool converged = false;
};

inline EibConfig sweep_point_config(const SweepConfig& cfg, double value, std::size_t index) {
    EibConfig c = cfg.solver;
    if (cfg.axis == Axis::Beta) c.beta = value;
    else c.alpha = value;
    c.seed = derive_seed(cfg.solver.seed, index);
    return c;
}

inline std::vector<SweepRow> sweep(const JointDistribution& joint, const SweepConfig& cfg) {
    const auto grid = cfg.effective_grid();
    for (std::size_t i = 0; i < grid.size(); ++i) sweep_point_config(cfg, grid[i], i).validate();
    return parallel_map(grid.size(), cfg.threads, [&](std::size_t i) {
        const EibConfig c = sweep_point_config(cfg, grid[i], i);
        SolveResult r = solve_eib(joint, c);
        return SweepRow{grid[i], r.summary, r.trace.converged};
    });
}

// ---------------------------------------------------------------------------
// Toy transfer

/// 1e4 for R in {2, 1.5, 1.433}, 5e3 for R in {1.375, 1.25}; other R follow
/// the nearer group.
inline double toy_default_beta(double r) { return r < 1.4 ? 5e3 : 1e4; }

struct ToyTransferConfig {
    std::vector<double> alpha_grid = linspace(0.0, 1.0, 11);
    std::vector<double> source_r = {2.0, 1.5, 1.433, 1.375, 1.25};
    double target_r = 3.0;
    std::size_t m = 2000;
    std::size_t n_bits = 10;
    std::optional<double> beta;  // unset selects toy_default_beta per R
    EibConfig solver = [] {
        EibConfig c;
        c.t_cardinality = 4;
        return c;
    }();
    std::uint64_t seed = 0;
    std::size_t threads = 1;

    void validate() const {
        if (alpha_grid.empty() || source_r.empty()) fail(ErrorKind::InvalidConfig, "grids must be non-empty");
        for (double a : alpha_grid)
            if (!(a >= 0.0 && a <= 1.0)) fail(ErrorKind::InvalidConfig, "alpha grid must lie in [0,1]");
    }
};

struct ToyTransferCell {
    double alpha = 0.0;
    double r = 0.0;
    double beta = 0.0;
    double accuracy = 0.0;
    bool converged = false;
};

struct ToyTransferResult {
    std::vector<ToyTransferCell> cells;  // alpha-major
    std::vector<double> best_alpha;      // per R, smallest alpha on ties
    std::vector<double> best_accuracy;

    [[nodiscard]] const ToyTransferCell& at(std::size_t ai, std::size_t ri, std::size_t n_r) const {
        return cells.at(ai * n_r + ri);
    }
};

/// Predictor over a solved source joint whose x alphabet is `alphabet`.
inline toy::Predictor source_predictor(const SolveState& state, const std::vector<std::uint64_t>& alphabet) {
    return [&state, &alphabet](std::uint64_t code) -> std::optional<std::size_t> {
        const auto it = std::lower_bound(alphabet.begin(), alphabet.end(), code);
        if (it == alphabet.end() || *it != code) return std::nullopt;
        return classify(state, static_cast<std::size_t>(it - alphabet.begin()));
    };
}

inline ToyTransferResult toy_transfer(const ToyTransferConfig& cfg) {
    cfg.validate();
    const toy::ToyDataset target =
        toy::generate({cfg.target_r, cfg.m, derive_seed(cfg.seed, 0x7a29e7), cfg.n_bits});
    std::vector<toy::ToyDataset> sources;
    for (std::size_t ri = 0; ri < cfg.source_r.size(); ++ri)
        sources.push_back(toy::generate({cfg.source_r[ri], cfg.m, derive_seed(cfg.seed, ri), cfg.n_bits}));

    const std::size_t n_a = cfg.alpha_grid.size(), n_r = cfg.source_r.size();
    ToyTransferResult out;
    out.cells = parallel_map(n_a * n_r, cfg.threads, [&](std::size_t k) {
        const std::size_t ai = k / n_r, ri = k % n_r;
        const auto& src = sources[ri];
        const auto alphabet = toy::alphabet(src);
        const JointDistribution joint = toy::to_empirical_joint(src, alphabet);
        EibConfig c = cfg.solver;
        c.alpha = cfg.alpha_grid[ai];
        c.beta = cfg.beta.value_or(toy_default_beta(cfg.source_r[ri]));
        c.seed = derive_seed(cfg.solver.seed, ri);
        const SolveResult r = solve_eib(joint, c);
        const double acc = toy::accuracy(target, source_predictor(r.state, alphabet));
        return ToyTransferCell{c.alpha, cfg.source_r[ri], c.beta, acc, r.trace.converged};
    });
    for (std::size_t ri = 0; ri < n_r; ++ri) {
        std::size_t best = 0;
        for (std::size_t ai = 1; ai < n_a; ++ai)
            if (out.at(ai, ri, n_r).accuracy > out.at(best, ri, n_r).accuracy) best = ai;
        out.best_alpha.push_back(cfg.alpha_grid[best]);
        out.best_accuracy.push_back(out.at(best, ri, n_r).accuracy);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Representation discrepancy comparison (alpha = 0 vs alpha = 1)

struct RdRow {
    double alpha = 0.0;
    double l1_half = 0.0;  // 0.5 sum_t |p(t) - q(t)|
    double hdh = 0.0;
    std::vector<double> p_t, q_t;
    Hypothesis h_star;
};

struct RdResult {
    std::vector<RdRow> rows;
    [[nodiscard]] double l1_difference() const { return rows.at(1).l1_half - rows.at(0).l1_half; }
    [[nodiscard]] double hdh_difference() const { return rows.at(1).hdh - rows.at(0).hdh; }
};

/// Bayes labeling of the clusters under `joint`, ties to the smallest label.
inline Hypothesis source_bayes_labeling(const JointDistribution& joint, const Encoder& enc) {
    const Decoder dec = induced_decoder(joint, enc);
    Hypothesis h(enc.t_card(), 0);
    for (std::size_t t = 0; t < enc.t_card(); ++t) {
        const auto row = dec.probs.row(t);
        h[t] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    return h;
}

inline RdRow rd_row(double alpha, const JointDistribution& source, const Encoder& enc, std::vector<double> q_t) {
    RdRow row;
    row.alpha = alpha;
    row.p_t = induced_marginal(source, enc);
    row.q_t = std::move(q_t);
    for (std::size_t t = 0; t < row.p_t.size(); ++t) row.l1_half += 0.5 * std::abs(row.p_t[t] - row.q_t[t]);
    row.h_star = source_bayes_labeling(source, enc);
    row.hdh = hdh_distance_exhaustive(row.p_t, row.q_t, row.h_star, source.y_card());
    return row;
}

/// Shared-alphabet joints: solve on the source at alpha = 0 and 1.
inline RdResult rd_compare(const JointDistribution& source, const JointDistribution& target, EibConfig solver) {
    if (source.x_card() != target.x_card() || source.y_card() != target.y_card())
        fail(ErrorKind::DimensionMismatch, "source and target joints must share alphabets");
    RdResult out;
    for (double alpha : {0.0, 1.0}) {
        solver.alpha = alpha;
        const SolveResult r = solve_eib(source, solver);
        out.rows.push_back(rd_row(alpha, source, r.state.encoder, induced_marginal(target, r.state.encoder)));
    }
    return out;
}

/// Target marginal of T when the encoder is known only on `alphabet`;
/// unseen target instances borrow the row of the nearest known instance by
/// Hamming distance (ties to the smaller code).
inline std::vector<double> toy_target_marginal(const Encoder& enc, const std::vector<std::uint64_t>& alphabet,
                                               const toy::ToyDataset& target) {
    std::vector<double> q(enc.t_card(), 0.0);
    const double w = 1.0 / static_cast<double>(target.size());
    for (auto code : target.instances) {
        std::size_t best = 0;
        std::size_t best_d = std::numeric_limits<std::size_t>::max();
        for (std::size_t i = 0; i < alphabet.size(); ++i) {
            const std::size_t d = toy::hamming(code, alphabet[i]);
            if (d < best_d) best_d = d, best = i;
            if (d == 0) break;
        }
        const auto row = enc.row(best);
        for (std::size_t t = 0; t < q.size(); ++t) q[t] += w * row[t];
    }
    return q;
}

struct ToyRdConfig {
    double source_r = 2.0;
    double target_r = 3.0;
    std::size_t m = 2000;
    std::size_t n_bits = 10;
    EibConfig solver = [] {
        EibConfig c;
        c.t_cardinality = 4;
        c.beta = 1e4;
        return c;
    }();
    std::uint64_t seed = 0;
};

inline RdResult rd_compare_toy(const ToyRdConfig& cfg) {
    const toy::ToyDataset src = toy::generate({cfg.source_r, cfg.m, derive_seed(cfg.seed, 0), cfg.n_bits});
    const toy::ToyDataset tgt = cfg.target_r == cfg.source_r
                                    ? src
                                    : toy::generate({cfg.target_r, cfg.m, derive_seed(cfg.seed, 1), cfg.n_bits});
    const auto alphabet = toy::alphabet(src);
    const JointDistribution joint = toy::to_empirical_joint(src, alphabet);
    RdResult out;
    EibConfig c = cfg.solver;
    for (double alpha : {0.0, 1.0}) {
        c.alpha = alpha;
        const SolveResult r = solve_eib(joint, c);
        out.rows.push_back(rd_row(alpha, joint, r.state.encoder, toy_target_marginal(r.state.encoder, alphabet, tgt)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Gaussian formula vs Monte-Carlo reports

struct FormulaCheck {
    std::string name;
    double formula = 0.0;
    McEstimate mc;
    [[nodiscard]] double gap() const { return formula - mc.estimate; }
};

inline FormulaCheck check_l1(const DiagGaussian& g1, const DiagGaussian& g2, std::uint64_t n, std::uint64_t seed) {
    return {"l1_shared_cov", l1_shared_cov(g1, g2), l1_monte_carlo(g1, g2, n, seed)};
}

inline FormulaCheck check_regularizer(const DiagGaussian& p, const DiagGaussian& b, double alpha, std::uint64_t n,
                                      std::uint64_t seed) {
    return {"eib_var_regularizer", eib_var_regularizer(p, b, alpha),
            eib_var_regularizer_monte_carlo(p, b, alpha, n, seed)};
}

}  // namespace eib::exp
