// solver.hpp
//
// Self-consistent iterative solver for the elastic information bottleneck
//
//     min  (1 - alpha) H(T) + alpha I(X;T) - beta I(Y;T),   0 <= alpha <= 1.
//
// alpha = 1 is the classical IB, alpha = 0 the deterministic IB. One sweep
// re-induces p(t) and p(y|t) from the encoder and then sets
//
//     p(t|x) ∝ exp( (log p(t) - beta KL[p(y|x) || p(y|t)]) / alpha ).
//
// The exponent is evaluated in log-space with the row maximum subtracted,
// which keeps beta in the 1e4 range finite. Below cfg.alpha_floor the 1/alpha
// factor is replaced by its zero-temperature limit, a hard argmax assignment.
//
// Every sweep leaves the free energy
//
//     F = sum_x p(x) [ alpha KL[p(t|x) || p(t)] + (1 - alpha) sum_t p(t|x) log 1/p(t)
//                      + beta sum_t p(t|x) KL[p(y|x) || p(y|t)] ]
//
// non-increasing; the trace records it per iteration. Clusters whose mass
// reaches zero stay dead.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eib/error.hpp"
#include "eib/prob.hpp"
#include "eib/rng.hpp"

namespace eib {

/// Log-weight below which an encoder entry is set to exactly zero.
inline constexpr double kLogUnderflow = -600.0;

struct EibConfig {
    double alpha = 1.0;
    double beta = 5.0;
    std::size_t t_cardinality = 2;
    double tol = 1e-9;
    std::size_t max_iter = 10000;
    std::size_t n_restarts = 10;
    std::uint64_t seed = 0;
    double alpha_floor = 1e-4;

    void validate() const {
        if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorKind::InvalidConfig, "alpha must lie in [0,1]");
        if (!(beta > 0.0)) fail(ErrorKind::InvalidConfig, "beta must be positive");
        if (t_cardinality < 1) fail(ErrorKind::InvalidConfig, "t_cardinality must be >= 1");
        if (!(tol > 0.0)) fail(ErrorKind::InvalidConfig, "tol must be positive");
        if (n_restarts < 1) fail(ErrorKind::InvalidConfig, "n_restarts must be >= 1");
        if (!(alpha_floor > 0.0)) fail(ErrorKind::InvalidConfig, "alpha_floor must be positive");
    }

    [[nodiscard]] bool deterministic_limit() const noexcept { return alpha < alpha_floor; }
};

/// Encoder plus the marginal and decoder it induces on the joint.
struct SolveState {
    Encoder encoder;
    std::vector<double> marginal_t;
    Decoder decoder;

    static SolveState from_encoder(const JointDistribution& joint, Encoder enc) {
        auto pt = induced_marginal(joint, enc);
        auto dec = induced_decoder(joint, enc);
        return SolveState{std::move(enc), std::move(pt), std::move(dec)};
    }

    [[nodiscard]] std::size_t t_card() const noexcept { return encoder.t_card(); }
};

struct InfoSummary {
    double h_t = 0.0;
    double h_t_given_x = 0.0;
    double h_t_given_y = 0.0;
    double i_xt = 0.0;
    double i_yt = 0.0;
    double f_eib = 0.0;
    double l_eib = 0.0;
};

struct TraceEntry {
    std::size_t iteration = 0;
    double f_eib = 0.0;
    double max_delta = 0.0;
};

struct SolveTrace {
    double initial_f_eib = 0.0;
    std::vector<TraceEntry> entries;
    bool converged = false;
    std::size_t restart_index = 0;
};

struct SolveResult {
    SolveState state;
    SolveTrace trace;
    InfoSummary summary;
};

namespace detail {

/// log p(t) - beta KL[p(y|x) || p(y|t)] for every t; -inf marks unreachable t.
/// Instances with p(x) = 0 carry no label information and score log p(t).
inline void cluster_scores(const SolveState& state, std::span<const double> label_row, bool has_mass, double beta,
                           std::vector<double>& out) {
    const std::size_t tc = state.t_card();
    out.assign(tc, -std::numeric_limits<double>::infinity());
    for (std::size_t t = 0; t < tc; ++t) {
        const double pt = state.marginal_t[t];
        if (pt <= 0.0 || state.decoder.dead[t]) continue;
        double s = std::log(pt);
        if (has_mass) {
            const double kl = kl_divergence(label_row, state.decoder.probs.row(t));
            if (std::isinf(kl)) continue;
            s -= beta * kl;
        }
        out[t] = s;
    }
}

inline double max_entry_change(const Encoder& a, const Encoder& b) {
    double d = 0.0;
    const auto fa = a.probs().flat();
    const auto fb = b.probs().flat();
    for (std::size_t i = 0; i < fa.size(); ++i) d = std::max(d, std::abs(fa[i] - fb[i]));
    return d;
}

}  // namespace detail

/// Soft update for alpha >= alpha_floor.
inline SolveState eib_update_step(const SolveState& state, const JointDistribution& joint, const EibConfig& cfg) {
    if (cfg.deterministic_limit()) {
        fail(ErrorKind::DomainError, "eib_update_step requires alpha >= alpha_floor; use dib_assignment_step");
    }
    require_compatible(joint, state.encoder);
    const auto px = joint.marginal_x();
    const Matrix label_given_x = joint.label_given_instance();
    const std::size_t tc = state.t_card();
    Matrix next(joint.x_card(), tc);
    std::vector<double> scores;
    for (std::size_t x = 0; x < joint.x_card(); ++x) {
        detail::cluster_scores(state, label_given_x.row(x), px[x] > 0.0, cfg.beta, scores);
        const double top = *std::max_element(scores.begin(), scores.end());
        if (!std::isfinite(top)) fail(ErrorKind::AllClustersDead, "no reachable cluster for instance " + std::to_string(x));
        double z = 0.0;
        for (std::size_t t = 0; t < tc; ++t) {
            // Weights below e^-600 are flushed to zero: left in, they reach the
            // subnormal range in p(t, y) and corrupt the induced decoder.
            const double e = (scores[t] - top) / cfg.alpha;
            const double w = std::isfinite(scores[t]) && e > kLogUnderflow ? std::exp(e) : 0.0;
            next(x, t) = w;
            z += w;
        }
        for (std::size_t t = 0; t < tc; ++t) next(x, t) /= z;
    }
    return SolveState::from_encoder(joint, Encoder(std::move(next)));
}

/// Zero-temperature assignment for alpha < alpha_floor: each x goes to the
/// highest-scoring live cluster, ties to the smallest index.
inline SolveState dib_assignment_step(const SolveState& state, const JointDistribution& joint, const EibConfig& cfg) {
    if (!cfg.deterministic_limit()) {
        fail(ErrorKind::DomainError, "dib_assignment_step requires alpha < alpha_floor");
    }
    require_compatible(joint, state.encoder);
    const auto px = joint.marginal_x();
    const Matrix label_given_x = joint.label_given_instance();
    std::vector<std::size_t> assign(joint.x_card(), 0);
    std::vector<double> scores;
    for (std::size_t x = 0; x < joint.x_card(); ++x) {
        detail::cluster_scores(state, label_given_x.row(x), px[x] > 0.0, cfg.beta, scores);
        const auto best = std::max_element(scores.begin(), scores.end());  // first maximum
        if (!std::isfinite(*best)) fail(ErrorKind::AllClustersDead, "no reachable cluster for instance " + std::to_string(x));
        assign[x] = static_cast<std::size_t>(best - scores.begin());
    }
    return SolveState::from_encoder(joint, Encoder::deterministic(assign, state.t_card()));
}

inline SolveState solver_step(const SolveState& state, const JointDistribution& joint, const EibConfig& cfg) {
    return cfg.deterministic_limit() ? dib_assignment_step(state, joint, cfg) : eib_update_step(state, joint, cfg);
}

inline double free_energy(const SolveState& state, const JointDistribution& joint, const EibConfig& cfg) {
    require_compatible(joint, state.encoder);
    const auto px = joint.marginal_x();
    const Matrix label_given_x = joint.label_given_instance();
    double compress = 0.0;  // sum p(x) p(t|x) log p(t|x)
    double cross = 0.0;     // sum p(x) p(t|x) log 1/p(t)
    double distortion = 0.0;
    for (std::size_t x = 0; x < joint.x_card(); ++x) {
        if (px[x] <= 0.0) continue;
        for (std::size_t t = 0; t < state.t_card(); ++t) {
            const double w = state.encoder(x, t);
            if (w <= 0.0) continue;
            const double pt = state.marginal_t[t];
            compress += px[x] * w * std::log(w);
            cross -= px[x] * w * std::log(pt);
            distortion += px[x] * w * kl_divergence(label_given_x.row(x), state.decoder.probs.row(t));
        }
    }
    // alpha KL[p(t|x)||p(t)] + (1-alpha) log 1/p(t) = alpha log p(t|x) + log 1/p(t)
    const double f = cfg.alpha * compress + cross + cfg.beta * distortion;
    return f < 0.0 && f >= -1e-10 ? 0.0 : f;
}

inline InfoSummary info_summary(const SolveState& state, const JointDistribution& joint, const EibConfig& cfg) {
    InfoSummary s;
    const auto px = joint.marginal_x();
    s.h_t = entropy(state.marginal_t);
    for (std::size_t x = 0; x < joint.x_card(); ++x) {
        if (px[x] > 0.0) s.h_t_given_x += px[x] * entropy(state.encoder.row(x));
    }
    const Matrix pty = induced_joint_ty(joint, state.encoder);
    const double h_ty = entropy(pty.flat());
    const double h_y = entropy(joint.marginal_y());
    s.h_t_given_y = std::max(h_ty - h_y, 0.0);
    s.i_xt = s.h_t - s.h_t_given_x;
    if (s.i_xt < 0.0 && s.i_xt >= -1e-10) s.i_xt = 0.0;
    s.i_yt = s.h_t + h_y - h_ty;
    if (s.i_yt < 0.0 && s.i_yt >= -1e-10) s.i_yt = 0.0;
    s.f_eib = free_energy(state, joint, cfg);
    s.l_eib = (1.0 - cfg.alpha) * s.h_t + cfg.alpha * s.i_xt - cfg.beta * s.i_yt;
    return s;
}

/// Encoder rows drawn from a symmetric Dirichlet(1).
inline Encoder random_encoder(std::size_t x_card, std::size_t t_card, std::uint64_t seed) {
    CounterRng rng(seed);
    Matrix m(x_card, t_card);
    for (std::size_t x = 0; x < x_card; ++x) {
        double z = 0.0;
        for (std::size_t t = 0; t < t_card; ++t) {
            m(x, t) = rng.standard_exponential();
            z += m(x, t);
        }
        for (std::size_t t = 0; t < t_card; ++t) m(x, t) /= z;
    }
    return Encoder(std::move(m));
}

/// Iterate from `initial` until the max encoder entry change drops below tol.
inline std::pair<SolveState, SolveTrace> solve_from(const JointDistribution& joint, const EibConfig& cfg,
                                                    const Encoder& initial, std::size_t restart_index = 0) {
    cfg.validate();
    SolveState state = SolveState::from_encoder(joint, initial);
    SolveTrace trace;
    trace.restart_index = restart_index;
    trace.initial_f_eib = free_energy(state, joint, cfg);
    for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
        SolveState next = solver_step(state, joint, cfg);
        const double delta = detail::max_entry_change(state.encoder, next.encoder);
        state = std::move(next);
        trace.entries.push_back({it, free_energy(state, joint, cfg), delta});
        if (delta < cfg.tol) {
            trace.converged = true;
            break;
        }
    }
    return {std::move(state), std::move(trace)};
}

inline std::uint64_t restart_seed(const EibConfig& cfg, std::size_t restart) { return derive_seed(cfg.seed, restart); }

/// Runs cfg.n_restarts seeded restarts and keeps the one with the lowest
/// objective (ties to the earliest restart).
inline SolveResult solve_eib(const JointDistribution& joint, const EibConfig& cfg) {
    cfg.validate();
    std::optional<SolveResult> best;
    for (std::size_t r = 0; r < cfg.n_restarts; ++r) {
        Encoder init = random_encoder(joint.x_card(), cfg.t_cardinality, restart_seed(cfg, r));
        auto [state, trace] = solve_from(joint, cfg, init, r);
        InfoSummary summary = info_summary(state, joint, cfg);
        if (!best || summary.l_eib < best->summary.l_eib) {
            best = SolveResult{std::move(state), std::move(trace), summary};
        }
    }
    return std::move(*best);
}

/// Predicted label argmax_y sum_t p(t|x) p(y|t), ties to the smallest label.
inline std::size_t classify(const SolveState& state, std::size_t x) {
    if (x >= state.encoder.x_card()) fail(ErrorKind::UnknownInstance, "instance index " + std::to_string(x));
    const std::size_t yc = state.decoder.y_card();
    std::vector<double> score(yc, 0.0);
    for (std::size_t t = 0; t < state.t_card(); ++t) {
        const double w = state.encoder(x, t);
        if (w <= 0.0 || state.decoder.dead[t]) continue;
        for (std::size_t y = 0; y < yc; ++y) score[y] += w * state.decoder.probs(t, y);
    }
    return static_cast<std::size_t>(std::max_element(score.begin(), score.end()) - score.begin());
}

}  // namespace eib
