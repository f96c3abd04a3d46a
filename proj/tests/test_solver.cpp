#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eib/solver.hpp"
#include "support.hpp"

using namespace eib;
using Catch::Matchers::WithinAbs;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected eib::Error");
    return ErrorKind::MalformedInput;
}

JointDistribution small_joint() {
    return JointDistribution(Matrix::from_rows({{0.20, 0.05}, {0.15, 0.10}, {0.02, 0.18}, {0.12, 0.18}}));
}

EibConfig cfg_of(double alpha, double beta, std::size_t t) {
    EibConfig c;
    c.alpha = alpha;
    c.beta = beta;
    c.t_cardinality = t;
    return c;
}

/// Independent IB step: p(t|x) proportional to p(t) exp(-beta KL) with plain sums.
Matrix reference_ib_step(const JointDistribution& j, const Encoder& e, double beta) {
    const std::size_t xc = j.x_card(), yc = j.y_card(), tc = e.t_card();
    std::vector<double> px(xc, 0.0), pt(tc, 0.0);
    Matrix pty(tc, yc);
    for (std::size_t x = 0; x < xc; ++x)
        for (std::size_t y = 0; y < yc; ++y) {
            px[x] += j(x, y);
            for (std::size_t t = 0; t < tc; ++t) {
                pt[t] += j(x, y) * e.probs()(x, t);
                pty(t, y) += j(x, y) * e.probs()(x, t);
            }
        }
    Matrix out(xc, tc);
    for (std::size_t x = 0; x < xc; ++x) {
        double z = 0.0;
        for (std::size_t t = 0; t < tc; ++t) {
            double kl = 0.0;
            for (std::size_t y = 0; y < yc; ++y) {
                const double a = j(x, y) / px[x];
                if (a > 0) kl += a * std::log(a / (pty(t, y) / pt[t]));
            }
            out(x, t) = pt[t] * std::exp(-beta * kl);
            z += out(x, t);
        }
        for (std::size_t t = 0; t < tc; ++t) out(x, t) /= z;
    }
    return out;
}

}  // namespace

TEST_CASE("config validation", "[solver]") {
    CHECK(kind_of([] { cfg_of(1.5, 1.0, 2).validate(); }) == ErrorKind::InvalidConfig);
    CHECK(kind_of([] { cfg_of(0.5, 0.0, 2).validate(); }) == ErrorKind::InvalidConfig);
    CHECK(kind_of([] { cfg_of(0.5, 1.0, 0).validate(); }) == ErrorKind::InvalidConfig);
    CHECK_NOTHROW(cfg_of(0.0, 1.0, 1).validate());
}

TEST_CASE("update at alpha 1 matches a direct evaluation", "[solver]") {
    CounterRng rng(21);
    for (int k = 0; k < 30; ++k) {
        const auto j = testing::random_joint(rng, 2 + rng.below(7), 2 + rng.below(3));
        const auto e = testing::random_soft_encoder(rng, j.x_card(), 2 + rng.below(4));
        const double beta = 0.5 + 10.0 * rng.uniform();
        const auto next = eib_update_step(SolveState::from_encoder(j, e), j, cfg_of(1.0, beta, e.t_card()));
        const Matrix want = reference_ib_step(j, e, beta);
        for (std::size_t i = 0; i < want.flat().size(); ++i)
            CHECK_THAT(next.encoder.probs().flat()[i], WithinAbs(want.flat()[i], 1e-12));
    }
}

TEST_CASE("update rows are normalized and the uniform constant encoder is a fixed point", "[solver]") {
    const auto j = small_joint();
    const std::vector<double> r{0.25, 0.25, 0.25, 0.25};
    const auto s = SolveState::from_encoder(j, Encoder::constant(r, 4));
    for (double alpha : {0.3, 0.7, 1.0}) {
        const auto next = eib_update_step(s, j, cfg_of(alpha, 5.0, 4));
        for (double v : next.encoder.probs().flat()) CHECK_THAT(v, WithinAbs(0.25, 1e-14));
    }
    const auto single = SolveState::from_encoder(j, Encoder::constant(std::vector{1.0}, 4));
    const auto stay = eib_update_step(single, j, cfg_of(0.5, 5.0, 1));
    for (double v : stay.encoder.probs().flat()) CHECK(v == 1.0);
}

TEST_CASE("step dispatch by alpha", "[solver]") {
    const auto j = small_joint();
    const auto s = SolveState::from_encoder(j, random_encoder(4, 3, 1));
    CHECK(kind_of([&] { (void)eib_update_step(s, j, cfg_of(1e-5, 5.0, 3)); }) == ErrorKind::DomainError);
    CHECK(kind_of([&] { (void)dib_assignment_step(s, j, cfg_of(0.5, 5.0, 3)); }) == ErrorKind::DomainError);
    const auto hard = solver_step(s, j, cfg_of(0.0, 5.0, 3));
    for (std::size_t x = 0; x < 4; ++x) {
        const auto row = hard.encoder.row(x);
        CHECK(std::count(row.begin(), row.end(), 1.0) == 1);
    }
}

TEST_CASE("deterministic step ties go to the smallest cluster and dead clusters are skipped", "[solver]") {
    // clusters 0 and 1 identical, cluster 2 empty
    const JointDistribution j(Matrix::from_rows({{0.25, 0.25}, {0.25, 0.25}}));
    const std::vector<std::size_t> a{0, 1};
    const auto s = SolveState::from_encoder(j, Encoder::deterministic(a, 3));
    const auto next = dib_assignment_step(s, j, cfg_of(0.0, 2.0, 3));
    CHECK(next.encoder(0, 0) == 1.0);
    CHECK(next.encoder(1, 0) == 1.0);
    CHECK(next.decoder.is_dead(2));
}

TEST_CASE("soft update near zero temperature agrees with the deterministic step", "[solver]") {
    CounterRng rng(22);
    std::size_t agree = 0, total = 0;
    for (int k = 0; k < 100; ++k) {
        const auto j = testing::random_joint(rng, 3 + rng.below(6), 2 + rng.below(3));
        const auto e = testing::random_soft_encoder(rng, j.x_card(), 2 + rng.below(3));
        const auto s = SolveState::from_encoder(j, e);
        EibConfig soft = cfg_of(1e-6, 3.0, e.t_card());
        soft.alpha_floor = 1e-7;
        const auto a = eib_update_step(s, j, soft);
        const auto b = dib_assignment_step(s, j, cfg_of(0.0, 3.0, e.t_card()));
        for (std::size_t x = 0; x < j.x_card(); ++x) {
            const auto ra = a.encoder.row(x);
            const auto rb = b.encoder.row(x);
            agree += std::max_element(ra.begin(), ra.end()) - ra.begin() ==
                     std::max_element(rb.begin(), rb.end()) - rb.begin();
            ++total;
        }
    }
    CHECK(static_cast<double>(agree) >= 0.95 * static_cast<double>(total));
}

TEST_CASE("free energy examples", "[solver]") {
    const auto j = small_joint();
    const auto one = SolveState::from_encoder(j, Encoder::constant(std::vector{1.0}, 4));
    const double beta = 7.0;
    CHECK_THAT(free_energy(one, j, cfg_of(1.0, beta, 1)), WithinAbs(beta * mutual_information(j), 1e-12));

    const std::vector<std::size_t> id{0, 1, 2, 3};
    const auto ident = SolveState::from_encoder(j, Encoder::deterministic(id, 4));
    CHECK_THAT(free_energy(ident, j, cfg_of(0.0, beta, 4)), WithinAbs(entropy(j.marginal_x()), 1e-12));
    CHECK_THAT(free_energy(ident, j, cfg_of(1.0, beta, 4)), WithinAbs(entropy(j.marginal_x()), 1e-12));
}

TEST_CASE("free energy matches a triple loop", "[solver]") {
    CounterRng rng(23);
    for (int k = 0; k < 100; ++k) {
        const auto j = testing::random_joint(rng, 2 + rng.below(7), 2 + rng.below(3));
        const auto e = testing::random_soft_encoder(rng, j.x_card(), 1 + rng.below(4));
        const double alpha = rng.uniform(), beta = 0.1 + 20.0 * rng.uniform();
        const auto pt = testing::brute_marginal(j, e);
        const auto px = j.marginal_x();
        double f = 0.0;
        for (std::size_t x = 0; x < j.x_card(); ++x)
            for (std::size_t t = 0; t < e.t_card(); ++t) {
                const double w = e.probs()(x, t);
                double pty[8] = {};
                for (std::size_t xx = 0; xx < j.x_card(); ++xx)
                    for (std::size_t y = 0; y < j.y_card(); ++y) pty[y] += j(xx, y) * e.probs()(xx, t) / pt[t];
                double kl = 0.0;
                for (std::size_t y = 0; y < j.y_card(); ++y) {
                    const double a = j(x, y) / px[x];
                    kl += a * std::log(a / pty[y]);
                }
                f += px[x] * w * (alpha * std::log(w / pt[t]) - (1 - alpha) * std::log(pt[t]) + beta * kl);
            }
        const auto s = SolveState::from_encoder(j, e);
        CHECK_THAT(free_energy(s, j, cfg_of(alpha, beta, e.t_card())), WithinAbs(f, 1e-10));
    }
}

TEST_CASE("free energy never increases along the iteration", "[solver][property]") {
    CounterRng rng(24);
    for (int k = 0; k < 40; ++k) {
        const auto j = testing::random_joint(rng, 3 + rng.below(6), 2 + rng.below(3));
        EibConfig c = cfg_of(k % 4 == 0 ? 1.0 : 0.05 + 0.95 * rng.uniform(), 0.5 + 20.0 * rng.uniform(), 2 + rng.below(3));
        c.max_iter = 300;
        auto [state, trace] = solve_from(j, c, random_encoder(j.x_card(), c.t_cardinality, derive_seed(5, k)));
        double prev = trace.initial_f_eib;
        for (const auto& e : trace.entries) {
            CHECK(e.f_eib <= prev + 1e-10 * std::max(1.0, std::abs(prev)));
            prev = e.f_eib;
        }
    }
}

TEST_CASE("deterministic iteration terminates with non-increasing energy", "[solver]") {
    CounterRng rng(25);
    for (int k = 0; k < 40; ++k) {
        const auto j = testing::random_joint(rng, 3 + rng.below(8), 2 + rng.below(3));
        const EibConfig c = cfg_of(0.0, 0.5 + 10.0 * rng.uniform(), 2 + rng.below(3));
        auto [state, trace] = solve_from(j, c, random_encoder(j.x_card(), c.t_cardinality, derive_seed(6, k)));
        CHECK(trace.converged);
        for (std::size_t i = 1; i < trace.entries.size(); ++i)
            CHECK(trace.entries[i].f_eib <= trace.entries[i - 1].f_eib + 1e-10);
    }
}

TEST_CASE("single cluster solution has no information", "[solver]") {
    const auto j = small_joint();
    for (double alpha : {0.0, 0.5, 1.0}) {
        const auto r = solve_eib(j, cfg_of(alpha, 10.0, 1));
        CHECK(r.summary.h_t == 0.0);
        CHECK(r.summary.i_xt == 0.0);
        CHECK(r.summary.i_yt == 0.0);
    }
}

TEST_CASE("large beta recovers the best deterministic encoder", "[solver]") {
    // two well-separated label groups on four instances
    CounterRng rng(26);
    for (int k = 0; k < 10; ++k) {
        const double lo = 0.05 + 0.2 * rng.uniform(), hi = 0.75 + 0.2 * rng.uniform();
        const auto px = testing::simplex(rng, 4);
        const std::vector<double> p1{lo, hi, hi, lo};
        Matrix m(4, 2);
        for (std::size_t x = 0; x < 4; ++x) m(x, 0) = px[x] * (1 - p1[x]), m(x, 1) = px[x] * p1[x];
        const JointDistribution j(std::move(m));
        for (double alpha : {0.0, 0.5, 1.0}) {
            const EibConfig c = cfg_of(alpha, 1e3, 2);
            const auto r = solve_eib(j, c);
            double best = 0.0;
            for (unsigned mask = 0; mask < 16; ++mask) {
                std::vector<std::size_t> a(4);
                for (std::size_t x = 0; x < 4; ++x) a[x] = (mask >> x) & 1u;
                best = std::max(best, info_summary(SolveState::from_encoder(j, Encoder::deterministic(a, 2)), j, c).i_yt);
            }
            CHECK_THAT(best, WithinAbs(mutual_information(j), 1e-12));
            CHECK_THAT(r.summary.i_yt, WithinAbs(best, 1e-6));
        }
    }
}

TEST_CASE("classify", "[solver]") {
    const auto j = small_joint();
    const std::vector<std::size_t> id{0, 1, 2, 3};
    const auto s = SolveState::from_encoder(j, Encoder::deterministic(id, 4));
    CHECK(classify(s, 0) == 0);
    CHECK(classify(s, 2) == 1);
    CHECK(classify(s, 3) == 1);
    CHECK(kind_of([&] { (void)classify(s, 4); }) == ErrorKind::UnknownInstance);
    const JointDistribution tie(Matrix::from_rows({{0.25, 0.25}, {0.25, 0.25}}));
    const auto st = SolveState::from_encoder(tie, Encoder::constant(std::vector{1.0}, 2));
    CHECK(classify(st, 1) == 0);
}

TEST_CASE("solutions are deterministic per seed", "[solver]") {
    const auto j = small_joint();
    const EibConfig c = cfg_of(0.4, 8.0, 3);
    const auto a = solve_eib(j, c);
    const auto b = solve_eib(j, c);
    CHECK(std::equal(a.state.encoder.probs().flat().begin(), a.state.encoder.probs().flat().end(),
                     b.state.encoder.probs().flat().begin()));
    CHECK(a.trace.entries.size() == b.trace.entries.size());
    CHECK(a.trace.restart_index == b.trace.restart_index);
}

TEST_CASE("converged solutions are self-consistent", "[solver][property]") {
    CounterRng rng(27);
    for (int k = 0; k < 20; ++k) {
        const auto j = testing::random_joint(rng, 3 + rng.below(5), 2 + rng.below(2));
        EibConfig c = cfg_of(0.2 + 0.8 * rng.uniform(), 1.0 + 10.0 * rng.uniform(), 3);
        c.tol = 1e-12;
        c.n_restarts = 2;
        const auto r = solve_eib(j, c);
        if (!r.trace.converged) continue;
        const auto again = eib_update_step(r.state, j, c);
        for (std::size_t i = 0; i < again.encoder.probs().flat().size(); ++i)
            CHECK_THAT(again.encoder.probs().flat()[i], WithinAbs(r.state.encoder.probs().flat()[i], 1e-9));
    }
}

TEST_CASE("information quantities obey the data-processing chain", "[solver][property]") {
    CounterRng rng(28);
    for (int k = 0; k < 300; ++k) {
        const auto j = testing::random_joint(rng, 2 + rng.below(7), 2 + rng.below(3));
        const auto e = testing::random_soft_encoder(rng, j.x_card(), 1 + rng.below(5));
        const EibConfig c = cfg_of(rng.uniform(), 1.0 + 5.0 * rng.uniform(), e.t_card());
        const auto s = info_summary(SolveState::from_encoder(j, e), j, c);
        CHECK(s.i_yt <= s.i_xt + 1e-12);
        CHECK(s.i_xt <= s.h_t + 1e-12);
        CHECK(s.h_t <= std::log(static_cast<double>(e.t_card())) + 1e-12);
        CHECK(s.i_yt <= mutual_information(j) + 1e-12);
        CHECK_THAT(s.l_eib, WithinAbs((1 - c.alpha) * s.h_t + c.alpha * s.i_xt - c.beta * s.i_yt, 1e-14));
        CHECK_THAT(s.f_eib - c.beta * (mutual_information(j) - s.i_yt) - (1 - c.alpha) * s.h_t - c.alpha * s.i_xt,
                   WithinAbs(0.0, 1e-9));
    }
}
