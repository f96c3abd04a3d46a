// support.hpp: helpers shared by the unit tests.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "eib/matrix.hpp"
#include "eib/prob.hpp"
#include "eib/rng.hpp"

namespace eib::testing {

/// Strictly positive random point on the simplex.
inline std::vector<double> simplex(CounterRng& rng, std::size_t n) {
    std::vector<double> v(n);
    double z = 0.0;
    for (double& x : v) z += (x = rng.standard_exponential() + 1e-3);
    for (double& x : v) x /= z;
    return v;
}

inline JointDistribution random_joint(CounterRng& rng, std::size_t xc, std::size_t yc) {
    auto cells = simplex(rng, xc * yc);
    Matrix m(xc, yc);
    for (std::size_t i = 0; i < cells.size(); ++i) m.flat()[i] = cells[i];
    return JointDistribution(std::move(m));
}

inline Encoder random_soft_encoder(CounterRng& rng, std::size_t xc, std::size_t tc) {
    Matrix m(xc, tc);
    for (std::size_t x = 0; x < xc; ++x) {
        auto r = simplex(rng, tc);
        for (std::size_t t = 0; t < tc; ++t) m(x, t) = r[t];
    }
    return Encoder(std::move(m));
}

/// Plain triple loop, independent of the library's induced_* helpers.
inline std::vector<double> brute_marginal(const JointDistribution& j, const Encoder& e) {
    std::vector<double> pt(e.t_card(), 0.0);
    for (std::size_t x = 0; x < j.x_card(); ++x)
        for (std::size_t y = 0; y < j.y_card(); ++y)
            for (std::size_t t = 0; t < e.t_card(); ++t) pt[t] += j(x, y) * e.probs()(x, t);
    return pt;
}

inline double brute_entropy(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0) h -= v * std::log(v);
    return h;
}

}  // namespace eib::testing
