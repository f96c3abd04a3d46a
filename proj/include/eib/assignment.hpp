// assignment.hpp
//
// Exact minimum-cost perfect matching on a square cost matrix (Hungarian
// method with row/column potentials, O(n^3)). Among all optimal matchings the
// lexicographically smallest one (by column of row 0, then row 1, ...) is
// returned: every optimal matching uses only edges that are tight under the
// final potentials, so the tie-break runs as a greedy lexicographic pass over
// the tight-edge subgraph with one augmenting-path repair per candidate.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "eib/error.hpp"
#include "eib/matrix.hpp"

namespace eib {

struct Assignment {
    std::vector<std::size_t> col_of_row;
    double cost = 0.0;
};

namespace detail {

struct TightGraph {
    std::vector<std::vector<std::size_t>> cols;  // sorted tight columns per row
};

inline bool repair_path(std::size_t row, const TightGraph& g, std::vector<std::size_t>& owner,
                        std::vector<std::size_t>& col_of_row, std::vector<bool>& visited, std::size_t free_col,
                        const std::vector<bool>& locked) {
    for (std::size_t c : g.cols[row]) {
        if (visited[c]) continue;
        visited[c] = true;
        const std::size_t o = owner[c];
        if (c == free_col || (o != std::numeric_limits<std::size_t>::max() && !locked[o] &&
                              repair_path(o, g, owner, col_of_row, visited, free_col, locked))) {
            owner[c] = row;
            col_of_row[row] = c;
            return true;
        }
    }
    return false;
}

}  // namespace detail

inline Assignment solve_assignment(const Matrix& cost) {
    const std::size_t n = cost.rows();
    if (cost.cols() != n) fail(ErrorKind::DimensionMismatch, "assignment needs a square cost matrix");
    if (n == 0) return {};
    constexpr double inf = std::numeric_limits<double>::infinity();
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();

    // 1-based potentials; column 0 is the virtual source.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::size_t> col_of_row(n), owner(n);
    for (std::size_t j = 1; j <= n; ++j) {
        col_of_row[p[j] - 1] = j - 1;
        owner[j - 1] = p[j] - 1;
    }

    double scale = 1.0;
    for (double c : cost.flat()) scale = std::max(scale, std::abs(c));
    const double tol = 1e-12 * scale * static_cast<double>(n);
    detail::TightGraph g;
    g.cols.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (cost(i, j) - u[i + 1] - v[j + 1] <= tol) g.cols[i].push_back(j);

    std::vector<bool> locked(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j : g.cols[i]) {
            if (j >= col_of_row[i]) break;
            const std::size_t k = owner[j];
            if (locked[k]) continue;
            // Move i onto j; its old column becomes the single free column that
            // the displaced row k must reach through unlocked rows.
            auto owner_try = owner;
            auto rows_try = col_of_row;
            const std::size_t freed = rows_try[i];
            owner_try[freed] = none;
            owner_try[j] = i;
            rows_try[i] = j;
            std::vector<bool> visited(n, false);
            visited[j] = true;
            auto lock_try = locked;
            lock_try[i] = true;
            if (detail::repair_path(k, g, owner_try, rows_try, visited, freed, lock_try)) {
                owner = std::move(owner_try);
                col_of_row = std::move(rows_try);
                break;
            }
        }
        locked[i] = true;
    }

    Assignment out{std::move(col_of_row), 0.0};
    for (std::size_t i = 0; i < n; ++i) out.cost += cost(i, out.col_of_row[i]);
    return out;
}

}  // namespace eib
