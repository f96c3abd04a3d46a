#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>

#include "eib/assignment.hpp"
#include "eib/rng.hpp"

using namespace eib;
using Catch::Matchers::WithinAbs;

namespace {

struct Brute {
    double cost;
    std::vector<std::size_t> perm;
};

/// Minimum over all permutations; next_permutation visits them in lexicographic order.
Brute brute_force(const Matrix& c) {
    std::vector<std::size_t> p(c.rows());
    std::iota(p.begin(), p.end(), 0);
    Brute best{std::numeric_limits<double>::infinity(), p};
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) s += c(i, p[i]);
        if (s < best.cost - 1e-12) best = {s, p};
    } while (std::next_permutation(p.begin(), p.end()));
    return best;
}

}  // namespace

TEST_CASE("assignment examples", "[assignment]") {
    const auto one = solve_assignment(Matrix::from_rows({{3.5}}));
    CHECK(one.col_of_row == std::vector<std::size_t>{0});
    CHECK(one.cost == 3.5);
    const auto two = solve_assignment(Matrix::from_rows({{0, 5}, {5, 0}}));
    CHECK(two.col_of_row == std::vector<std::size_t>{0, 1});
    CHECK(two.cost == 0.0);
    const auto swap = solve_assignment(Matrix::from_rows({{5, 0}, {0, 5}}));
    CHECK(swap.col_of_row == std::vector<std::size_t>{1, 0});
}

TEST_CASE("ties resolve to the lexicographically smallest matching", "[assignment]") {
    const auto flat = solve_assignment(Matrix(4, 4, 1.0));
    CHECK(flat.col_of_row == std::vector<std::size_t>{0, 1, 2, 3});
    const auto r = solve_assignment(Matrix::from_rows({{1, 1, 2}, {1, 1, 2}, {2, 2, 0}}));
    CHECK(r.col_of_row == std::vector<std::size_t>{0, 1, 2});
    const auto s = solve_assignment(Matrix::from_rows({{2, 1, 1}, {1, 2, 1}, {1, 1, 2}}));
    CHECK(s.col_of_row == std::vector<std::size_t>{1, 2, 0});
}

TEST_CASE("assignment matches brute force on 6x6", "[assignment][property]") {
    CounterRng rng(41);
    for (int k = 0; k < 200; ++k) {
        Matrix c(6, 6);
        // coarse integer costs force many ties
        for (double& v : c.flat()) v = k % 2 ? static_cast<double>(rng.below(4)) : rng.uniform();
        const auto got = solve_assignment(c);
        const auto want = brute_force(c);
        CHECK_THAT(got.cost, WithinAbs(want.cost, 1e-12));
        CHECK(got.col_of_row == want.perm);
    }
}

TEST_CASE("assignment rejects non-square input", "[assignment]") {
    bool threw = false;
    try {
        (void)solve_assignment(Matrix(2, 3));
    } catch (const Error& e) {
        threw = e.kind() == ErrorKind::DimensionMismatch;
    }
    CHECK(threw);
}
