#include <doctest.h>

#include <random>

#include "flatchain/lp.hpp"

using namespace flatchain;

TEST_CASE("small textbook problem") {
    // max 3x + 2y  s.t. x + y + s1 = 4, x + 3y + s2 = 6, x <= 3.
    lp::Problem p(2, 4);
    p.at(0, 0) = 1; p.at(0, 1) = 1; p.at(0, 2) = 1;
    p.at(1, 0) = 1; p.at(1, 1) = 3; p.at(1, 3) = 1;
    p.b = {4, 6};
    p.cost = {-3, -2, 0, 0};
    p.upper[0] = 3;
    auto s = lp::solve(p);
    REQUIRE(s.status == lp::Status::kOptimal);
    CHECK(s.objective == doctest::Approx(-11));
    CHECK(s.x[0] == doctest::Approx(3));
    CHECK(s.x[1] == doctest::Approx(1));
}

TEST_CASE("infeasible and unbounded") {
    lp::Problem p(1, 1);
    p.at(0, 0) = 1;
    p.b = {-1};
    CHECK(lp::solve(p).status == lp::Status::kInfeasible);
    lp::Problem q(1, 2);
    q.at(0, 0) = 1; q.at(0, 1) = -1;
    q.cost = {-1, 0};
    CHECK(lp::solve(q).status == lp::Status::kUnbounded);
}

TEST_CASE("nonzero lower bounds and redundant rows") {
    lp::Problem p(2, 2);
    p.at(0, 0) = 1; p.at(0, 1) = 1;
    p.at(1, 0) = 2; p.at(1, 1) = 2;
    p.b = {5, 10};
    p.cost = {1, 2};
    p.lower = {1, 1};
    auto s = lp::solve(p);
    REQUIRE(s.status == lp::Status::kOptimal);
    CHECK(s.objective == doctest::Approx(6));
}

TEST_CASE("random decomposition problems are feasible and bounded") {
    // minimize sum|q_i| + sum w_j |p_j|  s.t.  q + B p = s, split into
    // positive parts; the optimum never exceeds |s|_1.
    std::mt19937 rng(4);
    std::uniform_int_distribution<int> coef(-1, 1), val(-3, 3);
    for (int trial = 0; trial < 40; ++trial) {
        const int m = 6, n = 4;
        std::vector<std::vector<int>> b(m, std::vector<int>(n));
        for (auto& row : b)
            for (auto& v : row) v = coef(rng);
        std::vector<double> target(m);
        double l1 = 0;
        for (auto& t : target) {
            t = val(rng);
            l1 += std::abs(t);
        }
        lp::Problem p(m, 2 * m + 2 * n);
        for (int i = 0; i < m; ++i) {
            p.at(i, i) = 1;
            p.at(i, m + i) = -1;
            for (int j = 0; j < n; ++j) {
                p.at(i, 2 * m + j) = b[i][j];
                p.at(i, 2 * m + n + j) = -b[i][j];
            }
            p.b[i] = target[i];
        }
        for (int c = 0; c < 2 * m; ++c) p.cost[c] = 1;
        for (int c = 2 * m; c < 2 * m + 2 * n; ++c) p.cost[c] = 0.5;
        auto s = lp::solve(p);
        REQUIRE(s.status == lp::Status::kOptimal);
        CHECK(s.objective <= l1 + 1e-9);
        for (int i = 0; i < m; ++i) {
            double r = -target[i];
            for (int c = 0; c < p.cols; ++c) r += p.at(i, c) * s.x[c];
            CHECK(std::abs(r) < 1e-9);
        }
        for (double x : s.x) CHECK(x >= -1e-12);
    }
}
