#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "flatchain/target.hpp"

using namespace flatchain;

namespace {

std::vector<double> random_point(int m, std::mt19937& rng, double scale = 2.0) {
    std::normal_distribution<double> g(0.0, scale);
    std::vector<double> z(m);
    for (double& v : z) v = g(rng);
    return z;
}

double dist(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

std::vector<std::vector<double>> circle_loop(int n, int winding) {
    std::vector<std::vector<double>> out;
    for (int i = 0; i < n; ++i) {
        double t = 2 * std::numbers::pi * winding * i / n;
        out.push_back({std::cos(t), std::sin(t)});
    }
    return out;
}

std::vector<std::vector<double>> director_loop(int n, double turns) {
    std::vector<std::vector<double>> out;
    for (int i = 0; i < n; ++i) {
        double t = 2 * std::numbers::pi * i / n;
        auto q = rp2q::embed({std::cos(turns * t), std::sin(turns * t), 0});
        out.emplace_back(q.begin(), q.end());
    }
    return out;
}

}  // namespace

TEST_CASE("retraction examples") {
    auto c = make_target("circle");
    std::vector<double> z{3, 4};
    auto r = c->retract(z);
    CHECK(r[0] == doctest::Approx(0.6));
    CHECK(r[1] == doctest::Approx(0.8));
    CHECK(c->retract(r) == r);
    CHECK(c->dist_to_X(std::vector<double>{0.3, 0.4}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(c->retract(std::vector<double>{1e-12, 0}), DegeneracyError);

    auto s3 = make_target("sphere3");
    CHECK(s3->dist_to_X(std::vector<double>{0, 0, 1}) == doctest::Approx(s3->delta0()));
    CHECK(s3->k() == 3);

    auto q = make_target("rp2q");
    auto n = rp2q::embed({0, 0, 1});
    std::vector<double> twice(n.begin(), n.end());
    for (double& v : twice) v *= 2;
    auto back = q->retract(twice);
    for (int i = 0; i < 5; ++i) CHECK(back[i] == doctest::Approx(n[i]).epsilon(1e-12));
    CHECK(q->dist_to_X(std::vector<double>(5, 0.0)) == 0);
    CHECK_THROWS_AS(q->retract(std::vector<double>(5, 0.0)), DegeneracyError);
    CHECK_THROWS_AS(make_target("torus"), InputError);
}

TEST_CASE("uniaxial embedding has unit norm and the right spectrum") {
    std::mt19937 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        auto v = random_point(3, rng);
        auto z = rp2q::embed({v[0], v[1], v[2]});
        double nz = 0;
        for (double x : z) nz += x * x;
        CHECK(nz == doctest::Approx(1.0).epsilon(1e-12));
        auto m = rp2q::to_matrix(z);
        CHECK(m[0] + m[4] + m[8] == doctest::Approx(0.0).epsilon(1e-12));
        // Frobenius norm of the matrix equals the Euclidean norm in R^5.
        double fm = 0;
        for (double x : m) fm += x * x;
        CHECK(fm == doctest::Approx(1.0).epsilon(1e-12));
        auto d = rp2q::director(z);
        double len = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        double cosang = (d[0] * v[0] + d[1] * v[1] + d[2] * v[2]) / len;
        CHECK(std::abs(cosang) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(make_target("rp2q")->dist_to_X(std::vector<double>(z.begin(), z.end())) ==
              doctest::Approx(rp2q::kDelta0).epsilon(1e-12));
    }
}

TEST_CASE("retraction is idempotent and lands on N") {
    std::mt19937 rng(2);
    for (const auto& name : {"circle", "sphere3", "rp2q"}) {
        auto t = make_target(name);
        for (int trial = 0; trial < 200; ++trial) {
            auto z = random_point(t->ambient_dim(), rng);
            auto r = t->retract(z);
            auto rr = t->retract(r);
            CHECK(dist(r, rr) < 1e-12);
            CHECK(t->dist_to_X(r) == doctest::Approx(t->delta0()).epsilon(1e-12));
        }
    }
}

TEST_CASE("retraction gradient blows up at most like 1/dist(X)") {
    std::mt19937 rng(3);
    for (const auto& name : {"circle", "rp2q"}) {
        auto t = make_target(name);
        const int m = t->ambient_dim();
        double worst = 0;
        for (int trial = 0; trial < 40; ++trial) {
            auto z = random_point(m, rng, 1.0);
            // March toward X along the ray to the nearest tie point: scale
            // the traceless part down (both X's are cones through 0).
            for (double s : {1.0, 0.1, 0.01, 0.001}) {
                std::vector<double> p(z);
                for (double& v : p) v *= s;
                double h = 1e-4 * t->dist_to_X(p);
                double grad = 0;
                for (int i = 0; i < m; ++i) {
                    auto a = p, b = p;
                    a[i] += h;
                    b[i] -= h;
                    grad = std::max(grad, dist(t->retract(a), t->retract(b)) / (2 * h));
                }
                worst = std::max(worst, grad * t->dist_to_X(p));
            }
        }
        CAPTURE(name);
        CHECK(worst < 5.0);
    }
}

TEST_CASE("loop classification examples") {
    auto c = make_target("circle");
    CHECK(c->classify_loop(std::vector<std::vector<double>>(5, {1.0, 0.0})) == c->group().zero());
    CHECK(c->classify_loop(circle_loop(16, 1)) == c->group().element({1}));
    CHECK(c->classify_loop(circle_loop(16, -2)) == c->group().element({-2}));
    CHECK_THROWS_AS(c->classify_loop(circle_loop(3, 1)), RefineNeeded);

    auto q = make_target("rp2q");
    CHECK(q->classify_loop(director_loop(32, 0.5)) == q->group().element({1}));
    CHECK(q->classify_loop(director_loop(32, 1.0)) == q->group().zero());
    CHECK(q->classify_loop(director_loop(8, 0.0)) == q->group().zero());
    CHECK_THROWS_AS(make_target("sphere3")->classify_loop(circle_loop(4, 1)), InputError);
}

TEST_CASE("loop classes are invariant under rotation, reversal and refinement") {
    auto c = make_target("circle");
    auto q = make_target("rp2q");
    for (int w : {-2, 0, 1, 3}) {
        auto loop = circle_loop(40, w);
        auto base = c->classify_loop(loop);
        std::rotate(loop.begin(), loop.begin() + 7, loop.end());
        CHECK(c->classify_loop(loop) == base);
        std::reverse(loop.begin(), loop.end());
        CHECK(c->classify_loop(loop) == c->group().neg(base));
        CHECK(c->classify_loop(circle_loop(160, w)) == base);
    }
    for (double turns : {0.5, 1.0, 1.5}) {
        auto loop = director_loop(48, turns);
        auto base = q->classify_loop(loop);
        std::rotate(loop.begin(), loop.begin() + 5, loop.end());
        CHECK(q->classify_loop(loop) == base);
        std::reverse(loop.begin(), loop.end());
        CHECK(q->classify_loop(loop) == base);
        CHECK(q->classify_loop(director_loop(192, turns)) == base);
    }
}

TEST_CASE("perturbations below 0.4 delta0 keep the class") {
    std::mt19937 rng(4);
    for (const auto& [name, loop] : {std::pair{"circle", circle_loop(64, 2)}, std::pair{"rp2q", director_loop(64, 1.5)}}) {
        auto t = make_target(name);
        auto base = t->classify_loop(loop);
        for (int trial = 0; trial < 50; ++trial) {
            auto moved = loop;
            for (auto& p : moved) {
                auto d = random_point(t->ambient_dim(), rng, 1.0);
                double len = std::sqrt(std::inner_product(d.begin(), d.end(), d.begin(), 0.0));
                double r = 0.4 * t->delta0() * std::uniform_real_distribution<double>(0, 0.999)(rng);
                for (std::size_t i = 0; i < p.size(); ++i) p[i] += d[i] / len * r;
                p = t->retract(p);
            }
            CHECK(t->classify_loop(moved) == base);
        }
    }
}

TEST_CASE("path transitions add up to loop classes") {
    auto c = make_target("circle");
    // Straight segments around a square enclosing the origin.
    std::vector<std::array<double, 2>> corners{{1, -1}, {1, 1}, {-1, 1}, {-1, -1}};
    double total = 0;
    for (int i = 0; i < 4; ++i) {
        auto a = corners[i], b = corners[(i + 1) % 4];
        total += c->path_transition([&](double t, std::span<double> out) {
            out[0] = a[0] + t * (b[0] - a[0]);
            out[1] = a[1] + t * (b[1] - a[1]);
        });
    }
    CHECK(c->class_of(total) == c->group().element({1}));

    auto q = make_target("rp2q");
    double flip = q->path_transition([&](double t, std::span<double> out) {
        double th = t * std::numbers::pi / 2;
        auto z = rp2q::embed({std::cos(th), std::sin(th), 0});
        std::copy(z.begin(), z.end(), out.begin());
    });
    double back = q->path_transition([&](double t, std::span<double> out) {
        double th = std::numbers::pi / 2 + t * std::numbers::pi / 2;
        auto z = rp2q::embed({std::cos(th), std::sin(th), 0});
        std::copy(z.begin(), z.end(), out.begin());
    });
    CHECK(q->class_of(flip + back) == q->group().element({1}));
}

TEST_CASE("frozen rp2q delta0 matches a direct minimization") {
    // Points of the tie locus are a (I - 3 w w^T) with a >= 0; by symmetry of
    // Q(e3) only the angle between w and e3 matters.
    auto q3 = rp2q::to_matrix(rp2q::embed({0, 0, 1}));
    auto distance = [&](double a, double th) {
        double w[3] = {std::sin(th), 0, std::cos(th)};
        double s = 0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double m = a * ((i == j ? 1.0 : 0.0) - 3 * w[i] * w[j]);
                s += (q3[3 * i + j] - m) * (q3[3 * i + j] - m);
            }
        return std::sqrt(s);
    };
    double best = 1e9, ba = 0, bt = 0;
    for (int i = 0; i <= 400; ++i)
        for (int j = 0; j <= 400; ++j) {
            double a = 1.0 * i / 400, th = std::numbers::pi / 2 * j / 400;
            double d = distance(a, th);
            if (d < best) {
                best = d;
                ba = a;
                bt = th;
            }
        }
    for (double step = 1e-3; step > 1e-12; step *= 0.5)
        for (int iter = 0; iter < 20; ++iter)
            for (auto [da, dt] : {std::pair{step, 0.0}, {-step, 0.0}, {0.0, step}, {0.0, -step}}) {
                double a = std::max(0.0, ba + da), t = bt + dt;
                double d = distance(a, t);
                if (d < best) {
                    best = d;
                    ba = a;
                    bt = t;
                }
            }
    CHECK(best == doctest::Approx(rp2q::kDelta0).epsilon(1e-9));
}
