#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "flatchain/singular.hpp"

using namespace flatchain;

namespace {

GridSpec square(int n, double half = 1.0) {
    GridSpec g;
    g.dim = 2;
    g.origin = {-half, -half, 0};
    g.spacing = {2 * half / n, 2 * half / n, 1};
    g.counts = {n, n, 1};
    return g;
}

GridSpec cube(int n) {
    GridSpec g;
    g.dim = 3;
    g.origin = {-1, -1, -1};
    g.spacing = {2.0 / n, 2.0 / n, 2.0 / n};
    g.counts = {n, n, n};
    return g;
}

SampledField vortex(const GridSpec& g, double cx, double cy, int sign = 1) {
    return SampledField(g, 2, sample_grid(g, 2, [&](auto x, auto out) {
                            out[0] = x[0] - cx;
                            out[1] = sign * (x[1] - cy);
                        }));
}

std::int64_t total(const Chain& c) { return augmentation(c)[0]; }

}  // namespace

TEST_CASE("vortex has one point of degree one at its center") {
    auto u = vortex(square(16), 0.031, 0.017);
    auto tp = sphere_target(2);
    const auto& t = *tp;
    std::vector<double> y{0, 0};
    auto s = singular_set(u, t, y);
    CHECK(s.backend == Backend::kPreimage);
    REQUIRE(s.chain.size() == 1);
    auto [cell, g] = *s.chain.entries().begin();
    CHECK(g[0] == 1);
    auto p = s.chain.complex().point(cell);
    CHECK(p[0] == doctest::Approx(0.031).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.017).epsilon(1e-12));

    SingularOptions link;
    link.backend = Backend::kLink;
    auto l = singular_set(u, t, y, link);
    CHECK(l.dual_chain == s.dual_chain);
}

TEST_CASE("antivortex has degree minus one and constant fields are empty") {
    auto tp = sphere_target(2);
    const auto& t = *tp;
    std::vector<double> y{0, 0};
    auto s = singular_set(vortex(square(8), 0.11, -0.07, -1), t, y);
    CHECK(total(s.chain) == -1);

    auto g = square(8);
    SampledField c(g, 2, sample_grid(g, 2, [](auto, auto out) {
                       out[0] = 2;
                       out[1] = 0;
                   }));
    CHECK(singular_set(c, t, y).chain.is_zero());
    SingularOptions link;
    link.backend = Backend::kLink;
    CHECK(singular_set(c, t, y, link).chain.is_zero());
}

TEST_CASE("a zero on a grid vertex triggers resampling") {
    auto u = vortex(square(8), 0.0, 0.0);
    std::vector<double> y{0, 0};
    auto s = singular_set(u, *sphere_target(2), y);
    CHECK(s.resamples >= 1);
    CHECK(total(s.chain) == 1);
    SingularOptions strict;
    strict.max_resamples = 0;
    CHECK_THROWS_AS(singular_set(u, *sphere_target(2), y, strict), DegeneracyError);
}

TEST_CASE("three-dimensional vortex line runs along +z and closes up") {
    auto g = cube(6);
    SampledField u(g, 2, sample_grid(g, 2, [](auto x, auto out) {
                       out[0] = x[0] - 0.043;
                       out[1] = x[1] + 0.021;
                   }));
    auto tp = sphere_target(2);
    const auto& t = *tp;
    std::vector<double> y{0, 0};
    auto s = singular_set(u, t, y);
    REQUIRE(s.chain.dim() == 1);
    CHECK(interior_boundary(s).is_zero());
    double dz = 0;
    for (const auto& [e, coef] : s.chain.entries()) {
        auto ends = s.chain.complex().cell(1, e);
        double step = coef[0] * (s.chain.complex().point(ends[1])[2] - s.chain.complex().point(ends[0])[2]);
        CHECK(step > 0);
        dz += step;
    }
    CHECK(dz == doctest::Approx(2.0));
    CHECK(mass(s.chain) == doctest::Approx(2.0));

    SingularOptions link;
    link.backend = Backend::kLink;
    CHECK(singular_set(u, t, y, link).dual_chain == s.dual_chain);

    // Cutting at z < 0 leaves one interior end with multiplicity +1.
    const auto& cx = s.chain.complex();
    auto bd = singular_boundary(s, [&cx](int k, int id) { return cx.barycenter(k, id)[2] < 0; });
    int interior_points = 0;
    for (const auto& [v, coef] : bd.entries())
        if (!cx.on_boundary(0, v)) {
            ++interior_points;
            CHECK(coef[0] == 1);
        }
    CHECK(interior_points == 1);
}

TEST_CASE("random three-dimensional fields satisfy the cycle law in both backends") {
    std::mt19937 rng(11);
    std::normal_distribution<double> gauss;
    auto g = cube(4);
    auto tp = sphere_target(2);
    const auto& t = *tp;
    SingularOptions link;
    link.backend = Backend::kLink;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> vals(g.num_vertices() * 2);
        for (double& v : vals) v = gauss(rng);
        SampledField u(g, 2, vals);
        std::vector<double> y{0.3 * gauss(rng), 0.3 * gauss(rng)};
        auto s = singular_set(u, t, y);
        CHECK(interior_boundary(s).is_zero());
        auto l = singular_set(u, t, y, link);
        CHECK(l.dual_chain == s.dual_chain);
        // The dual chain of the link backend closes up away from the boundary.
        const auto& mesh = *u.mesh();
        auto bd = boundary(l.dual_chain);
        for (const auto& [dv, coef] : bd.entries()) CHECK_FALSE(mesh.interior_vertex(dv));
    }
}

TEST_CASE("link backend matches the preimage backend on random planar fields") {
    std::mt19937 rng(5);
    std::normal_distribution<double> gauss;
    auto g = square(6);
    auto tp = sphere_target(2);
    const auto& t = *tp;
    SingularOptions link;
    link.backend = Backend::kLink;
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<double> vals(g.num_vertices() * 2);
        for (double& v : vals) v = gauss(rng);
        SampledField u(g, 2, vals);
        std::vector<double> y{0.5 * gauss(rng), 0.5 * gauss(rng)};
        CHECK(singular_set(u, t, y, link).dual_chain == singular_set(u, t, y).dual_chain);
    }
}

TEST_CASE("circle fast paths agree with generic path transitions") {
    std::mt19937 rng(23);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> angle(0, 2 * std::numbers::pi);
    auto g = square(3);
    auto tp = sphere_target(2);
    const auto& t = *tp;
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> vals;
        for (std::size_t v = 0; v < g.num_vertices(); ++v) {
            double a = angle(rng);
            vals.push_back(std::cos(a));
            vals.push_back(std::sin(a));
        }
        SampledField u(g, 2, vals);
        std::vector<double> y{0.6 * gauss(rng), 0.6 * gauss(rng)};
        for (bool nv : {false, true}) {
            auto fast = edge_transitions(u, t, y, nv);
            for (std::size_t e = 0; e < fast.size(); ++e) {
                auto ends = u.complex().cell(1, static_cast<int>(e));
                auto a = u.value(ends[0]);
                auto b = u.value(ends[1]);
                double slow = t.path_transition([&](double s, std::span<double> z) {
                    std::vector<double> p{(1 - s) * a[0] + s * b[0], (1 - s) * a[1] + s * b[1]};
                    if (nv) p = t.retract(p);
                    z[0] = p[0] - y[0];
                    z[1] = p[1] - y[1];
                });
                CHECK(fast[e] == doctest::Approx(slow).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("half-disclination pair in a nematic field") {
    auto g = square(16);
    const double ax = -0.42, ay = 0.03, bx = 0.39, by = -0.05;
    SampledField u(g, 5, sample_grid(g, 5, [&](auto x, auto out) {
                       double th = std::atan2(x[1] - ay, x[0] - ax) - std::atan2(x[1] - by, x[0] - bx);
                       std::array<double, 3> n{std::cos(th / 2), std::sin(th / 2), 0};
                       auto q = rp2q::embed(n);
                       std::copy(q.begin(), q.end(), out.begin());
                   }));
    auto tp = rp2q_target();
    const auto& t = *tp;
    CHECK(field_is_n_valued(u, t));
    std::vector<double> y{0, 0, 0, 0, 0};
    auto s = singular_set(u, t, y);
    CHECK(s.backend == Backend::kLink);
    CHECK(s.n_valued);
    REQUIRE(s.chain.size() == 2);
    for (const auto& [dv, coef] : s.chain.entries()) {
        CHECK(coef[0] == 1);
        auto p = s.chain.complex().point(dv);
        CHECK(std::min(std::hypot(p[0] - ax, p[1] - ay), std::hypot(p[0] - bx, p[1] - by)) < 0.2);
    }
    McOptions mc;
    mc.samples = 40;
    auto r = n_valued_stability(u, t, mc);
    for (const auto& [i, yy] : r.mismatches) MESSAGE(i, " ", yy[0], " ", yy[1], " ", yy[2], " ", yy[3], " ", yy[4]);
    CHECK(r.identical);
    CHECK(r.loop_classes_agree);
    CHECK(r.defect_cells == 2);
}

TEST_CASE("hedgehog in three dimensions") {
    auto g = cube(4);
    SampledField u(g, 3, sample_grid(g, 3, [](auto x, auto out) {
                       out[0] = x[0] - 0.07;
                       out[1] = x[1] + 0.05;
                       out[2] = x[2] - 0.03;
                   }));
    auto tp = sphere_target(3);
    const auto& t = *tp;
    std::vector<double> y{0, 0, 0};
    auto s = singular_set(u, t, y);
    CHECK(total(s.chain) == 1);
    CHECK(boundary_degree(u, t) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("averaged Jacobian count recovers the boundary degree") {
    // |u| = 1 on the boundary, so the signed image area is pi times the degree.
    auto g = square(12);
    SampledField u(g, 2, sample_grid(g, 2, [](auto x, auto out) {
                       double dx = x[0] - 0.031, dy = x[1] - 0.017;
                       double r = std::max(std::hypot(dx, dy), 0.5);
                       out[0] = dx / r;
                       out[1] = dy / r;
                   }));
    auto tp = sphere_target(2);
    const auto& t = *tp;
    McOptions mc;
    mc.samples = 400;
    auto r = jacobian_integral_check(u, t, mc);
    CHECK(r.boundary_degree == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.degenerate_samples == 0);
    CHECK(std::abs(r.estimate - 1.0) < 4 * r.standard_error + 0.05);
    // Fixed seed gives a reproducible estimate, independent of threads.
    mc.threads = 2;
    CHECK(jacobian_integral_check(u, t, mc).estimate == r.estimate);
}

TEST_CASE("homotopy cobordism connects moved vortices") {
    auto g = square(10);
    auto u0 = vortex(g, -0.31, 0.12);
    auto u1 = vortex(g, 0.43, -0.22);
    auto tp = sphere_target(2);
    const auto& t = *tp;
    std::vector<double> y{0.01, -0.02};
    auto c = homotopy_cobordism(u0, u1, t, y);
    CHECK(c.verified);
    CHECK(c.ends.size() == 2);
    CHECK(total(c.ends) == 0);
    CHECK(mass(c.chain) > 0.7);
}

TEST_CASE("mass and continuity reports are finite and consistent") {
    auto g = square(8);
    auto u0 = vortex(g, 0.05, 0.02);
    auto u1 = vortex(g, 0.12, 0.02);
    auto tp = sphere_target(2);
    const auto& t = *tp;
    McOptions mc;
    mc.samples = 60;
    auto m = mass_coarea_report(u0, t, mc);
    CHECK(m.gradient_norm == doctest::Approx(8.0));
    CHECK(m.ratio > 0);
    auto same = continuity_report(u0, u0, t, mc);
    CHECK(same.flat_integral == 0);
    auto moved = continuity_report(u0, u1, t, mc);
    CHECK(moved.flat_integral > 0);
    CHECK(moved.inexact_samples == 0);
    CHECK(moved.ratio < 2.0);
}
