#include <doctest.h>

#include <random>

#include "flatchain/error.hpp"
#include "flatchain/flatnorm.hpp"

using namespace flatchain;

namespace {

std::shared_ptr<const Complex> grid(int nx, int ny, double h = 1.0) {
    GridSpec g;
    g.dim = 2;
    g.spacing = {h, h, 1};
    g.counts = {nx, ny, 1};
    return build_grid_complex(g);
}

std::shared_ptr<const Complex> tetrahedron() {
    ComplexBuilder b(3);
    std::array<double, 3> pts[4] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (auto& p : pts) b.add_vertex(p);
    std::array<int, 4> t{0, 1, 2, 3};
    b.add_cell(t);
    return b.build();
}

Chain square_boundary(std::shared_ptr<const Complex> c, const CoefficientGroup& g) {
    Chain sq(c, 2, g);
    for (std::size_t t = 0; t < c->num_cells(2); ++t)
        sq.accumulate(static_cast<int>(t), g.scale(c->orientation(2, static_cast<int>(t)), g.unit(0)));
    return boundary(sq);
}

Chain random_chain(std::shared_ptr<const Complex> c, int dim, const CoefficientGroup& g, std::mt19937& rng,
                   int bound = 2, double density = 0.5) {
    Chain s(c, dim, g);
    std::bernoulli_distribution use(density);
    std::uniform_int_distribution<int> coef(-bound, bound);
    for (std::size_t id = 0; id < c->num_cells(dim); ++id) {
        if (!use(rng)) continue;
        std::vector<std::int64_t> comps;
        for (std::size_t i = 0; i < g.arity(); ++i) comps.push_back(coef(rng));
        s.accumulate(static_cast<int>(id), g.element(comps));
    }
    return s;
}

void check_witness(const Chain& s, const FlatDecomposition& d) {
    CHECK(boundary(d.P) + d.Q == s);
    CHECK(d.value == doctest::Approx(mass(d.P) + mass(d.Q)).epsilon(1e-12));
}

}  // namespace

TEST_CASE("flat norm examples") {
    auto c = grid(1, 1);
    auto z = CoefficientGroup::integers();
    auto zero = flat_norm(Chain(c, 1, z));
    CHECK(zero.value == 0);
    CHECK(zero.P.is_zero());
    CHECK(zero.Q.is_zero());

    auto s = square_boundary(c, z);
    auto d = flat_norm(s);
    CHECK(d.value == doctest::Approx(1.0));
    CHECK(d.Q.is_zero());
    CHECK(d.exactness == Exactness::kExact);
    check_witness(s, d);
    CHECK(flat_norm_oracle(s, 2).value == doctest::Approx(1.0));

    auto z2 = CoefficientGroup::cyclic(2);
    auto s2 = square_boundary(c, z2);
    CHECK(flat_norm(s2).value == doctest::Approx(1.0));
    CHECK(flat_norm_oracle(s2, 0).value == doctest::Approx(1.0));
}

TEST_CASE("flat norm of a close point pair is the connecting edge") {
    const double h = 0.25;
    auto c = grid(3, 3, h);
    auto z = CoefficientGroup::integers();
    Chain pts(c, 0, z);
    pts.accumulate(5, z.element({1}));
    pts.accumulate(6, z.element({-1}));
    auto d = flat_norm(pts);
    CHECK(d.value == doctest::Approx(h));
    CHECK(d.Q.is_zero());
    CHECK(mass(pts) == doctest::Approx(2.0));
    check_witness(pts, d);
}

TEST_CASE("flat norm needs filling cells") {
    auto c = grid(1, 1);
    CHECK_THROWS_AS(flat_norm(Chain(c, 2, CoefficientGroup::integers())), InputError);
}

TEST_CASE("relative flat norm examples") {
    auto c = grid(1, 1);
    auto z = CoefficientGroup::integers();
    auto s = square_boundary(c, z);
    CellPredicate nowhere = [](int, int) { return false; };
    CHECK(relative_flat_norm(s, nowhere).value == 0);

    // Only the left edge lies in U; the triangle containing it (area 1/2)
    // trades it for the diagonal, which is outside U.
    CellPredicate left = [&](int k, int id) { return c->barycenter(k, id)[0] < 0.5; };
    auto d = relative_flat_norm(s, left);
    CHECK(d.value == doctest::Approx(0.5));
    CHECK(boundary(d.P) + d.Q == s);
    CHECK(flat_norm_oracle(s, 2, left).value == doctest::Approx(0.5));
    CHECK(d.value <= flat_norm(s).value + 1e-12);
}

TEST_CASE("main solver matches the oracle on small complexes") {
    std::mt19937 rng(21);
    auto square = grid(1, 1);
    auto tet = tetrahedron();
    std::vector<CoefficientGroup> groups{CoefficientGroup::integers(), CoefficientGroup::cyclic(2),
                                         CoefficientGroup::cyclic(3), CoefficientGroup(1, {2})};
    for (const auto& g : groups) {
        for (int trial = 0; trial < 15; ++trial) {
            for (auto [c, dim] : {std::pair{square, 1}, std::pair{square, 0}, std::pair{tet, 2}}) {
                auto s = random_chain(c, dim, g, rng);
                auto fast = flat_norm(s);
                auto slow = flat_norm_oracle(s, 2);
                CAPTURE(g.to_string());
                CAPTURE(dim);
                CHECK(fast.exactness == Exactness::kExact);
                CHECK(fast.value == doctest::Approx(slow.value).epsilon(1e-12));
                check_witness(s, fast);
                check_witness(s, slow);
            }
        }
    }
}

TEST_CASE("nonstandard generators fall back to the oracle") {
    auto c = grid(1, 1);
    CoefficientGroup z6(0, {6}, {GroupElement({2}), GroupElement({3})});
    Chain s(c, 1, z6);
    s.accumulate(0, z6.element({1}));
    auto d = flat_norm(s);
    CHECK(d.exactness == Exactness::kExact);
    CHECK(d.value == doctest::Approx(flat_norm_oracle(s, 0).value));
}

TEST_CASE("oracle size cap") {
    auto c = grid(2, 2);
    CHECK_THROWS_AS(flat_norm_oracle(Chain(c, 1, CoefficientGroup::integers()), 1), CapExceededError);
}

TEST_CASE("flat norm is a norm") {
    std::mt19937 rng(8);
    auto c = grid(3, 3, 0.5);
    for (const auto& g : {CoefficientGroup::integers(), CoefficientGroup::cyclic(2)}) {
        for (int trial = 0; trial < 10; ++trial) {
            auto s = random_chain(c, 1, g, rng, 1, 0.3);
            auto t = random_chain(c, 1, g, rng, 1, 0.3);
            double fs = flat_norm(s).value, ft = flat_norm(t).value;
            CHECK(fs <= mass(s) + 1e-12);
            CHECK(flat_norm(s + t).value <= fs + ft + 1e-9);
            CHECK((fs == 0) == s.is_zero());
            CHECK(flat_norm(-s).value == doctest::Approx(fs));
        }
    }
}

TEST_CASE("boundaries are cheap") {
    std::mt19937 rng(13);
    auto c = grid(3, 3, 0.5);
    auto z = CoefficientGroup::integers();
    for (int trial = 0; trial < 10; ++trial) {
        auto p = random_chain(c, 2, z, rng, 2, 0.4);
        CHECK(flat_norm(boundary(p)).value <= mass(p) + 1e-9);
    }
}

TEST_CASE("relative norm is monotone in the region") {
    std::mt19937 rng(17);
    auto c = grid(4, 4, 0.25);
    auto z = CoefficientGroup::integers();
    auto in_box = [c](double lo, double hi) {
        return CellPredicate([c, lo, hi](int k, int id) {
            auto b = c->barycenter(k, id);
            return b[0] > lo && b[0] < hi && b[1] > lo && b[1] < hi;
        });
    };
    auto small = in_box(0.3, 0.7), large = in_box(0.1, 0.9);
    for (int trial = 0; trial < 10; ++trial) {
        auto s = random_chain(c, 1, z, rng, 1, 0.3);
        double a = relative_flat_norm(s, small).value;
        double b = relative_flat_norm(s, large).value;
        CHECK(a <= b + 1e-9);
        CHECK(b <= flat_norm(s).value + 1e-9);
    }
}

TEST_CASE("localization inequality on grid instances") {
    // U = (1/8, 7/8)^2, H = (3/8, 5/8)^2, dist(H, dU) = 1/4.
    std::mt19937 rng(29);
    auto c = grid(8, 8, 0.125);
    auto z = CoefficientGroup::integers();
    auto in_box = [c](double lo, double hi) {
        return CellPredicate([c, lo, hi](int k, int id) {
            auto b = c->barycenter(k, id);
            return b[0] > lo && b[0] < hi && b[1] > lo && b[1] < hi;
        });
    };
    auto u = in_box(0.125, 0.875), hset = in_box(0.375, 0.625);
    auto u_minus_h = CellPredicate([&](int k, int id) { return u(k, id) && !hset(k, id); });
    for (int trial = 0; trial < 6; ++trial) {
        auto t = random_chain(c, 1, z, rng, 1, 0.15);
        double lhs = flat_norm(restrict(t, hset)).value;
        double rhs = (1 + 1 / 0.25) * relative_flat_norm(t, u).value + mass(restrict(t, u_minus_h));
        CHECK(lhs <= rhs + 1e-9);
    }
}

TEST_CASE("staircases converge in the flat norm") {
    // Staircase approximations of the diagonal of [0,1]^2 with 2^j steps
    // have bounded mass and boundary; successive flat distances shrink.
    auto c = grid(8, 8, 0.125);
    auto z = CoefficientGroup::integers();
    auto staircase = [&](int steps) {
        Chain s(c, 1, z);
        int stride = 8 / steps;
        for (int i = 0; i < steps; ++i) {
            for (int k = 0; k < stride; ++k) {
                int x = i * stride + k, y = i * stride;
                std::array<int, 2> e{y * 9 + x, y * 9 + x + 1};
                s.accumulate_oriented(e, z.element({1}));
            }
            for (int k = 0; k < stride; ++k) {
                int x = (i + 1) * stride, y = i * stride + k;
                std::array<int, 2> e{y * 9 + x, (y + 1) * 9 + x};
                s.accumulate_oriented(e, z.element({1}));
            }
        }
        return s;
    };
    std::vector<Chain> seq;
    for (int steps : {1, 2, 4, 8}) seq.push_back(staircase(steps));
    for (const auto& s : seq) {
        CHECK(mass(s) == doctest::Approx(2.0));
        CHECK(mass(boundary(s)) == doctest::Approx(2.0));
    }
    std::vector<double> dist;
    for (std::size_t j = 0; j + 1 < seq.size(); ++j) dist.push_back(flat_norm(seq[j] - seq[j + 1]).value);
    for (std::size_t j = 0; j + 1 < dist.size(); ++j) CHECK(dist[j + 1] < dist[j]);
    CHECK(dist.back() <= 0.0625 + 1e-9);
    CHECK(flat_norm(seq[1] - seq[3]).value <= dist[1] + dist[2] + 1e-9);
}

TEST_CASE("integer decomposition beyond the node budget reports a bound") {
    auto c = grid(3, 3, 0.5);
    auto z = CoefficientGroup::integers();
    std::mt19937 rng(2);
    auto s = random_chain(c, 1, z, rng, 2, 0.6);
    FlatOptions tight;
    tight.max_lp_entries = 1;
    auto d = flat_norm(s, tight);
    CHECK(d.exactness == Exactness::kUpperBound);
    CHECK(d.value == doctest::Approx(mass(s)));
    auto full = flat_norm(s);
    CHECK(full.lower_bound == doctest::Approx(full.value));
}

TEST_CASE("point chains: transport solver agrees with the LP") {
    // The extra three-entry column makes the problem non-graphical, forcing
    // the LP path; its cost is prohibitive so the optimum is unchanged.
    std::mt19937 rng(31);
    auto c = grid(3, 3, 0.5);
    for (int trial = 0; trial < 20; ++trial) {
        DecompositionProblem pr;
        pr.rows = static_cast<int>(c->num_cells(0));
        for (std::size_t e = 0; e < c->num_cells(1); ++e) {
            std::vector<std::pair<int, int>> col;
            for (const auto& inc : c->boundary_incidence(1, static_cast<int>(e))) col.emplace_back(inc.facet, inc.sign);
            pr.columns.push_back(col);
            pr.p_cost.push_back(c->volume(1, static_cast<int>(e)));
        }
        std::uniform_int_distribution<int> coef(-2, 2);
        std::bernoulli_distribution free_vertex(0.2);
        for (int r = 0; r < pr.rows; ++r) {
            pr.target.push_back(coef(rng) * (trial % 2 == 0 || r % 3 == 0));
            pr.q_cost.push_back(free_vertex(rng) ? 0.0 : 1.0);
        }
        auto graph = solve_integer_decomposition(pr);
        auto forced = pr;
        forced.columns.push_back({{0, 1}, {1, 1}, {2, 1}});
        forced.p_cost.push_back(1e6);
        auto lp = solve_integer_decomposition(forced);
        CHECK(graph.exactness == Exactness::kExact);
        CHECK(lp.exactness == Exactness::kExact);
        CHECK(graph.value == doctest::Approx(lp.value).epsilon(1e-12));
        std::vector<std::int64_t> q;
        CHECK(graph.value == doctest::Approx(evaluate_decomposition(pr, graph.p, q)).epsilon(1e-12));
        CHECK(q == graph.q);
    }
}
