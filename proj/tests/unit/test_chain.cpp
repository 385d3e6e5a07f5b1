#include <doctest.h>

#include <random>

#include "flatchain/chain.hpp"
#include "flatchain/error.hpp"

using namespace flatchain;

namespace {

std::shared_ptr<const Complex> grid(int nx, int ny, double hx = 1.0, double hy = 1.0) {
    GridSpec g;
    g.dim = 2;
    g.spacing = {hx, hy, 1};
    g.counts = {nx, ny, 1};
    return build_grid_complex(g);
}

std::shared_ptr<const Complex> grid3(int n) {
    GridSpec g;
    g.dim = 3;
    g.counts = {n, n, n};
    return build_grid_complex(g);
}

Chain random_chain(std::shared_ptr<const Complex> c, int dim, const CoefficientGroup& g, std::mt19937& rng,
                   double density = 0.4) {
    Chain s(c, dim, g);
    std::bernoulli_distribution use(density);
    std::uniform_int_distribution<int> coef(-3, 3);
    for (std::size_t id = 0; id < c->num_cells(dim); ++id) {
        if (!use(rng)) continue;
        std::vector<std::int64_t> comps;
        for (std::size_t i = 0; i < g.arity(); ++i) comps.push_back(coef(rng));
        s.accumulate(static_cast<int>(id), g.element(comps));
    }
    return s;
}

int edge_between(const Complex& c, int a, int b) {
    std::array<int, 2> t{a, b};
    return c.find(1, t)->first;
}

}  // namespace

TEST_CASE("boundary examples") {
    auto c = grid(1, 1);
    auto z = CoefficientGroup::integers();
    Chain tri(c, 2, z);
    tri.accumulate(0, z.element({1}));
    auto b = boundary(tri);
    CHECK(b.size() == 3);
    for (const auto& inc : c->boundary_incidence(2, 0)) CHECK(b.coefficient(inc.facet) == z.element({inc.sign}));
    CHECK(boundary(b).is_zero());

    auto z2 = CoefficientGroup::cyclic(2);
    Chain both(c, 2, z2);
    both.accumulate(0, z2.element({1}));
    both.accumulate(1, z2.element({1}));
    auto outer = boundary(both);
    CHECK(outer.size() == 4);
    int diag = edge_between(*c, 0, 3);
    CHECK(outer.coefficient(diag).is_zero());
    CHECK_THROWS_AS(boundary(Chain(c, 0, z)), InputError);
}

TEST_CASE("boundary is a homomorphism with square zero") {
    std::mt19937 rng(11);
    auto c2 = grid(3, 3);
    auto c3 = grid3(2);
    for (const auto& g : {CoefficientGroup::integers(), CoefficientGroup::cyclic(2), CoefficientGroup(1, {3})}) {
        for (int trial = 0; trial < 20; ++trial) {
            for (auto [c, dim] : {std::pair{c2, 2}, std::pair{c3, 3}, std::pair{c3, 2}}) {
                auto s = random_chain(c, dim, g, rng);
                auto t = random_chain(c, dim, g, rng);
                CHECK(boundary(boundary(s)).is_zero());
                CHECK(boundary(s + t) == boundary(s) + boundary(t));
            }
        }
    }
}

TEST_CASE("mass examples") {
    auto c = grid(1, 1);
    auto z = CoefficientGroup::integers();
    CHECK(mass(Chain(c, 1, z)) == 0);
    Chain e(c, 1, z);
    e.accumulate(edge_between(*c, 0, 1), z.element({1}));
    CHECK(mass(e) == doctest::Approx(1.0));
    CoefficientGroup zz2(1, {2});
    Chain sq(c, 2, zz2);
    sq.accumulate(0, zz2.element({1, 1}));
    sq.accumulate(1, zz2.element({1, 1}));
    CHECK(mass(sq) == doctest::Approx(2.0));
}

TEST_CASE("chains form a group and mass is a norm") {
    std::mt19937 rng(5);
    auto c = grid(3, 2);
    for (const auto& g : {CoefficientGroup::integers(), CoefficientGroup(0, {2, 3})}) {
        for (int trial = 0; trial < 50; ++trial) {
            auto s = random_chain(c, 1, g, rng);
            auto t = random_chain(c, 1, g, rng);
            auto u = random_chain(c, 1, g, rng);
            CHECK((s + t) == (t + s));
            CHECK(((s + t) + u) == (s + (t + u)));
            CHECK((s - s).is_zero());
            CHECK((mass(s) == 0) == s.is_zero());
            CHECK(mass(-s) == doctest::Approx(mass(s)));
            CHECK(mass(s + t) <= mass(s) + mass(t) + 1e-12);
        }
    }
}

TEST_CASE("mixing complexes or groups is rejected") {
    auto c = grid(1, 1);
    auto other = grid(1, 1);
    Chain a(c, 1, CoefficientGroup::integers());
    CHECK_THROWS_AS(a + Chain(other, 1, CoefficientGroup::integers()), InputError);
    CHECK_THROWS_AS(a + Chain(c, 1, CoefficientGroup::cyclic(2)), InputError);
    CHECK_THROWS_AS(a + Chain(c, 2, CoefficientGroup::integers()), InputError);
}

TEST_CASE("canonical orientation") {
    auto c = grid(1, 1);
    auto z = CoefficientGroup::integers();
    Chain s(c, 1, z);
    std::array<int, 2> fwd{0, 1}, back{1, 0};
    s.accumulate_oriented(fwd, z.element({2}));
    s.accumulate_oriented(back, z.element({1}));
    CHECK(s.size() == 1);
    CHECK(s.coefficient(edge_between(*c, 0, 1)) == z.element({1}));
}

TEST_CASE("restriction") {
    // Boundary of the box [0,1]^2 on a 2x1 grid with cells of width 1/2.
    auto c = grid(2, 1, 0.5, 1.0);
    auto z = CoefficientGroup::integers();
    Chain box(c, 2, z);
    for (std::size_t t = 0; t < c->num_cells(2); ++t) box.accumulate(static_cast<int>(t), z.element({c->orientation(2, static_cast<int>(t))}));
    auto cycle = boundary(box);
    REQUIRE(cycle.size() == 6);
    CellPredicate right = [&](int k, int id) { return c->barycenter(k, id)[0] > 0.5; };
    CellPredicate left = [&](int k, int id) { return !right(k, id); };
    auto r = restrict(cycle, right);
    CHECK(r.size() == 3);
    for (const auto& [cell, g] : r.entries()) CHECK(c->barycenter(1, cell)[0] > 0.5);
    CHECK(mass(r) + mass(restrict(cycle, left)) == doctest::Approx(mass(cycle)));
    CHECK(restrict(cycle, [](int, int) { return true; }) == cycle);
    CHECK(restrict(cycle, [](int, int) { return false; }).is_zero());
    CHECK(restrict(r, right) == r);
    CHECK(restrict(cycle, right) + restrict(cycle, left) == cycle);
}

TEST_CASE("augmentation") {
    auto c = grid(1, 1);
    CoefficientGroup g(1, {3});
    Chain pts(c, 0, g);
    pts.accumulate(0, g.element({2, 1}));
    pts.accumulate(3, g.element({-5, 1}));
    CHECK(augmentation(pts) == g.element({-3, 2}));
    CHECK_THROWS_AS(augmentation(Chain(c, 1, g)), InputError);
    std::mt19937 rng(3);
    auto big = grid(3, 3);
    for (int trial = 0; trial < 30; ++trial) {
        auto s = random_chain(big, 1, g, rng);
        CHECK(augmentation(boundary(s)).is_zero());
        auto a = random_chain(big, 0, g, rng);
        auto b = random_chain(big, 0, g, rng);
        CHECK(augmentation(a + b) == g.add(augmentation(a), augmentation(b)));
    }
}

TEST_CASE("support") {
    auto c = grid(1, 1);
    auto z2 = CoefficientGroup::cyclic(2);
    CHECK(support(Chain(c, 1, z2))[1].empty());
    Chain e(c, 1, z2);
    e.accumulate(edge_between(*c, 0, 1), z2.element({1}));
    auto se = support(e);
    CHECK(se[1].size() == 1);
    CHECK(se[0] == std::set<int>{0, 1});
    Chain both(c, 2, z2);
    both.accumulate(0, z2.element({1}));
    both.accumulate(1, z2.element({1}));
    auto sb = support(both);
    CHECK(sb[2].size() == 2);
    CHECK(sb[1].size() == 5);
    CHECK(sb[0].size() == 4);
}

TEST_CASE("support distance") {
    auto c = grid(3, 1);
    auto z = CoefficientGroup::integers();
    Chain a(c, 0, z), b(c, 1, z);
    a.accumulate(0, z.element({1}));
    b.accumulate(edge_between(*c, 2, 3), z.element({1}));
    CHECK(support_distance(a, b) == doctest::Approx(2.0));
}

TEST_CASE("chain JSON round trip") {
    std::mt19937 rng(9);
    auto c = grid(2, 2);
    CoefficientGroup g(1, {2});
    for (int trial = 0; trial < 10; ++trial) {
        auto s = random_chain(c, 1, g, rng);
        CHECK(chain_from_json(chain_to_json(s), c) == s);
    }
    auto j = nlohmann::json::parse(R"({"dim":1,"cells":[[0,2],[1,-1]],"group":{"free_rank":1,"torsion":[]}})");
    auto s = chain_from_json(j, c);
    CHECK(s.coefficient(0) == CoefficientGroup::integers().element({2}));
}
