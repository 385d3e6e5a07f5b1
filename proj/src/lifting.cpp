#include "flatchain/lifting.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

#include <Eigen/Dense>

#include "flatchain/flatnorm.hpp"
#include "flatchain/rng.hpp"

namespace flatchain {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

void require_planar_circle(const SampledField& u) {
    if (u.dim() != 2 || u.m() != 2) throw InputError("lifting is implemented for circle-valued fields on planar grids");
}

Chain interior_part(const Chain& c, const DualComplex& mesh) {
    return restrict(c, [&mesh](int, int v) { return mesh.interior_vertex(v); });
}

// Least-mass dual 1-chain whose boundary equals S on interior dual vertices.
Chain minimal_cut(const DualComplex& mesh, const Chain& s) {
    const Complex& dual = *mesh.dual;
    DecompositionProblem p;
    p.rows = static_cast<int>(dual.num_vertices());
    p.target.assign(p.rows, 0);
    for (const auto& [v, g] : s.entries()) p.target[v] = g[0];
    double total = 1;
    for (std::size_t e = 0; e < dual.num_cells(1); ++e) {
        auto ends = dual.cell(1, static_cast<int>(e));
        p.columns.push_back({{ends[1], 1}, {ends[0], -1}});
        p.p_cost.push_back(dual.volume(1, static_cast<int>(e)));
        total += p.p_cost.back();
    }
    // Interior residue is forbidden by a cost above any cut; the boundary
    // absorbs the rest for free.
    for (int v = 0; v < p.rows; ++v) p.q_cost.push_back(mesh.interior_vertex(v) ? 1e3 * total : 0.0);
    auto r = solve_integer_decomposition(p);
    for (int v = 0; v < p.rows; ++v)
        if (mesh.interior_vertex(v) && r.q[v] != 0) throw Error("internal: minimal cut left interior residue");
    Chain out(mesh.dual, 1, s.group());
    for (std::size_t e = 0; e < r.p.size(); ++e)
        if (r.p[e] != 0) out.accumulate(static_cast<int>(e), s.group().element({r.p[e]}));
    return out;
}

}  // namespace

Chain cut_chain(const SampledField& u, const SingularChain& s, bool minimize) {
    require_planar_circle(u);
    const auto& mesh = *u.mesh();
    const auto& g = s.dual_chain.group();
    if (s.dual_chain.complex_ptr() != mesh.dual) throw InputError("singular chain does not belong to this field");
    if (s.dual_chain.dim() != 0) throw InputError("planar cuts need a point singular set");
    Chain target = interior_part(s.dual_chain, mesh);
    if (target.is_zero()) return Chain(mesh.dual, 1, g);
    if (minimize) return minimal_cut(mesh, target);

    // Straight homotopy to the constant (Lambda + 1, 0): the cut is where u
    // points along the negative x axis.
    std::vector<double> cvals;
    for (std::size_t v = 0; v < u.complex().num_vertices(); ++v) {
        cvals.push_back(u.sup_norm() + 1);
        cvals.push_back(0.0);
    }
    SampledField constant(u.mesh(), 2, std::move(cvals));
    auto prism = homotopy_prism(u, constant);
    const Complex& pc = prism.complex();
    const auto& pmesh = *prism.mesh();
    const Complex& cx = u.complex();
    const auto nv2 = static_cast<int>(cx.num_vertices());
    auto circle = sphere_target(2);
    auto rng = task_rng(0xc07, 0);

    for (int attempt = 0; attempt <= 8; ++attempt) {
        std::vector<double> y = s.y;
        if (attempt > 0) {
            auto j = sample_ball(2, 1e-6, rng);
            y[0] += j[0];
            y[1] += j[1];
        }
        SingularOptions opt;
        opt.backend = Backend::kPreimage;
        opt.max_resamples = 0;
        std::optional<SingularChain> ps;
        try {
            ps = singular_set(prism, *circle, y, opt);
        } catch (const DegeneracyError&) {
            continue;
        }
        Chain r(mesh.dual, 1, g);
        for (const auto& [edge3, coef] : ps->dual_chain.entries()) {
            const int f = pmesh.facet_of_edge[edge3];
            auto tri = pc.cell(2, f);
            std::array<int, 3> flat{tri[0] % nv2, tri[1] % nv2, tri[2] % nv2};
            std::vector<int> distinct(flat.begin(), flat.end());
            std::sort(distinct.begin(), distinct.end());
            distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
            if (distinct.size() != 2) continue;  // face inside a prism column
            auto e = cx.find(1, distinct);
            if (!e) throw Error("internal: vertical prism face over a non-edge");
            const int de = mesh.edge_of_facet[e->first];
            auto dends = mesh.dual->cell(1, de);
            auto da = mesh.dual->point(dends[0]);
            auto db = mesh.dual->point(dends[1]);
            Eigen::Matrix3d frame;
            frame.col(0) << db[0] - da[0], db[1] - da[1], 0;
            for (int k = 0; k < 2; ++k)
                for (int i = 0; i < 3; ++i) frame(i, k + 1) = pc.point(tri[k + 1])[i] - pc.point(tri[0])[i];
            // The prism's dual edge through f points along the horizontal
            // normal; its coefficient, transported to the planar dual edge,
            // changes sign when the two disagree. dR then equals -S(u).
            int sign = frame.determinant() > 0 ? -1 : 1;
            r.accumulate(de, g.scale(sign, coef));
        }
        if (interior_part(boundary(r), mesh) == target) return r;
    }
    throw DegeneracyError("cobordism cut did not reproduce the singular set");
}

LiftedField lift_circle_field(const SampledField& u, const Chain& cut) {
    require_planar_circle(u);
    const auto& mesh = *u.mesh();
    const Complex& cx = u.complex();
    if (cut.complex_ptr() != mesh.dual || cut.dim() != 1) throw InputError("cut must be a dual 1-chain of the field's grid");
    auto circle = sphere_target(2);
    std::vector<double> zero{0, 0};
    auto trans = edge_transitions(u, *circle, zero, false);

    LiftedField out{{}, cut, std::vector<std::int64_t>(cx.num_cells(1), 0), {}};
    for (std::size_t e = 0; e < cx.num_cells(1); ++e) out.jumps[e] = cut.coefficient(mesh.edge_of_facet[e])[0];
    auto step = [&](std::size_t e) { return trans[e] + kTwoPi * static_cast<double>(out.jumps[e]); };

    for (std::size_t t = 0; t < cx.num_cells(2); ++t) {
        double h = 0;
        for (const auto& inc : cx.boundary_incidence(2, static_cast<int>(t))) h += inc.sign * step(inc.facet);
        if (std::abs(h) > 1e-6)
            throw Error("holonomy around triangle " + std::to_string(t) + " is " + std::to_string(h / kTwoPi) +
                        " turns: the cut's boundary differs from the singular set");
    }

    // Lexicographic BFS from vertex 0.
    const std::size_t nv = cx.num_vertices();
    std::vector<double> theta(nv, 0);
    std::vector<char> seen(nv, 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    theta[0] = std::atan2(u.value(0)[1], u.value(0)[0]);
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        std::vector<Incidence> edges = cx.cofaces(0, v);
        std::sort(edges.begin(), edges.end(), [](const Incidence& a, const Incidence& b) { return a.facet < b.facet; });
        for (const auto& inc : edges) {
            auto ends = cx.cell(1, inc.facet);
            int w = ends[0] == v ? ends[1] : ends[0];
            if (seen[w]) continue;
            seen[w] = 1;
            theta[w] = theta[v] + (ends[0] == v ? 1 : -1) * step(inc.facet);
            queue.push_back(w);
        }
    }
    LiftReport& rep = out.report;
    for (std::size_t e = 0; e < cx.num_cells(1); ++e) {
        auto ends = cx.cell(1, static_cast<int>(e));
        double err = theta[ends[1]] - theta[ends[0]] - step(e);
        if (std::abs(err) > 1e-9 * (1 + std::abs(theta[ends[0]]))) rep.holonomy_consistent = false;
    }
    if (!rep.holonomy_consistent) throw Error("internal: co-tree edge disagrees with the spanning-tree phases");

    for (std::size_t v = 0; v < nv; ++v) {
        auto z = u.value(v);
        double r = std::hypot(z[0], z[1]);
        rep.max_projection_error = std::max(
            rep.max_projection_error, std::hypot(std::cos(theta[v]) - z[0] / r, std::sin(theta[v]) - z[1] / r));
    }
    // Absolutely continuous part: phases continued inside each triangle
    // without jumps.
    for (std::size_t t = 0; t < cx.num_cells(2); ++t) {
        auto tri = cx.cell(2, static_cast<int>(t));
        Eigen::Matrix2d e;
        Eigen::RowVector2d dphi;
        for (int i = 0; i < 2; ++i) {
            std::array<int, 2> pair{tri[0], tri[i + 1]};
            auto found = cx.find(1, pair);
            dphi(i) = found->second * trans[found->first];
            for (int c = 0; c < 2; ++c) e(c, i) = cx.point(tri[i + 1])[c] - cx.point(tri[0])[c];
        }
        rep.theta_variation += cx.volume(2, static_cast<int>(t)) * (dphi * e.inverse()).norm();
    }
    rep.cut_mass = mass(cut);
    rep.jump_variation = kTwoPi * rep.cut_mass;
    rep.total_variation = rep.theta_variation + rep.jump_variation;
    rep.du_variation = u.gradient_norm_power(1);
    rep.ratio = rep.du_variation > 0 ? rep.total_variation / rep.du_variation : 0.0;
    out.theta = std::move(theta);
    return out;
}

LiftedField lift_circle_field(const SampledField& u, bool minimize_cut) {
    require_planar_circle(u);
    auto circle = sphere_target(2);
    SingularOptions opt;
    opt.backend = Backend::kLink;
    opt.n_valued = false;
    opt.max_resamples = 0;
    std::vector<double> zero{0, 0};
    auto s = singular_set(u, *circle, zero, opt);
    return lift_circle_field(u, cut_chain(u, s, minimize_cut));
}

nlohmann::json LiftReport::to_json() const {
    return {{"theta_variation", theta_variation},
            {"jump_variation", jump_variation},
            {"total_variation", total_variation},
            {"du_variation", du_variation},
            {"ratio", ratio},
            {"cut_mass", cut_mass},
            {"max_projection_error", max_projection_error},
            {"holonomy_consistent", holonomy_consistent}};
}

}  // namespace flatchain
