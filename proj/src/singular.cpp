#include "flatchain/singular.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "flatchain/flatnorm.hpp"
#include "flatchain/rng.hpp"

namespace flatchain {

std::string to_string(Backend b) { return b == Backend::kPreimage ? "preimage" : "link"; }

Backend backend_from_string(const std::string& s) {
    if (s == "preimage") return Backend::kPreimage;
    if (s == "link") return Backend::kLink;
    throw InputError("unknown backend '" + s + "' (expected preimage or link)");
}

namespace {

constexpr double kWeightEps = 1e-12;

double det2(double a, double b, double c, double d) { return a * d - b * c; }

double det3(const double* m) {
    // Column-major 3x3.
    return m[0] * (m[4] * m[8] - m[7] * m[5]) - m[3] * (m[1] * m[8] - m[7] * m[2]) + m[6] * (m[1] * m[5] - m[4] * m[2]);
}

struct ZeroHit {
    bool hit = false;
    int sign = 0;
    double w[4] = {0, 0, 0, 0};
};

// Zero of the affine map taking vertex i of a j-simplex to vals[i] - y,
// j == m in {2, 3}. Throws DegeneracyError when the zero sits on the
// simplex boundary (up to kWeightEps in barycentric weight).
ZeroHit simplex_zero(int m, const std::span<const double>* vals, std::span<const double> y) {
    ZeroHit z;
    double a[9], rhs[3], scale = 0;
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) {
            a[j * m + i] = vals[j + 1][i] - vals[0][i];
            scale = std::max(scale, std::abs(a[j * m + i]));
        }
    for (int i = 0; i < m; ++i) rhs[i] = y[i] - vals[0][i];
    if (scale == 0) return z;
    double det = m == 2 ? det2(a[0], a[2], a[1], a[3]) : det3(a);
    if (std::abs(det) <= 1e-14 * std::pow(scale, m)) return z;
    double lam[3];
    for (int c = 0; c < m; ++c) {
        double b[9];
        std::copy(a, a + m * m, b);
        for (int i = 0; i < m; ++i) b[c * m + i] = rhs[i];
        lam[c] = (m == 2 ? det2(b[0], b[2], b[1], b[3]) : det3(b)) / det;
    }
    double w0 = 1;
    for (int c = 0; c < m; ++c) w0 -= lam[c];
    z.w[0] = w0;
    for (int c = 0; c < m; ++c) z.w[c + 1] = lam[c];
    bool inside = true;
    for (int i = 0; i <= m; ++i) {
        if (std::abs(z.w[i]) <= kWeightEps) throw DegeneracyError("zero of u - y on a simplex boundary");
        inside = inside && z.w[i] > 0;
    }
    z.hit = inside;
    z.sign = det > 0 ? 1 : -1;
    return z;
}

SingularChain make_result(const SampledField& u, const TargetManifold& t, Chain chain, Chain dual_chain,
                          std::span<const double> y, Backend backend) {
    SingularChain s{std::move(chain), std::move(dual_chain), std::vector<double>(y.begin(), y.end()), backend,
                    0, false, u.mesh(), {}, {}};
    (void)t;
    return s;
}

SingularChain preimage_points(const SampledField& u, const TargetManifold& t, std::span<const double> y) {
    const Complex& cx = u.complex();
    const int d = cx.dimension();
    const auto& g = t.group();
    ComplexBuilder b(d);
    std::vector<std::pair<int, int>> found;  // (top, sign)
    std::vector<int> owner;
    std::span<const double> vals[4];
    for (std::size_t top = 0; top < cx.num_cells(d); ++top) {
        auto cell = cx.cell(d, static_cast<int>(top));
        for (int i = 0; i <= d; ++i) vals[i] = u.value(cell[i]);
        auto z = simplex_zero(d, vals, y);
        if (!z.hit) continue;
        std::vector<double> x(d, 0.0);
        for (int i = 0; i <= d; ++i) {
            auto p = cx.point(cell[i]);
            for (int c = 0; c < d; ++c) x[c] += z.w[i] * p[c];
        }
        b.add_vertex(x);
        found.emplace_back(static_cast<int>(top), z.sign * cx.orientation(d, static_cast<int>(top)));
        owner.push_back(static_cast<int>(top));
    }
    auto pts = b.build();
    Chain chain(pts, 0, g);
    Chain dual(u.mesh()->dual, 0, g);
    for (std::size_t i = 0; i < found.size(); ++i) {
        auto e = g.scale(found[i].second, g.unit(0));
        chain.accumulate(static_cast<int>(i), e);
        dual.accumulate(u.mesh()->vertex_of_top[found[i].first], e);
    }
    auto s = make_result(u, t, std::move(chain), std::move(dual), y, Backend::kPreimage);
    s.vertex_face.assign(found.size(), -1);
    s.cell_owner = owner;
    return s;
}

SingularChain preimage_curves(const SampledField& u, const TargetManifold& t, std::span<const double> y) {
    const Complex& cx = u.complex();
    const auto& g = t.group();
    const auto nface = cx.num_cells(2);
    std::vector<int> face_sign(nface, 0);
    std::vector<std::array<double, 3>> face_point(nface);
    std::span<const double> vals[3];
    for (std::size_t f = 0; f < nface; ++f) {
        auto cell = cx.cell(2, static_cast<int>(f));
        for (int i = 0; i < 3; ++i) vals[i] = u.value(cell[i]);
        auto z = simplex_zero(2, vals, y);
        if (!z.hit) continue;
        face_sign[f] = z.sign;
        std::array<double, 3> x{0, 0, 0};
        for (int i = 0; i < 3; ++i) {
            auto p = cx.point(cell[i]);
            for (int c = 0; c < 3; ++c) x[c] += z.w[i] * p[c];
        }
        face_point[f] = x;
    }
    ComplexBuilder b(3);
    b.ensure_dimension(1);
    std::vector<int> vertex_of_face(nface, -1), vertex_face;
    auto vertex = [&](int f) {
        if (vertex_of_face[f] < 0) {
            vertex_of_face[f] = b.add_vertex(face_point[f]);
            vertex_face.push_back(f);
            b.set_vertex_boundary(vertex_of_face[f], cx.on_boundary(2, f));
        }
        return vertex_of_face[f];
    };
    struct Segment {
        int from, to, owner;
    };
    std::vector<Segment> segs;
    for (std::size_t tet = 0; tet < cx.num_cells(3); ++tet) {
        int in = -1, out = -1, count = 0;
        int orient = cx.orientation(3, static_cast<int>(tet));
        for (const auto& inc : cx.boundary_incidence(3, static_cast<int>(tet))) {
            if (face_sign[inc.facet] == 0) continue;
            ++count;
            int s = face_sign[inc.facet] * inc.sign * orient;
            (s > 0 ? out : in) = inc.facet;
        }
        if (count == 0) continue;
        if (count != 2 || in < 0 || out < 0) throw DegeneracyError("zero line of u - y is not transverse in a tetrahedron");
        segs.push_back({vertex(in), vertex(out), static_cast<int>(tet)});
    }
    std::vector<std::pair<int, int>> ids;
    for (const auto& sg : segs) {
        std::array<int, 2> e{sg.from, sg.to};
        ids.push_back(b.add_cell(e));
    }
    auto curves = b.build();
    Chain chain(curves, 1, g);
    std::vector<int> owner(curves->num_cells(1), -1);
    for (std::size_t i = 0; i < segs.size(); ++i) {
        chain.accumulate(ids[i].first, g.scale(ids[i].second, g.unit(0)));
        owner[ids[i].first] = segs[i].owner;
    }
    Chain dual(u.mesh()->dual, 1, g);
    for (std::size_t f = 0; f < nface; ++f)
        if (face_sign[f] != 0) dual.accumulate(u.mesh()->edge_of_facet[f], g.scale(face_sign[f], g.unit(0)));
    auto s = make_result(u, t, std::move(chain), std::move(dual), y, Backend::kPreimage);
    s.vertex_face = std::move(vertex_face);
    s.cell_owner = std::move(owner);
    return s;
}

double norm2(double x, double y) { return std::sqrt(x * x + y * y); }

// Angle swept by the straight segment a -> b seen from the origin.
double segment_angle(double ax, double ay, double bx, double by) {
    double ex = bx - ax, ey = by - ay;
    double len2 = ex * ex + ey * ey;
    double t = len2 > 0 ? std::clamp(-(ax * ex + ay * ey) / len2, 0.0, 1.0) : 0.0;
    if (norm2(ax + t * ex, ay + t * ey) <= TargetManifold::kDegenerateRadius)
        throw DegeneracyError("PL edge of u - y passes through X");
    return std::atan2(ax * by - ay * bx, ax * bx + ay * by);
}

// Angle swept around y by the short unit-circle arc from a to b.
double arc_angle(const double* a, const double* b, std::span<const double> y) {
    const double phi = std::atan2(a[0] * b[1] - a[1] * b[0], a[0] * b[0] + a[1] * b[1]);
    double ry = norm2(y[0], y[1]);
    if (std::abs(ry - 1) <= TargetManifold::kDegenerateRadius && std::abs(phi) > 0)
        throw DegeneracyError("offset lies on the target circle");
    double base = segment_angle(a[0] - y[0], a[1] - y[1], b[0] - y[0], b[1] - y[1]);
    if (ry < 1 && phi != 0) {
        double side = (b[0] - a[0]) * (y[1] - a[1]) - (b[1] - a[1]) * (y[0] - a[0]);
        if (std::abs(side) <= 1e-12 * norm2(b[0] - a[0], b[1] - a[1]))
            throw DegeneracyError("offset lies on an arc chord");
        if ((phi > 0 && side < 0) || (phi < 0 && side > 0)) base += (phi > 0 ? 2 : -2) * std::numbers::pi;
    }
    return base;
}

SingularChain link_chain(const SampledField& u, const TargetManifold& t, std::span<const double> y, bool n_valued) {
    const Complex& cx = u.complex();
    const int d = cx.dimension();
    const auto& g = t.group();
    auto trans = edge_transitions(u, t, y, n_valued);
    const auto& mesh = *u.mesh();
    auto loop_total = [&](int face) {
        double total = 0;
        for (const auto& inc : cx.boundary_incidence(2, face)) total += inc.sign * trans[inc.facet];
        return total;
    };
    Chain dual(mesh.dual, d - 2, g);
    if (d == 2) {
        for (std::size_t top = 0; top < cx.num_cells(2); ++top) {
            auto cls = t.class_of(loop_total(static_cast<int>(top)));
            if (cls.is_zero()) continue;
            dual.accumulate(mesh.vertex_of_top[top], g.scale(cx.orientation(2, static_cast<int>(top)), cls));
        }
    } else {
        for (std::size_t f = 0; f < cx.num_cells(2); ++f) {
            auto cls = t.class_of(loop_total(static_cast<int>(f)));
            if (!cls.is_zero()) dual.accumulate(mesh.edge_of_facet[f], cls);
        }
    }
    auto s = make_result(u, t, dual, dual, y, Backend::kLink);
    s.n_valued = n_valued;
    return s;
}

Backend default_backend(const TargetManifold& t) { return t.is_sphere() ? Backend::kPreimage : Backend::kLink; }

void check_field(const SampledField& u, const TargetManifold& t, std::span<const double> y) {
    if (u.m() != t.ambient_dim())
        throw InputError("field has " + std::to_string(u.m()) + " components but target " + t.name() + " lives in R^" +
                         std::to_string(t.ambient_dim()));
    if (static_cast<int>(y.size()) != t.ambient_dim())
        throw InputError("offset y must have " + std::to_string(t.ambient_dim()) + " components");
    if (u.dim() < t.k()) throw InputError("singular sets need d >= k");
}

SingularChain compute_once(const SampledField& u, const TargetManifold& t, std::span<const double> y, Backend backend,
                           bool n_valued) {
    if (backend == Backend::kPreimage) {
        if (!t.is_sphere()) throw InputError("the preimage backend needs a sphere target");
        if (u.dim() == t.k()) return preimage_points(u, t, y);
        if (u.dim() == 3 && t.k() == 2) return preimage_curves(u, t, y);
        throw InputError("preimage backend supports d = k or (d, k) = (3, 2)");
    }
    if (t.k() != 2) throw InputError("the link backend needs a k = 2 target");
    return link_chain(u, t, y, n_valued);
}

}  // namespace

bool field_is_n_valued(const SampledField& u, const TargetManifold& t, double tol) {
    if (u.m() != t.ambient_dim()) return false;
    for (std::size_t v = 0; v < u.complex().num_vertices(); ++v) {
        auto z = u.value(v);
        if (t.dist_to_X(z) <= TargetManifold::kDegenerateRadius) return false;
        auto r = t.retract(z);
        double s = 0;
        for (std::size_t i = 0; i < z.size(); ++i) s += (z[i] - r[i]) * (z[i] - r[i]);
        if (std::sqrt(s) > tol) return false;
    }
    return true;
}

std::vector<double> edge_transitions(const SampledField& u, const TargetManifold& t, std::span<const double> y,
                                     bool n_valued) {
    const Complex& cx = u.complex();
    const int m = u.m();
    std::vector<double> out(cx.num_cells(1));
    const bool circle = t.is_sphere() && m == 2;
    std::vector<double> ra, rb, za(m), zb(m);
    for (std::size_t e = 0; e < out.size(); ++e) {
        auto ends = cx.cell(1, static_cast<int>(e));
        auto a = u.value(ends[0]);
        auto b = u.value(ends[1]);
        if (circle && !n_valued) {
            out[e] = segment_angle(a[0] - y[0], a[1] - y[1], b[0] - y[0], b[1] - y[1]);
        } else if (circle) {
            segment_angle(a[0], a[1], b[0], b[1]);
            ra = t.retract(a);
            rb = t.retract(b);
            out[e] = arc_angle(ra.data(), rb.data(), y);
        } else if (!n_valued) {
            out[e] = t.path_transition([&](double s, std::span<double> z) {
                for (int i = 0; i < m; ++i) z[i] = (1 - s) * a[i] + s * b[i] - y[i];
            });
        } else {
            out[e] = t.path_transition([&](double s, std::span<double> z) {
                for (int i = 0; i < m; ++i) za[i] = (1 - s) * a[i] + s * b[i];
                auto r = t.retract(za);
                for (int i = 0; i < m; ++i) z[i] = r[i] - y[i];
            });
        }
    }
    return out;
}

SingularChain singular_set(const SampledField& u, const TargetManifold& t, std::span<const double> y,
                           const SingularOptions& options) {
    check_field(u, t, y);
    Backend backend = options.backend.value_or(default_backend(t));
    bool n_valued = backend == Backend::kLink && options.n_valued.value_or(field_is_n_valued(u, t));
    std::vector<double> ty(y.begin(), y.end());
    auto rng = task_rng(options.jitter_seed, 0x5eed);
    for (int attempt = 0;; ++attempt) {
        try {
            auto s = compute_once(u, t, ty, backend, n_valued);
            s.resamples = attempt;
            return s;
        } catch (const DegeneracyError& e) {
            if (attempt >= options.max_resamples)
                throw DegeneracyError(std::string(e.what()) + " (after " + std::to_string(attempt) + " resamples)");
            auto jitter = sample_ball(t.ambient_dim(), 1e-6 * t.delta0(), rng);
            for (std::size_t i = 0; i < ty.size(); ++i) ty[i] = y[i] + jitter[i];
        }
    }
}

Chain interior_boundary(const SingularChain& s) {
    if (s.chain.dim() == 0) return Chain(s.chain.complex_ptr(), 0, s.chain.group());
    const auto& cx = s.chain.complex();
    return restrict(boundary(s.chain), [&cx](int k, int id) { return !cx.on_boundary(k, id); });
}

Chain singular_boundary(const SingularChain& s, const CellPredicate& inside) {
    if (s.chain.dim() == 0) throw InputError("the boundary of a point defect set is empty; S^bd needs d - k >= 1");
    auto part = restrict(s.chain, inside);
    auto bd = boundary(part);
    const auto& cx = s.chain.complex();
    const int k = s.chain.dim();
    for (const auto& [v, g] : bd.entries()) {
        bool in = false, out = cx.on_boundary(0, v);
        // Walk the cofaces up to dimension k: the vertex must touch the region
        // and its complement (or the domain boundary).
        std::vector<int> level{v};
        for (int dim = 0; dim < k; ++dim) {
            std::vector<int> next;
            for (int c : level)
                for (const auto& co : cx.cofaces(dim, c)) next.push_back(co.facet);
            level = std::move(next);
        }
        for (int c : level) {
            if (inside(k, c))
                in = true;
            else
                out = true;
        }
        if (!in || !out) throw Error("internal: S^bd point is not on the boundary of the region");
    }
    return bd;
}

namespace {

// Copies a dual chain onto another mesh of the same grid by cell ids.
Chain on_mesh(const Chain& c, const std::shared_ptr<const Complex>& target) {
    if (c.complex_ptr() == target) return c;
    Chain out(target, c.dim(), c.group());
    for (const auto& [cell, g] : c.entries()) out.accumulate(cell, g);
    return out;
}

}  // namespace

SampledField homotopy_prism(const SampledField& u0, const SampledField& u1) {
    if (u0.dim() != 2) throw InputError("homotopy prisms are built over planar grids");
    if (!(u0.grid() == u1.grid()) || u0.m() != u1.m()) throw InputError("homotopy fields must share grid and target");
    const GridSpec& g2 = u0.grid();
    GridSpec g3;
    g3.dim = 3;
    g3.origin = {g2.origin[0], g2.origin[1], 0};
    g3.spacing = {g2.spacing[0], g2.spacing[1], 1};
    g3.counts = {g2.counts[0], g2.counts[1], 1};
    std::vector<double> vals(u0.values());
    vals.insert(vals.end(), u1.values().begin(), u1.values().end());
    return SampledField(g3, u0.m(), std::move(vals));
}

Cobordism homotopy_cobordism(const SampledField& u0, const SampledField& u1, const TargetManifold& t,
                             std::span<const double> y, const SingularOptions& options) {
    if (u0.dim() != 2 || !t.is_sphere() || t.k() != 2)
        throw InputError("homotopy cobordisms are implemented for d = 2 and the circle target");
    auto prism = homotopy_prism(u0, u1);

    SingularOptions once = options;
    once.backend = Backend::kPreimage;
    once.max_resamples = 0;
    std::vector<double> ty(y.begin(), y.end());
    auto rng = task_rng(options.jitter_seed, 0xc0b0);
    for (int attempt = 0;; ++attempt) {
        try {
            auto c = singular_set(prism, t, ty, once);
            auto s0 = singular_set(u0, t, ty, once);
            auto s1 = singular_set(u1, t, ty, once);
            const auto& curves = c.chain.complex();
            const auto& pcx = prism.complex();

            ComplexBuilder b(2);
            b.ensure_dimension(1);
            for (std::size_t v = 0; v < curves.num_vertices(); ++v) {
                auto p = curves.point(v);
                std::array<double, 2> q{p[0], p[1]};
                b.add_vertex(q);
            }
            std::vector<std::pair<int, int>> ids;
            std::vector<int> kept;
            for (const auto& [e, coef] : c.chain.entries()) {
                auto ends = curves.cell(1, e);
                auto pa = curves.point(ends[0]), pb = curves.point(ends[1]);
                if (norm2(pa[0] - pb[0], pa[1] - pb[1]) <= 1e-14) continue;
                std::array<int, 2> ee{ends[0], ends[1]};
                ids.push_back(b.add_cell(ee));
                kept.push_back(e);
            }
            auto image = b.build();
            Chain pushed(image, 1, t.group());
            for (std::size_t i = 0; i < kept.size(); ++i)
                pushed.accumulate(ids[i].first, t.group().scale(ids[i].second, c.chain.coefficient(kept[i])));

            // Locate prism-end vertices as dual vertices of the 2D grid.
            const auto& mesh2 = *u0.mesh();
            const auto nv2 = static_cast<int>(u0.complex().num_vertices());
            auto locate = [&](int curve_vertex) -> int {
                int f = c.vertex_face[curve_vertex];
                auto bc = pcx.barycenter(2, f);
                if (bc[2] != 0.0 && bc[2] != 1.0) return -1;
                auto tri = pcx.cell(2, f);
                std::array<int, 3> flat{tri[0] % nv2, tri[1] % nv2, tri[2] % nv2};
                auto found = u0.complex().find(2, flat);
                if (!found) throw Error("internal: prism end face is not a grid triangle");
                return mesh2.vertex_of_top[found->first];
            };
            Chain ends(mesh2.dual, 0, t.group());
            auto cb = boundary(c.chain);
            for (const auto& [v, g] : cb.entries()) {
                int dv = locate(v);
                if (dv >= 0) ends.accumulate(dv, g);
            }
            Chain located(mesh2.dual, 0, t.group());
            auto pb = boundary(pushed);
            for (const auto& [v, g] : pb.entries()) {
                int dv = locate(v);
                if (dv >= 0) located.accumulate(dv, g);
            }
            auto expected = on_mesh(s1.dual_chain, mesh2.dual) - on_mesh(s0.dual_chain, mesh2.dual);
            Cobordism out{pushed, ends, located, ends == expected && located == expected};
            if (!out.verified) throw Error("internal: cobordism boundary does not match S_y(u1) - S_y(u0)");
            return out;
        } catch (const DegeneracyError& e) {
            if (attempt >= options.max_resamples) throw;
            auto jitter = sample_ball(2, 1e-6 * t.delta0(), rng);
            for (std::size_t i = 0; i < ty.size(); ++i) ty[i] = y[i] + jitter[i];
        }
    }
}

std::vector<double> sample_ball(int m, double r, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::vector<double> v(m);
    double len = 0;
    do {
        len = 0;
        for (double& x : v) {
            x = g(rng);
            len += x * x;
        }
    } while (len == 0);
    len = std::sqrt(len);
    double rad = r * std::pow(std::uniform_real_distribution<double>(0, 1)(rng), 1.0 / m);
    for (double& x : v) x *= rad / len;
    return v;
}

namespace {

double ball_volume(int m, double r) {
    return std::pow(std::numbers::pi, m / 2.0) / std::tgamma(m / 2.0 + 1) * std::pow(r, m);
}

// Stratified points of the ball B^m_R: `strata` cells, two jittered
// samples each. The radial coordinate is stratified (and the angle too when
// m = 2), so radially symmetric integrands have little variance.
struct Strata {
    int count = 0;
    int m = 0;
    double radius = 0;
    int ra = 1, rb = 1;

    Strata(int m_, double radius_, int samples) : m(m_), radius(radius_) {
        count = std::max(1, samples / 2);
        ra = count;
        rb = 1;
        if (m == 2) {
            for (int a = static_cast<int>(std::sqrt(static_cast<double>(count))); a >= 1; --a)
                if (count % a == 0) {
                    rb = a;
                    ra = count / a;
                    break;
                }
        }
    }

    std::vector<double> draw(int stratum, std::mt19937_64& rng) const {
        std::uniform_real_distribution<double> unit(0, 1);
        int i = stratum % ra, j = stratum / ra;
        double s = (i + unit(rng)) / ra;
        double r = radius * std::pow(s, 1.0 / m);
        std::vector<double> y(m);
        if (m == 2) {
            double th = 2 * std::numbers::pi * (j + unit(rng)) / rb;
            y[0] = r * std::cos(th);
            y[1] = r * std::sin(th);
            return y;
        }
        std::normal_distribution<double> g;
        double len = 0;
        do {
            len = 0;
            for (double& x : y) {
                x = g(rng);
                len += x * x;
            }
        } while (len == 0);
        len = std::sqrt(len);
        for (double& x : y) x *= r / len;
        return y;
    }
};

struct PairedEstimate {
    double mean = 0;
    double standard_error = 0;
};

// Stratum pairs (x1, x2) with equal weights.
PairedEstimate combine_pairs(const std::vector<std::array<double, 2>>& pairs) {
    PairedEstimate e;
    if (pairs.empty()) return e;
    const double s = static_cast<double>(pairs.size());
    double var = 0;
    for (const auto& p : pairs) {
        e.mean += 0.5 * (p[0] + p[1]);
        var += 0.25 * (p[0] - p[1]) * (p[0] - p[1]);
    }
    e.mean /= s;
    e.standard_error = std::sqrt(var) / s;
    return e;
}

}  // namespace

double boundary_degree(const SampledField& u, const TargetManifold& t) {
    if (!t.is_sphere() || u.m() != u.dim()) throw InputError("boundary degree needs a sphere target with m = d");
    const auto& g = u.grid();
    if (u.dim() == 2) {
        const int nx = g.counts[0], ny = g.counts[1];
        std::vector<std::size_t> loop;
        for (int i = 0; i < nx; ++i) loop.push_back(g.vertex_index({i, 0, 0}));
        for (int j = 0; j < ny; ++j) loop.push_back(g.vertex_index({nx, j, 0}));
        for (int i = nx; i > 0; --i) loop.push_back(g.vertex_index({i, ny, 0}));
        for (int j = ny; j > 0; --j) loop.push_back(g.vertex_index({0, j, 0}));
        double total = 0;
        for (std::size_t i = 0; i < loop.size(); ++i) {
            auto a = u.value(loop[i]);
            auto b = u.value(loop[(i + 1) % loop.size()]);
            total += segment_angle(a[0], a[1], b[0], b[1]);
        }
        return total / (2 * std::numbers::pi);
    }
    // Signed solid angle of the PL image of every outward boundary triangle.
    const Complex& cx = u.complex();
    double total = 0;
    for (std::size_t f = 0; f < cx.num_cells(2); ++f) {
        if (!cx.on_boundary(2, static_cast<int>(f))) continue;
        const auto& co = cx.cofaces(2, static_cast<int>(f));
        int sign = co[0].sign * cx.orientation(3, co[0].facet);
        auto tri = cx.cell(2, static_cast<int>(f));
        Eigen::Vector3d a, b, c;
        for (int i = 0; i < 3; ++i) {
            a[i] = u.value(tri[0])[i];
            b[i] = u.value(tri[1])[i];
            c[i] = u.value(tri[2])[i];
        }
        double num = a.dot(b.cross(c));
        double den = a.norm() * b.norm() * c.norm() + a.dot(b) * c.norm() + a.dot(c) * b.norm() + b.dot(c) * a.norm();
        total += sign * 2 * std::atan2(num, den);
    }
    return total / (4 * std::numbers::pi);
}

JacobianReport jacobian_integral_check(const SampledField& u, const TargetManifold& t, const McOptions& mc) {
    if (!t.is_sphere()) throw InputError("the Jacobian check needs a sphere target");
    if (u.dim() != t.k()) throw InputError("the Jacobian check needs point singularities (d = k)");
    JacobianReport r;
    r.radius = u.sup_norm() + 1;
    r.boundary_degree = boundary_degree(u, t);
    Strata strata(t.k(), r.radius, mc.samples);
    std::vector<std::array<double, 2>> pairs(strata.count);
    std::vector<int> degenerate(strata.count, 0);
    parallel_for(strata.count, mc.threads, [&](int h) {
        auto rng = task_rng(mc.seed, static_cast<std::uint64_t>(h));
        for (int k = 0; k < 2; ++k) {
            auto y = strata.draw(h, rng);
            SingularOptions opt;
            opt.backend = Backend::kPreimage;
            opt.jitter_seed = split_seed(mc.seed, 1000003ULL * h + k);
            try {
                auto s = singular_set(u, t, y, opt);
                pairs[h][k] = static_cast<double>(augmentation(s.chain)[0]);
            } catch (const DegeneracyError&) {
                pairs[h][k] = 0;
                ++degenerate[h];
            }
        }
    });
    auto e = combine_pairs(pairs);
    double scale = std::pow(r.radius, t.k());
    r.estimate = scale * e.mean;
    r.standard_error = scale * e.standard_error;
    r.samples = 2 * strata.count;
    for (int d : degenerate) r.degenerate_samples += d;
    return r;
}

MassReport mass_coarea_report(const SampledField& u, const TargetManifold& t, const McOptions& mc) {
    MassReport r;
    double radius = u.sup_norm() + 1;
    Strata strata(t.ambient_dim(), radius, mc.samples);
    std::vector<std::array<double, 2>> pairs(strata.count);
    parallel_for(strata.count, mc.threads, [&](int h) {
        auto rng = task_rng(mc.seed, static_cast<std::uint64_t>(h));
        for (int k = 0; k < 2; ++k) {
            auto y = strata.draw(h, rng);
            SingularOptions opt;
            opt.jitter_seed = split_seed(mc.seed, 1000003ULL * h + k);
            auto s = singular_set(u, t, y, opt);
            pairs[h][k] = mass(s.chain);
        }
    });
    auto e = combine_pairs(pairs);
    double vol = ball_volume(t.ambient_dim(), radius);
    r.mass_integral = vol * e.mean;
    r.standard_error = vol * e.standard_error;
    r.gradient_norm = u.gradient_norm_power(t.k());
    r.ratio = r.gradient_norm > 0 ? r.mass_integral / r.gradient_norm : 0.0;
    r.samples = 2 * strata.count;
    return r;
}

ContinuityReport continuity_report(const SampledField& u0, const SampledField& u1, const TargetManifold& t,
                                   const McOptions& mc) {
    if (u0.dim() != 2) throw InputError("continuity reports are implemented for d = 2");
    if (!(u0.grid() == u1.grid()) || u0.m() != u1.m()) throw InputError("continuity fields must share grid and target");
    ContinuityReport r;
    const int k = t.k();
    const Complex& cx = u0.complex();
    for (std::size_t top = 0; top < cx.num_cells(2); ++top) {
        auto cell = cx.cell(2, static_cast<int>(top));
        double diff = 0;
        for (int v : cell) {
            double s = 0;
            for (int i = 0; i < u0.m(); ++i) s += std::pow(u1.value(v)[i] - u0.value(v)[i], 2);
            diff += std::sqrt(s) / 3;
        }
        double g = std::pow(u1.gradient(static_cast<int>(top)).norm(), k - 1) +
                   std::pow(u0.gradient(static_cast<int>(top)).norm(), k - 1);
        r.rhs_integral += cx.volume(2, static_cast<int>(top)) * diff * g;
    }
    const auto& mesh = u0.mesh();
    CellPredicate inside = [&mesh](int dim, int id) { return dim == 1 || mesh->interior_vertex(id); };
    double radius = std::max(u0.sup_norm(), u1.sup_norm()) + 1;
    Strata strata(t.ambient_dim(), radius, mc.samples);
    std::vector<std::array<double, 2>> pairs(strata.count);
    std::vector<int> inexact(strata.count, 0);
    parallel_for(strata.count, mc.threads, [&](int h) {
        auto rng = task_rng(mc.seed, static_cast<std::uint64_t>(h));
        for (int j = 0; j < 2; ++j) {
            auto y = strata.draw(h, rng);
            SingularOptions opt;
            opt.jitter_seed = split_seed(mc.seed, 1000003ULL * h + j);
            auto s0 = singular_set(u0, t, y, opt);
            auto s1 = singular_set(u1, t, y, opt);
            auto diff = on_mesh(s1.dual_chain, mesh->dual) - on_mesh(s0.dual_chain, mesh->dual);
            auto f = relative_flat_norm(diff, inside);
            pairs[h][j] = f.value;
            if (f.exactness != Exactness::kExact) ++inexact[h];
        }
    });
    auto e = combine_pairs(pairs);
    double vol = ball_volume(t.ambient_dim(), radius);
    r.flat_integral = vol * e.mean;
    r.standard_error = vol * e.standard_error;
    r.ratio = r.rhs_integral > 0 ? r.flat_integral / r.rhs_integral : 0.0;
    r.samples = 2 * strata.count;
    for (int v : inexact) r.inexact_samples += v;
    return r;
}

namespace {

// Class of rho(u) around the stored orientation of a primal 2-face, from
// vertex samples refined along the PL edges until every step is safe.
GroupElement direct_loop_class(const SampledField& u, const TargetManifold& t, int face) {
    auto tri = u.complex().cell(2, face);
    for (int level = 0; level <= 10; ++level) {
        const int parts = 1 << level;
        std::vector<std::vector<double>> loop;
        std::vector<double> z(u.m());
        for (int i = 0; i < 3; ++i) {
            auto a = u.value(tri[i]);
            auto b = u.value(tri[(i + 1) % 3]);
            for (int p = 0; p < parts; ++p) {
                double s = static_cast<double>(p) / parts;
                for (int c = 0; c < u.m(); ++c) z[c] = (1 - s) * a[c] + s * b[c];
                loop.push_back(t.retract(z));
            }
        }
        try {
            return t.classify_loop(loop);
        } catch (const RefineNeeded&) {
        }
    }
    throw DegeneracyError("loop classification did not become safe after refinement");
}

}  // namespace

StabilityReport n_valued_stability(const SampledField& u, const TargetManifold& t, const McOptions& mc) {
    if (t.k() != 2) throw InputError("N-valued stability is checked through the link backend (k = 2)");
    if (!field_is_n_valued(u, t)) throw InputError("field samples are not within 1e-9 of N");
    StabilityReport r;
    r.draws = mc.samples;
    std::vector<std::optional<Chain>> chains(mc.samples);
    std::vector<std::vector<double>> ys(mc.samples);
    parallel_for(mc.samples, mc.threads, [&](int i) {
        auto rng = task_rng(mc.seed, static_cast<std::uint64_t>(i));
        ys[i] = sample_ball(t.ambient_dim(), 0.9 * t.delta0(), rng);
        SingularOptions opt;
        opt.backend = Backend::kLink;
        opt.n_valued = true;
        opt.jitter_seed = split_seed(mc.seed, 7919ULL * i + 1);
        chains[i] = singular_set(u, t, ys[i], opt).dual_chain;
    });
    if (mc.samples == 0) return r;
    const Chain& first = *chains[0];
    r.defect_cells = first.size();
    for (int i = 1; i < mc.samples; ++i) {
        if (!(*chains[i] == first)) {
            r.identical = false;
            r.mismatches.emplace_back(i, ys[i]);
        }
    }
    const Complex& cx = u.complex();
    const auto& mesh = *u.mesh();
    const int d = u.dim();
    const auto& g = t.group();
    for (std::size_t f = 0; f < cx.num_cells(2); ++f) {
        auto cls = direct_loop_class(u, t, static_cast<int>(f));
        GroupElement expect = d == 2 ? g.scale(cx.orientation(2, static_cast<int>(f)), cls) : cls;
        GroupElement got = d == 2 ? first.coefficient(mesh.vertex_of_top[f]) : first.coefficient(mesh.edge_of_facet[f]);
        if (!(expect == got)) r.loop_classes_agree = false;
    }
    return r;
}

nlohmann::json JacobianReport::to_json() const {
    return {{"estimate", estimate},
            {"standard_error", standard_error},
            {"boundary_degree", boundary_degree},
            {"radius", radius},
            {"samples", samples},
            {"degenerate_samples", degenerate_samples}};
}

nlohmann::json MassReport::to_json() const {
    return {{"mass_integral", mass_integral},
            {"standard_error", standard_error},
            {"gradient_norm", gradient_norm},
            {"ratio", ratio},
            {"samples", samples}};
}

nlohmann::json ContinuityReport::to_json() const {
    return {{"flat_integral", flat_integral},
            {"standard_error", standard_error},
            {"rhs_integral", rhs_integral},
            {"ratio", ratio},
            {"samples", samples},
            {"inexact_samples", inexact_samples}};
}

nlohmann::json StabilityReport::to_json() const {
    nlohmann::json mm = nlohmann::json::array();
    for (const auto& [i, y] : mismatches) mm.push_back({{"draw", i}, {"y", y}});
    return {{"identical", identical},
            {"draws", draws},
            {"defect_cells", defect_cells},
            {"mismatches", mm},
            {"loop_classes_agree", loop_classes_agree}};
}

}  // namespace flatchain
