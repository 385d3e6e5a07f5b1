#include "flatchain/geomops.hpp"

#include <cmath>
#include <map>
#include <random>

#include <Eigen/Dense>

#include "flatchain/error.hpp"

namespace flatchain {

namespace {

constexpr double kBaryEps = 1e-12;
constexpr double kTransverseTol = 1e-8;

// Merges points closer than tol; lookups hash by rounded coordinates and scan
// the neighbouring buckets.
class PointIndex {
public:
    PointIndex(int dim, double tol) : dim_(dim), tol_(tol) {}

    std::optional<int> find(std::span<const double> p) const {
        auto key = bucket(p);
        std::optional<int> hit;
        visit(key, 0, [&](const std::vector<std::int64_t>& k) {
            auto it = buckets_.find(k);
            if (it == buckets_.end() || hit) return;
            for (const auto& [id, q] : it->second) {
                double d = 0;
                for (int i = 0; i < dim_; ++i) d = std::max(d, std::abs(q[i] - p[i]));
                if (d <= tol_) {
                    hit = id;
                    return;
                }
            }
        });
        return hit;
    }

    void insert(int id, std::span<const double> p) {
        buckets_[bucket(p)].emplace_back(id, std::vector<double>(p.begin(), p.end()));
    }

private:
    std::vector<std::int64_t> bucket(std::span<const double> p) const {
        std::vector<std::int64_t> k(dim_);
        for (int i = 0; i < dim_; ++i) k[i] = static_cast<std::int64_t>(std::floor(p[i] / (4 * tol_)));
        return k;
    }

    template <class F>
    void visit(std::vector<std::int64_t>& key, int axis, F&& f) const {
        if (axis == dim_) {
            f(key);
            return;
        }
        for (int delta : {0, -1, 1}) {
            key[axis] += delta;
            visit(key, axis + 1, f);
            key[axis] -= delta;
        }
    }

    int dim_;
    double tol_;
    std::map<std::vector<std::int64_t>, std::vector<std::pair<int, std::vector<double>>>> buckets_;
};

// Builder that merges coincident vertices.
struct MergingBuilder {
    ComplexBuilder builder;
    PointIndex index;

    MergingBuilder(int dim, double tol) : builder(dim), index(dim, tol) {}

    int vertex(std::span<const double> p) {
        if (auto id = index.find(p)) return *id;
        int id = builder.add_vertex(p);
        index.insert(id, p);
        return id;
    }
};

double coordinate_scale(const Complex& cx) {
    double s = 1;
    for (std::size_t v = 0; v < cx.num_vertices(); ++v)
        for (double x : cx.point(v)) s = std::max(s, std::abs(x));
    return s;
}

Eigen::MatrixXd edge_matrix(const Complex& cx, int k, int id) {
    auto cell = cx.cell(k, id);
    const int d = cx.ambient_dim();
    Eigen::MatrixXd e(d, k);
    auto p0 = cx.point(cell[0]);
    for (int j = 0; j < k; ++j) {
        auto p = cx.point(cell[j + 1]);
        for (int i = 0; i < d; ++i) e(i, j) = p[i] - p0[i];
    }
    return e;
}

Eigen::MatrixXd image_edges(const PLMap& f, std::span<const int> cell) {
    const int k = static_cast<int>(cell.size()) - 1;
    Eigen::MatrixXd e(f.target_dim(), k);
    auto p0 = f.image(cell[0]);
    for (int j = 0; j < k; ++j) {
        auto p = f.image(cell[j + 1]);
        for (int i = 0; i < f.target_dim(); ++i) e(i, j) = p[i] - p0[i];
    }
    return e;
}

bool degenerate_image(const Eigen::MatrixXd& e) {
    if (e.cols() == 0) return false;
    if (e.cols() > e.rows()) return true;
    double scale = std::max(1.0, e.cwiseAbs().maxCoeff());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(e);
    return svd.singularValues()(e.cols() - 1) <= 1e-12 * scale;
}

}  // namespace

PLMap::PLMap(std::shared_ptr<const Complex> source, int target_dim, std::vector<double> images)
    : source_(std::move(source)), n_(target_dim), images_(std::move(images)) {
    if (n_ < 1) throw InputError("PL maps need a target dimension >= 1");
    if (images_.size() != source_->num_vertices() * static_cast<std::size_t>(n_))
        throw InputError("PL map needs one image point per source vertex");
    for (double v : images_)
        if (!std::isfinite(v)) throw InputError("PL map images must be finite");
    const int k = source_->dimension();
    if (k == 0) return;
    for (std::size_t c = 0; c < source_->num_cells(k); ++c) {
        auto e = edge_matrix(*source_, k, static_cast<int>(c));
        auto f = image_edges(*this, source_->cell(k, static_cast<int>(c)));
        Eigen::MatrixXd a = f * e.completeOrthogonalDecomposition().pseudoInverse();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
        lambda_ = std::max(lambda_, svd.singularValues()(0));
    }
}

std::shared_ptr<const Complex> image_complex(const PLMap& f) {
    const Complex& src = f.source();
    double tol = 1e-9 * std::max(1.0, [&] {
        double s = 0;
        for (std::size_t v = 0; v < src.num_vertices(); ++v)
            for (double x : f.image(v)) s = std::max(s, std::abs(x));
        return s;
    }());
    MergingBuilder b(f.target_dim(), tol);
    b.builder.ensure_dimension(src.dimension());
    std::vector<int> vmap(src.num_vertices());
    for (std::size_t v = 0; v < src.num_vertices(); ++v) vmap[v] = b.vertex(f.image(v));
    for (int k = 1; k <= src.dimension(); ++k) {
        for (std::size_t c = 0; c < src.num_cells(k); ++c) {
            auto cell = src.cell(k, static_cast<int>(c));
            if (degenerate_image(image_edges(f, cell))) continue;
            std::vector<int> t;
            for (int v : cell) t.push_back(vmap[v]);
            b.builder.add_cell(t);
        }
    }
    return b.builder.build();
}

Chain pushforward(const PLMap& f, const Chain& s, std::shared_ptr<const Complex> target) {
    if (s.complex_ptr() != f.source_ptr()) throw InputError("pushforward: chain does not live on the map's source");
    const int n = s.dim();
    if (!target) target = image_complex(f);
    if (target->ambient_dim() != f.target_dim()) throw InputError("pushforward target lives in the wrong dimension");
    PointIndex index(f.target_dim(), 1e-9 * coordinate_scale(*target));
    for (std::size_t v = 0; v < target->num_vertices(); ++v) index.insert(static_cast<int>(v), target->point(v));

    Chain out(target, n, s.group());
    for (const auto& [c, g] : s.entries()) {
        auto cell = s.complex().cell(n, c);
        if (degenerate_image(image_edges(f, cell))) continue;
        std::vector<int> t;
        for (int v : cell) {
            auto id = index.find(f.image(v));
            if (!id) throw InputError("pushforward: image vertex is not a vertex of the target complex");
            t.push_back(*id);
        }
        if (n > 0 && !target->find(n, t)) throw InputError("pushforward: image cell is not a cell of the target complex");
        if (n == 0) {
            out.accumulate(t[0], g);
        } else {
            out.accumulate_oriented(t, g);
        }
    }
    const double bound = std::pow(f.lipschitz(), n) * mass(s);
    if (mass(out) > bound * (1 + 1e-9) + 1e-12) throw Error("internal: pushforward exceeds the Lipschitz mass bound");
    return out;
}

namespace {

// Complementary dimensions: one intersection point per transverse pair.
void intersect_points(const Chain& s, const Chain& r, std::span<const double> y, MergingBuilder& b,
                      std::vector<std::pair<int, GroupElement>>& hits, bool& degenerate) {
    const Complex& cs = s.complex();
    const Complex& cr = r.complex();
    const int d = cs.ambient_dim(), n = s.dim(), m = r.dim();
    const auto& g = s.group();
    struct Box {
        std::vector<double> lo, hi;
    };
    auto box = [d](const Complex& cx, std::span<const int> cell, std::span<const double> shift) {
        Box bx{std::vector<double>(d, INFINITY), std::vector<double>(d, -INFINITY)};
        for (int v : cell)
            for (int i = 0; i < d; ++i) {
                double x = cx.point(v)[i] + (shift.empty() ? 0.0 : shift[i]);
                bx.lo[i] = std::min(bx.lo[i], x);
                bx.hi[i] = std::max(bx.hi[i], x);
            }
        return bx;
    };
    std::vector<Box> rboxes;
    std::vector<int> rcells;
    for (const auto& [c, coef] : r.entries()) {
        rboxes.push_back(box(cr, cr.cell(m, c), y));
        rcells.push_back(c);
    }
    const double tol = 1e-9 * std::max(coordinate_scale(cs), coordinate_scale(cr));
    for (const auto& [sc, sg] : s.entries()) {
        auto scell = cs.cell(n, sc);
        Box sb = box(cs, scell, {});
        for (std::size_t ri = 0; ri < rcells.size(); ++ri) {
            const Box& rb = rboxes[ri];
            bool overlap = true;
            for (int i = 0; i < d; ++i) overlap = overlap && sb.lo[i] <= rb.hi[i] + tol && rb.lo[i] <= sb.hi[i] + tol;
            if (!overlap) continue;
            auto rcell = cr.cell(m, rcells[ri]);
            Eigen::MatrixXd mat(d, d);
            Eigen::VectorXd rhs(d);
            auto s0 = cs.point(scell[0]);
            auto r0 = cr.point(rcell[0]);
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < d; ++i) mat(i, j) = cs.point(scell[j + 1])[i] - s0[i];
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < d; ++i) mat(i, n + j) = -(cr.point(rcell[j + 1])[i] - r0[i]);
            for (int i = 0; i < d; ++i) rhs(i) = r0[i] + y[i] - s0[i];
            if (d > 0) {
                Eigen::MatrixXd unit = mat;
                for (int j = 0; j < d; ++j) unit.col(j).normalize();
                Eigen::JacobiSVD<Eigen::MatrixXd> svd(unit);
                if (svd.singularValues()(d - 1) < kTransverseTol) {
                    degenerate = true;
                    continue;
                }
            }
            Eigen::VectorXd sol = mat.fullPivLu().solve(rhs);
            auto check = [&](int off, int len, bool& inside, bool& edge) {
                double w0 = 1;
                for (int j = 0; j < len; ++j) {
                    double w = sol(off + j);
                    w0 -= w;
                    if (std::abs(w) <= kBaryEps) edge = true;
                    inside = inside && w > 0;
                }
                if (std::abs(w0) <= kBaryEps) edge = true;
                inside = inside && w0 > 0;
            };
            bool inside = true, edge = false;
            check(0, n, inside, edge);
            check(n, m, inside, edge);
            if (edge) {
                degenerate = true;
                continue;
            }
            if (!inside) continue;
            // det[S edges, R edges] = det(mat) * (-1)^m.
            double det = mat.determinant() * (m % 2 ? -1.0 : 1.0);
            std::vector<double> x(d);
            for (int i = 0; i < d; ++i) {
                x[i] = s0[i];
                for (int j = 0; j < n; ++j) x[i] += sol(j) * mat(i, j);
            }
            std::int64_t mult = r.entries().at(rcells[ri])[0];
            hits.emplace_back(b.vertex(x), g.scale((det > 0 ? 1 : -1) * mult, sg));
        }
    }
}

// d = 2: pieces of the 1-chain inside the triangles of the 2-chain. `seg`
// is the 1-chain (coefficient group of `tri_coeffs` side handled by caller).
struct Piece {
    std::array<double, 2> a, b;
    GroupElement coef;
};

void clip_segments(const Chain& tris, std::span<const double> tri_shift, const Chain& segs,
                   std::span<const double> seg_shift, bool tri_is_s, std::vector<Piece>& out, bool& degenerate) {
    const Complex& ct = tris.complex();
    const Complex& cs = segs.complex();
    const auto& g = tri_is_s ? tris.group() : segs.group();
    const double tol = 1e-9 * std::max(coordinate_scale(ct), coordinate_scale(cs));
    for (const auto& [t, tg] : tris.entries()) {
        auto tc = ct.cell(2, t);
        std::array<std::array<double, 2>, 3> p;
        for (int i = 0; i < 3; ++i)
            for (int c = 0; c < 2; ++c) p[i][c] = ct.point(tc[i])[c] + tri_shift[c];
        double area = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
        int o = area > 0 ? 1 : -1;
        for (const auto& [e, eg] : segs.entries()) {
            auto ec = cs.cell(1, e);
            std::array<double, 2> a{cs.point(ec[0])[0] + seg_shift[0], cs.point(ec[0])[1] + seg_shift[1]};
            std::array<double, 2> b{cs.point(ec[1])[0] + seg_shift[0], cs.point(ec[1])[1] + seg_shift[1]};
            double lo = 0, hi = 1;
            bool empty = false;
            for (int i = 0; i < 3 && !empty; ++i) {
                const auto& q0 = p[i];
                const auto& q1 = p[(i + 1) % 3];
                double ex = q1[0] - q0[0], ey = q1[1] - q0[1];
                double len = std::hypot(ex, ey);
                double fa = o * (ex * (a[1] - q0[1]) - ey * (a[0] - q0[0])) / len;
                double fb = o * (ex * (b[1] - q0[1]) - ey * (b[0] - q0[0])) / len;
                if (std::abs(fa) <= tol && std::abs(fb) <= tol) {
                    // Segment along a triangle edge.
                    double t0 = (ex * (a[0] - q0[0]) + ey * (a[1] - q0[1])) / (len * len);
                    double t1 = (ex * (b[0] - q0[0]) + ey * (b[1] - q0[1])) / (len * len);
                    if (std::max(t0, t1) > 0 && std::min(t0, t1) < 1) degenerate = true;
                    empty = true;
                    break;
                }
                if (fa < 0 && fb < 0) {
                    empty = true;
                } else if (fa < 0 || fb < 0) {
                    double tc = fa / (fa - fb);
                    if (fa < 0)
                        lo = std::max(lo, tc);
                    else
                        hi = std::min(hi, tc);
                }
            }
            if (empty || hi - lo <= 1e-12) continue;
            Piece pc;
            for (int c = 0; c < 2; ++c) {
                pc.a[c] = a[c] + lo * (b[c] - a[c]);
                pc.b[c] = a[c] + hi * (b[c] - a[c]);
            }
            for (const auto& q : p)
                for (const auto* x : {&pc.a, &pc.b})
                    if (std::hypot((*x)[0] - q[0], (*x)[1] - q[1]) <= tol) degenerate = true;
            const GroupElement& carried = tri_is_s ? tg : eg;
            std::int64_t mult = (tri_is_s ? eg : tg)[0];
            pc.coef = g.scale(o * mult, carried);
            out.push_back(pc);
        }
    }
}

}  // namespace

IntersectionResult intersect_chains(const Chain& s, const Chain& r, std::span<const double> y) {
    if (!(r.group() == CoefficientGroup::integers())) throw InputError("intersections need R with integer coefficients");
    const int d = s.complex().ambient_dim();
    if (r.complex().ambient_dim() != d) throw InputError("intersected chains live in different spaces");
    if (static_cast<int>(y.size()) != d) throw InputError("translation has the wrong dimension");
    const int n = s.dim(), m = r.dim();
    const auto& g = s.group();
    double tol = 1e-9 * std::max(coordinate_scale(s.complex()), coordinate_scale(r.complex()));
    MergingBuilder b(d, tol);
    b.builder.ensure_dimension(0);
    bool degenerate = false;
    if (n + m == d) {
        std::vector<std::pair<int, GroupElement>> hits;
        intersect_points(s, r, y, b, hits, degenerate);
        Chain c(b.builder.build(), 0, g);
        for (const auto& [v, e] : hits) c.accumulate(v, e);
        auto index = augmentation(c);
        return {std::move(c), std::move(index), degenerate};
    }
    if (d == 2 && n + m == 3) {
        std::vector<Piece> pieces;
        std::vector<double> zero{0, 0};
        if (n == 2)
            clip_segments(s, zero, r, y, true, pieces, degenerate);
        else
            clip_segments(r, y, s, zero, false, pieces, degenerate);
        b.builder.ensure_dimension(1);
        std::vector<std::pair<std::array<int, 2>, GroupElement>> cells;
        for (const auto& pc : pieces) {
            int va = b.vertex(pc.a), vb = b.vertex(pc.b);
            if (va == vb) continue;
            std::array<int, 2> e{va, vb};
            b.builder.add_cell(e);
            cells.emplace_back(e, pc.coef);
        }
        Chain c(b.builder.build(), 1, g);
        for (const auto& [e, coef] : cells) c.accumulate_oriented(e, coef);
        return {std::move(c), g.zero(), degenerate};
    }
    throw InputError("intersections are supported for complementary dimensions, and 2-chains against 1-chains in R^2");
}

IntersectionIndex intersection_index(const Chain& s, const Chain& r, int samples, double radius, std::uint64_t seed) {
    const int d = s.complex().ambient_dim();
    if (s.dim() + r.dim() != d) throw InputError("intersection index needs complementary dimensions");
    if (samples < 1 || !(radius > 0)) throw InputError("intersection index needs samples >= 1 and radius > 0");
    double sep = INFINITY;
    if (s.dim() > 0) sep = std::min(sep, support_distance(boundary(s), r));
    if (r.dim() > 0) sep = std::min(sep, support_distance(s, boundary(r)));
    if (!(sep > 0)) throw InputError("intersection index undefined: spt(dS) meets spt(R) or spt(S) meets spt(dR)");
    double rad = std::min(radius, 0.5 * sep);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unit(0, 1);
    auto draw = [&](double rr) {
        std::vector<double> y(d);
        double len = 0;
        for (double& v : y) {
            v = gauss(rng);
            len += v * v;
        }
        len = std::sqrt(len);
        double scale = rr * std::pow(unit(rng), 1.0 / d) / (len > 0 ? len : 1);
        for (double& v : y) v *= scale;
        return y;
    };
    for (int level = 0; level <= 30; ++level, rad *= 0.5) {
        std::optional<GroupElement> common;
        bool agree = true;
        for (int i = 0; i < samples && agree; ++i) {
            std::optional<IntersectionResult> hit;
            for (int tries = 0; tries < 16 && (!hit || hit->degenerate); ++tries) hit = intersect_chains(s, r, draw(rad));
            if (hit->degenerate) continue;
            if (!common)
                common = hit->index;
            else if (!(*common == hit->index))
                agree = false;
        }
        if (agree && common) return {*common, rad};
    }
    throw DegeneracyError("intersection index did not stabilise under shrinking offsets");
}

}  // namespace flatchain
