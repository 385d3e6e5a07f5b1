#include "flatchain/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "flatchain/error.hpp"

namespace flatchain {

std::size_t GridSpec::num_vertices() const {
    std::size_t n = 1;
    for (int i = 0; i < dim; ++i) n *= static_cast<std::size_t>(counts[i] + 1);
    return n;
}

std::size_t GridSpec::vertex_index(std::array<int, 3> ijk) const {
    std::size_t idx = 0;
    for (int i = dim; i-- > 0;) idx = idx * static_cast<std::size_t>(counts[i] + 1) + ijk[i];
    return idx;
}

std::array<int, 3> GridSpec::vertex_ijk(std::size_t v) const {
    std::array<int, 3> ijk{0, 0, 0};
    for (int i = 0; i < dim; ++i) {
        ijk[i] = static_cast<int>(v % static_cast<std::size_t>(counts[i] + 1));
        v /= static_cast<std::size_t>(counts[i] + 1);
    }
    return ijk;
}

std::array<double, 3> GridSpec::vertex_point(std::size_t v) const {
    auto ijk = vertex_ijk(v);
    std::array<double, 3> p{0, 0, 0};
    for (int i = 0; i < dim; ++i) p[i] = origin[i] + spacing[i] * ijk[i];
    return p;
}

double GridSpec::box_volume() const {
    double v = 1;
    for (int i = 0; i < dim; ++i) v *= spacing[i] * counts[i];
    return v;
}

nlohmann::json GridSpec::to_json() const {
    return {{"d", dim},
            {"origin", std::vector<double>(origin.begin(), origin.begin() + dim)},
            {"spacing", std::vector<double>(spacing.begin(), spacing.begin() + dim)},
            {"counts", std::vector<int>(counts.begin(), counts.begin() + dim)}};
}

GridSpec GridSpec::from_json(const nlohmann::json& j) {
    GridSpec g;
    try {
        g.dim = j.at("d").get<int>();
        if (g.dim < 1 || g.dim > 3) throw InputError("grid dimension must be 1..3");
        auto o = j.at("origin").get<std::vector<double>>();
        auto s = j.at("spacing").get<std::vector<double>>();
        auto c = j.at("counts").get<std::vector<int>>();
        if (o.size() != static_cast<std::size_t>(g.dim) || s.size() != o.size() || c.size() != o.size())
            throw InputError("grid origin/spacing/counts must have d entries");
        for (int i = 0; i < g.dim; ++i) {
            g.origin[i] = o[i];
            g.spacing[i] = s[i];
            g.counts[i] = c[i];
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad grid descriptor: ") + e.what());
    }
    return g;
}

int permutation_sign(std::span<const int> from, std::span<const int> to) {
    std::vector<int> pos(from.size());
    for (std::size_t i = 0; i < from.size(); ++i) {
        auto it = std::find(to.begin(), to.end(), from[i]);
        pos[i] = static_cast<int>(it - to.begin());
    }
    int sign = 1;
    for (std::size_t i = 0; i < pos.size(); ++i) {
        while (pos[i] != static_cast<int>(i)) {
            std::swap(pos[i], pos[pos[i]]);
            sign = -sign;
        }
    }
    return sign;
}

std::size_t Complex::num_cells(int k) const {
    if (k < 0 || k > dimension()) return 0;
    return cells_[k].size() / static_cast<std::size_t>(k + 1);
}

std::size_t Complex::total_cells() const {
    std::size_t n = 0;
    for (int k = 0; k <= dimension(); ++k) n += num_cells(k);
    return n;
}

std::span<const int> Complex::cell(int k, int id) const {
    if (k < 0 || k > dimension() || id < 0 || static_cast<std::size_t>(id) >= num_cells(k))
        throw InputError("unknown cell " + std::to_string(id) + " of dimension " + std::to_string(k));
    return {cells_[k].data() + static_cast<std::size_t>(id) * (k + 1), static_cast<std::size_t>(k + 1)};
}

const std::vector<Incidence>& Complex::boundary_incidence(int k, int id) const {
    if (k < 1) throw InputError("boundary incidence needs a cell of dimension >= 1");
    cell(k, id);
    return facets_[k][id];
}

const std::vector<Incidence>& Complex::cofaces(int k, int id) const {
    cell(k, id);
    static const std::vector<Incidence> kNone;
    if (k >= dimension()) return kNone;
    return cofaces_[k][id];
}

double Complex::volume(int k, int id) const {
    cell(k, id);
    return volumes_[k][id];
}

std::vector<double> Complex::barycenter(int k, int id) const {
    std::vector<double> c(ambient_, 0.0);
    auto vs = cell(k, id);
    for (int v : vs) {
        auto p = point(v);
        for (int i = 0; i < ambient_; ++i) c[i] += p[i];
    }
    for (auto& x : c) x /= static_cast<double>(vs.size());
    return c;
}

int Complex::orientation(int k, int id) const {
    if (k != ambient_ || k != dimension()) throw InputError("orientation is defined for full-dimensional cells only");
    cell(k, id);
    return orientation_[id];
}

bool Complex::on_boundary(int k, int id) const {
    cell(k, id);
    return boundary_[k][id] != 0;
}

std::optional<std::pair<int, int>> Complex::find(int k, std::span<const int> vertices) const {
    if (k < 0 || k > dimension() || vertices.size() != static_cast<std::size_t>(k + 1)) return std::nullopt;
    std::vector<int> key(vertices.begin(), vertices.end());
    std::sort(key.begin(), key.end());
    auto it = lookup_[k].find(key);
    if (it == lookup_[k].end()) return std::nullopt;
    return std::pair{it->second, permutation_sign(vertices, cell(k, it->second))};
}

nlohmann::json Complex::to_json() const {
    nlohmann::json verts = nlohmann::json::array();
    for (std::size_t v = 0; v < num_vertices(); ++v) {
        auto p = point(v);
        verts.push_back(std::vector<double>(p.begin(), p.end()));
    }
    nlohmann::json cells = nlohmann::json::array();
    for (int k = 0; k <= dimension(); ++k) {
        nlohmann::json list = nlohmann::json::array();
        for (std::size_t c = 0; c < num_cells(k); ++c) {
            auto t = cell(k, static_cast<int>(c));
            list.push_back(std::vector<int>(t.begin(), t.end()));
        }
        cells.push_back(std::move(list));
    }
    nlohmann::json j{{"ambient_dim", ambient_}, {"vertices", verts}, {"cells", cells}};
    if (grid_) j["grid"] = grid_->to_json();
    return j;
}

std::shared_ptr<const Complex> Complex::from_json(const nlohmann::json& j) {
    try {
        ComplexBuilder b(j.at("ambient_dim").get<int>());
        for (const auto& v : j.at("vertices")) b.add_vertex(v.get<std::vector<double>>());
        const auto& cells = j.at("cells");
        for (std::size_t k = 1; k < cells.size(); ++k) {
            std::size_t expected = 0;
            for (const auto& c : cells[k]) {
                auto t = c.get<std::vector<int>>();
                if (t.size() != k + 1) throw InputError("cell has wrong vertex count");
                auto [id, sign] = b.add_cell(t);
                if (static_cast<std::size_t>(id) != expected++ || sign != 1)
                    throw InputError("complex JSON cells are not closed under faces in listed order");
            }
        }
        if (j.contains("grid")) b.set_grid(GridSpec::from_json(j.at("grid")));
        return b.build();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad complex JSON: ") + e.what());
    }
}

ComplexBuilder::ComplexBuilder(int ambient_dim) : ambient_(ambient_dim) {
    if (ambient_ < 1) throw InputError("ambient dimension must be positive");
    cells_.resize(1);
    lookup_.resize(1);
}

int ComplexBuilder::add_vertex(std::span<const double> point) {
    if (point.size() != static_cast<std::size_t>(ambient_))
        throw InputError("vertex has wrong ambient dimension");
    int v = static_cast<int>(coords_.size() / static_cast<std::size_t>(ambient_));
    coords_.insert(coords_.end(), point.begin(), point.end());
    cells_[0].push_back(v);
    lookup_[0].emplace(std::vector<int>{v}, v);
    return v;
}

std::pair<int, int> ComplexBuilder::add_cell(std::span<const int> vertices) {
    int k = static_cast<int>(vertices.size()) - 1;
    if (k < 0) throw InputError("empty cell");
    int nv = static_cast<int>(coords_.size() / static_cast<std::size_t>(ambient_));
    for (int v : vertices)
        if (v < 0 || v >= nv) throw InputError("cell references unknown vertex " + std::to_string(v));
    std::vector<int> key(vertices.begin(), vertices.end());
    std::sort(key.begin(), key.end());
    if (std::adjacent_find(key.begin(), key.end()) != key.end())
        throw InputError("cell has repeated vertices");
    if (static_cast<int>(cells_.size()) <= k) {
        cells_.resize(k + 1);
        lookup_.resize(k + 1);
    }
    if (auto it = lookup_[k].find(key); it != lookup_[k].end()) {
        std::span<const int> stored{cells_[k].data() + static_cast<std::size_t>(it->second) * (k + 1),
                                    static_cast<std::size_t>(k + 1)};
        return {it->second, permutation_sign(vertices, stored)};
    }
    if (k > 0) {
        std::vector<int> face;
        for (int i = 0; i <= k; ++i) {
            face.clear();
            for (int j = 0; j <= k; ++j)
                if (j != i) face.push_back(vertices[j]);
            std::sort(face.begin(), face.end());
            if (!lookup_[k - 1].count(face)) add_cell(face);
        }
    }
    int id = static_cast<int>(cells_[k].size() / static_cast<std::size_t>(k + 1));
    cells_[k].insert(cells_[k].end(), vertices.begin(), vertices.end());
    lookup_[k].emplace(std::move(key), id);
    return {id, 1};
}

void ComplexBuilder::set_vertex_boundary(int v, bool on_boundary) { vertex_boundary_[v] = on_boundary; }

void ComplexBuilder::ensure_dimension(int k) {
    if (static_cast<int>(cells_.size()) <= k) {
        cells_.resize(k + 1);
        lookup_.resize(k + 1);
    }
}

std::shared_ptr<const Complex> ComplexBuilder::build() {
    auto c = std::make_shared<Complex>();
    c->ambient_ = ambient_;
    c->coords_ = coords_;
    c->cells_ = cells_;
    c->lookup_ = lookup_;
    c->grid_ = grid_;
    const int top = c->dimension();
    c->facets_.resize(top + 1);
    c->cofaces_.resize(top + 1);
    c->volumes_.resize(top + 1);
    c->boundary_.resize(top + 1);
    for (int k = 0; k <= top; ++k) {
        auto n = c->num_cells(k);
        c->facets_[k].resize(k >= 1 ? n : 0);
        c->cofaces_[k].resize(n);
        c->volumes_[k].resize(n);
        c->boundary_[k].assign(n, 0);
    }
    std::vector<int> face;
    for (int k = 1; k <= top; ++k) {
        for (std::size_t id = 0; id < c->num_cells(k); ++id) {
            auto t = c->cell(k, static_cast<int>(id));
            for (int i = 0; i <= k; ++i) {
                face.clear();
                for (int j = 0; j <= k; ++j)
                    if (j != i) face.push_back(t[j]);
                auto found = c->find(k - 1, face);
                int sign = ((i % 2) ? -1 : 1) * found->second;
                c->facets_[k][id].push_back({found->first, sign});
                c->cofaces_[k - 1][found->first].push_back({static_cast<int>(id), sign});
            }
        }
    }
    for (int k = 0; k <= top; ++k) {
        for (std::size_t id = 0; id < c->num_cells(k); ++id) {
            if (k == 0) {
                c->volumes_[0][id] = 1.0;
                continue;
            }
            auto t = c->cell(k, static_cast<int>(id));
            Eigen::MatrixXd e(ambient_, k);
            auto p0 = c->point(t[0]);
            for (int j = 0; j < k; ++j) {
                auto pj = c->point(t[j + 1]);
                for (int i = 0; i < ambient_; ++i) e(i, j) = pj[i] - p0[i];
            }
            double gram = (e.transpose() * e).determinant();
            double fact = std::tgamma(k + 1.0);
            c->volumes_[k][id] = std::sqrt(std::max(gram, 0.0)) / fact;
        }
    }
    if (top == ambient_ && top >= 1) {
        c->orientation_.resize(c->num_cells(top));
        Eigen::MatrixXd m(ambient_, ambient_);
        for (std::size_t id = 0; id < c->num_cells(top); ++id) {
            auto vs = c->cell(top, static_cast<int>(id));
            auto p0 = c->point(vs[0]);
            for (int j = 0; j < top; ++j) {
                auto pj = c->point(vs[j + 1]);
                for (int i = 0; i < ambient_; ++i) m(i, j) = pj[i] - p0[i];
            }
            c->orientation_[id] = m.determinant() > 0 ? 1 : -1;
        }
    }
    // Topological boundary: closure of the top-codimension-1 faces with a
    // single coface.
    if (top >= 1) {
        std::vector<std::pair<int, int>> stack;
        for (std::size_t id = 0; id < c->num_cells(top - 1); ++id)
            if (c->cofaces_[top - 1][id].size() == 1) stack.emplace_back(top - 1, static_cast<int>(id));
        while (!stack.empty()) {
            auto [k, id] = stack.back();
            stack.pop_back();
            if (c->boundary_[k][id]) continue;
            c->boundary_[k][id] = 1;
            if (k >= 1)
                for (const auto& f : c->facets_[k][id]) stack.emplace_back(k - 1, f.facet);
        }
    }
    for (auto [v, flag] : vertex_boundary_) c->boundary_[0].at(v) = flag ? 1 : 0;
    return c;
}

std::shared_ptr<const Complex> build_grid_complex(const GridSpec& grid) {
    if (grid.dim != 2 && grid.dim != 3) throw InputError("grid dimension must be 2 or 3");
    for (int i = 0; i < grid.dim; ++i) {
        if (!(grid.spacing[i] > 0) || !std::isfinite(grid.spacing[i]))
            throw InputError("grid spacing must be positive");
        if (grid.counts[i] < 1) throw InputError("grid counts must be >= 1");
    }
    ComplexBuilder b(grid.dim);
    for (std::size_t v = 0; v < grid.num_vertices(); ++v) {
        auto p = grid.vertex_point(v);
        b.add_vertex(std::span<const double>(p.data(), grid.dim));
    }
    std::vector<int> axes(grid.dim);
    std::array<int, 3> cnt{grid.counts[0], grid.dim > 1 ? grid.counts[1] : 1,
                           grid.dim > 2 ? grid.counts[2] : 1};
    std::vector<int> simplex;
    for (int k = 0; k < cnt[2]; ++k) {
        for (int j = 0; j < cnt[1]; ++j) {
            for (int i = 0; i < cnt[0]; ++i) {
                std::iota(axes.begin(), axes.end(), 0);
                do {
                    std::array<int, 3> ijk{i, j, k};
                    simplex.assign(1, static_cast<int>(grid.vertex_index(ijk)));
                    for (int a : axes) {
                        ++ijk[a];
                        simplex.push_back(static_cast<int>(grid.vertex_index(ijk)));
                    }
                    b.add_cell(simplex);
                } while (std::next_permutation(axes.begin(), axes.end()));
            }
        }
    }
    b.set_grid(grid);
    return b.build();
}

namespace {

// det[direction, facet edge vectors] in R^d.
double frame_det(const Complex& c, int facet, std::span<const double> dir) {
    int d = c.ambient_dim();
    auto t = c.cell(d - 1, facet);
    Eigen::MatrixXd m(d, d);
    auto p0 = c.point(t[0]);
    for (int i = 0; i < d; ++i) m(i, 0) = dir[i];
    for (int j = 1; j < d; ++j) {
        auto pj = c.point(t[j]);
        for (int i = 0; i < d; ++i) m(i, j) = pj[i] - p0[i];
    }
    return m.determinant();
}

}  // namespace

std::shared_ptr<const DualComplex> build_dual_complex(std::shared_ptr<const Complex> primal) {
    const int d = primal->dimension();
    if (d != primal->ambient_dim() || d < 1) throw InputError("dual complex needs a full-dimensional complex");
    auto out = std::make_shared<DualComplex>();
    out->primal = primal;
    ComplexBuilder b(d);
    const auto ntop = primal->num_cells(d);
    const auto nfacet = primal->num_cells(d - 1);
    out->vertex_of_top.resize(ntop);
    out->vertex_of_bfacet.assign(nfacet, -1);
    for (std::size_t t = 0; t < ntop; ++t) {
        auto bc = primal->barycenter(d, static_cast<int>(t));
        out->vertex_of_top[t] = b.add_vertex(bc);
        out->top_of_vertex.push_back(static_cast<int>(t));
    }
    for (std::size_t f = 0; f < nfacet; ++f) {
        if (primal->cofaces(d - 1, static_cast<int>(f)).size() == 1) {
            auto bc = primal->barycenter(d - 1, static_cast<int>(f));
            out->vertex_of_bfacet[f] = b.add_vertex(bc);
            out->top_of_vertex.push_back(-1);
        }
    }
    out->edge_of_facet.assign(nfacet, -1);
    std::vector<double> dir(d);
    for (std::size_t f = 0; f < nfacet; ++f) {
        const auto& co = primal->cofaces(d - 1, static_cast<int>(f));
        int a = out->vertex_of_top[co[0].facet];
        int bb = co.size() > 1 ? out->vertex_of_top[co[1].facet] : out->vertex_of_bfacet[f];
        // This builder adds vertices for dual points only; look them up by id.
        std::vector<double> pa = co.size() > 0 ? primal->barycenter(d, co[0].facet) : std::vector<double>{};
        std::vector<double> pb = co.size() > 1 ? primal->barycenter(d, co[1].facet)
                                               : primal->barycenter(d - 1, static_cast<int>(f));
        for (int i = 0; i < d; ++i) dir[i] = pb[i] - pa[i];
        if (frame_det(*primal, static_cast<int>(f), dir) < 0) std::swap(a, bb);
        std::array<int, 2> e{a, bb};
        auto [id, sign] = b.add_cell(e);
        out->edge_of_facet[f] = id;
        out->facet_of_edge.push_back(static_cast<int>(f));
        (void)sign;
    }
    for (std::size_t v = 0; v < out->top_of_vertex.size(); ++v)
        b.set_vertex_boundary(static_cast<int>(v), out->top_of_vertex[v] < 0);
    out->dual = b.build();
    return out;
}

}  // namespace flatchain
