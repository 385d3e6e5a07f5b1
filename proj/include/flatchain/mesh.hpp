#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace flatchain {

/// Axis-aligned box [origin, origin + spacing * counts] cut into counts[i]
/// cells along each axis.
struct GridSpec {
    int dim = 2;
    std::array<double, 3> origin{0, 0, 0};
    std::array<double, 3> spacing{1, 1, 1};
    std::array<int, 3> counts{1, 1, 1};

    std::size_t num_vertices() const;
    std::size_t vertex_index(std::array<int, 3> ijk) const;
    std::array<int, 3> vertex_ijk(std::size_t v) const;
    std::array<double, 3> vertex_point(std::size_t v) const;
    double box_volume() const;

    nlohmann::json to_json() const;
    static GridSpec from_json(const nlohmann::json& j);
    /// Compares the first `dim` entries only.
    friend bool operator==(const GridSpec& a, const GridSpec& b) {
        if (a.dim != b.dim) return false;
        for (int i = 0; i < a.dim; ++i)
            if (a.origin[i] != b.origin[i] || a.spacing[i] != b.spacing[i] || a.counts[i] != b.counts[i])
                return false;
        return true;
    }
};

struct Incidence {
    int facet;
    int sign;
    friend bool operator==(const Incidence&, const Incidence&) = default;
};

/// A finite oriented simplicial complex embedded in R^D. Every k-cell is an
/// ordered vertex tuple; the order fixes its orientation. All faces of a
/// cell are cells. Immutable once built; share through
/// std::shared_ptr<const Complex>.
class Complex {
public:
    int dimension() const { return static_cast<int>(cells_.size()) - 1; }
    int ambient_dim() const { return ambient_; }
    std::size_t num_vertices() const { return coords_.size() / static_cast<std::size_t>(ambient_); }
    std::size_t num_cells(int k) const;
    std::size_t total_cells() const;

    std::span<const double> point(std::size_t v) const {
        return {coords_.data() + v * ambient_, static_cast<std::size_t>(ambient_)};
    }
    std::span<const int> cell(int k, int id) const;

    /// Faces of a k-cell (k >= 1) with signs from the omit-the-i-th-vertex
    /// rule (-1)^i, adjusted by the permutation parity of the stored facet.
    const std::vector<Incidence>& boundary_incidence(int k, int id) const;
    /// (k+1)-cells having this k-cell as a facet, with the incidence sign.
    const std::vector<Incidence>& cofaces(int k, int id) const;

    /// k-dimensional Hausdorff measure of the cell; 1 for vertices.
    double volume(int k, int id) const;
    /// Centroid of the cell.
    std::vector<double> barycenter(int k, int id) const;
    /// Sign of the top cell's orientation relative to the standard orientation
    /// of R^D; only defined for k == D.
    int orientation(int k, int id) const;

    /// True when the cell lies in the topological boundary of the complex.
    bool on_boundary(int k, int id) const;

    /// Id of the k-cell with the given vertex set together with the sign
    /// relating the given order to the stored one.
    std::optional<std::pair<int, int>> find(int k, std::span<const int> vertices) const;

    const std::optional<GridSpec>& grid() const { return grid_; }

    nlohmann::json to_json() const;
    static std::shared_ptr<const Complex> from_json(const nlohmann::json& j);

private:
    friend class ComplexBuilder;

    int ambient_ = 0;
    std::vector<double> coords_;
    std::vector<std::vector<int>> cells_;  // flattened tuples, stride k+1
    std::vector<std::vector<std::vector<Incidence>>> facets_;
    std::vector<std::vector<std::vector<Incidence>>> cofaces_;
    std::vector<std::vector<double>> volumes_;
    std::vector<std::vector<char>> boundary_;
    std::vector<signed char> orientation_;  // top cells when full-dimensional
    std::vector<std::map<std::vector<int>, int>> lookup_;
    std::optional<GridSpec> grid_;
};

/// Incremental construction of a Complex. Adding a cell adds its missing
/// faces in sorted vertex order.
class ComplexBuilder {
public:
    explicit ComplexBuilder(int ambient_dim);

    int add_vertex(std::span<const double> point);
    /// Returns (id, sign) where sign relates the given tuple to the stored cell.
    std::pair<int, int> add_cell(std::span<const int> vertices);
    void set_grid(const GridSpec& grid) { grid_ = grid; }
    /// Makes the built complex at least k-dimensional even without k-cells.
    void ensure_dimension(int k);
    /// Overrides the topological boundary rule for vertices.
    void set_vertex_boundary(int v, bool on_boundary);

    std::shared_ptr<const Complex> build();

private:
    int ambient_;
    std::vector<double> coords_;
    std::vector<std::vector<int>> cells_;
    std::vector<std::map<std::vector<int>, int>> lookup_;
    std::map<int, bool> vertex_boundary_;
    std::optional<GridSpec> grid_;
};

/// Kuhn/Freudenthal triangulation of a box: 2 triangles per square,
/// 6 tetrahedra per cube, all sharing the main diagonal direction so face
/// triangulations of neighbours agree. Throws InputError on non-positive
/// spacing or counts, or dim outside {2, 3}.
std::shared_ptr<const Complex> build_grid_complex(const GridSpec& grid);

/// Dual cells of dimension 0 and 1 of a pure d-complex. Dual vertices are the
/// top cells (interior) followed by one vertex per boundary facet; dual edges
/// are the codimension-1 primal faces. Every dual edge is stored so that
/// (dual edge direction, primal face orientation) is a positively oriented
/// frame of R^d, which makes coefficients on dual cells equal to intersection
/// indices with the primal faces.
struct DualComplex {
    std::shared_ptr<const Complex> primal;
    std::shared_ptr<const Complex> dual;
    std::vector<int> vertex_of_top;      // primal top cell -> dual vertex
    std::vector<int> vertex_of_bfacet;   // primal facet -> boundary dual vertex or -1
    std::vector<int> edge_of_facet;      // primal facet -> dual edge
    std::vector<int> facet_of_edge;      // dual edge -> primal facet
    std::vector<int> top_of_vertex;      // dual vertex -> primal top cell or -1

    bool interior_vertex(int v) const { return top_of_vertex[v] >= 0; }
};

std::shared_ptr<const DualComplex> build_dual_complex(std::shared_ptr<const Complex> primal);

/// Parity (+1/-1) of the permutation taking `from` to `to` (same elements).
int permutation_sign(std::span<const int> from, std::span<const int> to);

}  // namespace flatchain
