#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "flatchain/mesh.hpp"

namespace flatchain {

/// Grid samples of a map Omega -> R^m, read as the piecewise-linear
/// interpolant over the Kuhn triangulation of the grid.
class SampledField {
public:
    SampledField(const GridSpec& grid, int m, std::vector<double> values);
    /// Reuses an existing triangulation (and its dual) of the same grid.
    SampledField(std::shared_ptr<const DualComplex> mesh, int m, std::vector<double> values);

    const GridSpec& grid() const { return *complex().grid(); }
    int dim() const { return complex().dimension(); }
    int m() const { return m_; }
    const Complex& complex() const { return *mesh_->primal; }
    const std::shared_ptr<const Complex>& complex_ptr() const { return mesh_->primal; }
    const std::shared_ptr<const DualComplex>& mesh() const { return mesh_; }

    std::span<const double> value(std::size_t v) const { return {values_.data() + v * m_, static_cast<std::size_t>(m_)}; }
    const std::vector<double>& values() const { return values_; }

    /// Lambda = max over vertices of |u|.
    double sup_norm() const { return sup_; }
    /// Du on a top simplex, m x d.
    Eigen::MatrixXd gradient(int top) const;
    /// PL value at a point of a top simplex given barycentric weights.
    std::vector<double> interpolate(int top, std::span<const double> weights) const;
    /// sum over top simplices of vol * |Du|_F^p (exact for the PL field).
    double gradient_norm_power(double p) const;

private:
    void init();

    std::shared_ptr<const DualComplex> mesh_;
    int m_;
    std::vector<double> values_;
    double sup_ = 0;
};

/// Samples a function on the vertices of a grid.
template <class F>
std::vector<double> sample_grid(const GridSpec& grid, int m, F&& f) {
    std::vector<double> out(grid.num_vertices() * static_cast<std::size_t>(m));
    std::vector<double> x(grid.dim);
    for (std::size_t v = 0; v < grid.num_vertices(); ++v) {
        auto p = grid.vertex_point(v);
        for (int i = 0; i < grid.dim; ++i) x[i] = p[i];
        f(std::span<const double>(x), std::span<double>(out.data() + v * m, static_cast<std::size_t>(m)));
    }
    return out;
}

}  // namespace flatchain
