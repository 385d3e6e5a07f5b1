#include "flatchain/field.hpp"

#include <cmath>

#include "flatchain/error.hpp"

namespace flatchain {

SampledField::SampledField(const GridSpec& grid, int m, std::vector<double> values)
    : mesh_(build_dual_complex(build_grid_complex(grid))), m_(m), values_(std::move(values)) {
    init();
}

SampledField::SampledField(std::shared_ptr<const DualComplex> mesh, int m, std::vector<double> values)
    : mesh_(std::move(mesh)), m_(m), values_(std::move(values)) {
    if (!mesh_ || !mesh_->primal->grid()) throw InputError("field needs a grid triangulation");
    init();
}

void SampledField::init() {
    if (m_ < 1) throw InputError("field target dimension must be positive");
    if (values_.size() != complex().num_vertices() * static_cast<std::size_t>(m_))
        throw InputError("field has " + std::to_string(values_.size()) + " values, expected " +
                         std::to_string(complex().num_vertices() * static_cast<std::size_t>(m_)));
    sup_ = 0;
    for (std::size_t v = 0; v < complex().num_vertices(); ++v) {
        double s = 0;
        for (double x : value(v)) {
            if (!std::isfinite(x)) throw InputError("field contains non-finite samples");
            s += x * x;
        }
        sup_ = std::max(sup_, std::sqrt(s));
    }
}

Eigen::MatrixXd SampledField::gradient(int top) const {
    const int d = dim();
    auto cell = complex().cell(d, top);
    Eigen::MatrixXd dx(d, d), du(m_, d);
    auto p0 = complex().point(cell[0]);
    auto u0 = value(cell[0]);
    for (int j = 0; j < d; ++j) {
        auto pj = complex().point(cell[j + 1]);
        auto uj = value(cell[j + 1]);
        for (int i = 0; i < d; ++i) dx(i, j) = pj[i] - p0[i];
        for (int i = 0; i < m_; ++i) du(i, j) = uj[i] - u0[i];
    }
    return du * dx.inverse();
}

std::vector<double> SampledField::interpolate(int top, std::span<const double> weights) const {
    auto cell = complex().cell(dim(), top);
    std::vector<double> out(m_, 0.0);
    for (std::size_t j = 0; j < cell.size(); ++j) {
        auto uj = value(cell[j]);
        for (int i = 0; i < m_; ++i) out[i] += weights[j] * uj[i];
    }
    return out;
}

double SampledField::gradient_norm_power(double p) const {
    double s = 0;
    const int d = dim();
    for (std::size_t t = 0; t < complex().num_cells(d); ++t)
        s += complex().volume(d, static_cast<int>(t)) * std::pow(gradient(static_cast<int>(t)).norm(), p);
    return s;
}

}  // namespace flatchain
