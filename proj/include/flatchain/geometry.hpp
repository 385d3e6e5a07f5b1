#pragma once

#include <span>
#include <vector>

namespace flatchain::geometry {

/// Points of a simplex, each of length `dim`, stored contiguously.
struct Simplex {
    int dim = 0;  // ambient dimension
    std::vector<double> pts;

    std::size_t size() const { return pts.size() / static_cast<std::size_t>(dim); }
    std::span<const double> point(std::size_t i) const {
        return {pts.data() + i * dim, static_cast<std::size_t>(dim)};
    }
};

/// Euclidean distance between two closed simplices in the same R^D, exact up
/// to floating point (enumerates face pairs and solves the affine
/// least-squares problem on each).
double simplex_distance(const Simplex& a, const Simplex& b);

/// Determinant of a small square matrix given column-major.
double det(std::span<const double> colmajor, int n);

}  // namespace flatchain::geometry
