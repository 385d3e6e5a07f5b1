#include "flatchain/geometry.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace flatchain::geometry {

namespace {

// Distance between the affine hulls restricted to faces given by bitmasks;
// returns +inf when the minimizer falls outside either face.
double face_pair_distance(const Simplex& a, unsigned ma, const Simplex& b, unsigned mb) {
    const int d = a.dim;
    std::vector<int> ia, ib;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (ma & (1u << i)) ia.push_back(static_cast<int>(i));
    for (std::size_t i = 0; i < b.size(); ++i)
        if (mb & (1u << i)) ib.push_back(static_cast<int>(i));
    const int na = static_cast<int>(ia.size()) - 1;
    const int nb = static_cast<int>(ib.size()) - 1;
    Eigen::VectorXd a0 = Eigen::Map<const Eigen::VectorXd>(a.point(ia[0]).data(), d);
    Eigen::VectorXd b0 = Eigen::Map<const Eigen::VectorXd>(b.point(ib[0]).data(), d);
    Eigen::MatrixXd m(d, na + nb);
    for (int j = 0; j < na; ++j)
        m.col(j) = Eigen::Map<const Eigen::VectorXd>(a.point(ia[j + 1]).data(), d) - a0;
    for (int j = 0; j < nb; ++j)
        m.col(na + j) = b0 - Eigen::Map<const Eigen::VectorXd>(b.point(ib[j + 1]).data(), d);
    Eigen::VectorXd rhs = b0 - a0;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(na + nb);
    if (na + nb > 0) {
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(m);
        x = cod.solve(rhs);
    }
    constexpr double kTol = -1e-12;
    double sa = 0, sb = 0;
    for (int j = 0; j < na; ++j) {
        if (x[j] < kTol) return std::numeric_limits<double>::infinity();
        sa += x[j];
    }
    for (int j = 0; j < nb; ++j) {
        if (x[na + j] < kTol) return std::numeric_limits<double>::infinity();
        sb += x[na + j];
    }
    if (sa > 1 - kTol || sb > 1 - kTol) return std::numeric_limits<double>::infinity();
    return (m * x - rhs).norm();
}

}  // namespace

double simplex_distance(const Simplex& a, const Simplex& b) {
    double best = std::numeric_limits<double>::infinity();
    const unsigned fa = (1u << a.size()) - 1, fb = (1u << b.size()) - 1;
    for (unsigned ma = 1; ma <= fa; ++ma)
        for (unsigned mb = 1; mb <= fb; ++mb) best = std::min(best, face_pair_distance(a, ma, b, mb));
    return best;
}

double det(std::span<const double> colmajor, int n) {
    switch (n) {
    case 0: return 1.0;
    case 1: return colmajor[0];
    case 2: return colmajor[0] * colmajor[3] - colmajor[2] * colmajor[1];
    case 3:
        return colmajor[0] * (colmajor[4] * colmajor[8] - colmajor[7] * colmajor[5]) -
               colmajor[3] * (colmajor[1] * colmajor[8] - colmajor[7] * colmajor[2]) +
               colmajor[6] * (colmajor[1] * colmajor[5] - colmajor[4] * colmajor[2]);
    default: return Eigen::Map<const Eigen::MatrixXd>(colmajor.data(), n, n).determinant();
    }
}

}  // namespace flatchain::geometry
