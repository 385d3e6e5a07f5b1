#pragma once

#include <limits>
#include <vector>

namespace flatchain::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// minimize c^T x  subject to  A x = b,  lower <= x <= upper.
/// Lower bounds must be finite; upper bounds may be kInf. A is dense,
/// row-major.
struct Problem {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;
    std::vector<double> b;
    std::vector<double> cost;
    std::vector<double> lower;
    std::vector<double> upper;

    Problem(int rows_, int cols_)
        : rows(rows_), cols(cols_), a(static_cast<std::size_t>(rows_) * cols_, 0.0), b(rows_, 0.0),
          cost(cols_, 0.0), lower(cols_, 0.0), upper(cols_, kInf) {}

    double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
};

enum class Status { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct Solution {
    Status status = Status::kInfeasible;
    std::vector<double> x;
    double objective = 0;
    int iterations = 0;
};

struct Options {
    double tolerance = 1e-9;
    int max_iterations = 200000;
};

/// Two-phase bounded-variable primal simplex on a dense tableau. Dantzig
/// pricing, switching to Bland's rule after a run of degenerate pivots.
Solution solve(const Problem& problem, const Options& options = {});

}  // namespace flatchain::lp
