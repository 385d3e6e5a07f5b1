#include "flatchain/lp.hpp"

#include <algorithm>
#include <cmath>

namespace flatchain::lp {

namespace {

class Tableau {
public:
    Tableau(const Problem& p, const Options& opt) : opt_(opt), m_(p.rows), n_(p.cols), w_(p.cols + p.rows) {
        t_.assign(static_cast<std::size_t>(m_) * w_, 0.0);
        beta_.assign(m_, 0.0);
        ub_.assign(w_, 0.0);
        at_upper_.assign(w_, 0);
        basis_.resize(m_);
        is_basic_.assign(w_, -1);
        for (int j = 0; j < n_; ++j) ub_[j] = p.upper[j] - p.lower[j];
        for (int i = 0; i < m_; ++i) {
            double rhs = p.b[i];
            for (int j = 0; j < n_; ++j) rhs -= p.at(i, j) * p.lower[j];
            double sign = rhs < 0 ? -1.0 : 1.0;
            for (int j = 0; j < n_; ++j) at(i, j) = sign * p.at(i, j);
            at(i, n_ + i) = 1.0;
            beta_[i] = sign * rhs;
            basis_[i] = n_ + i;
            is_basic_[n_ + i] = i;
            ub_[n_ + i] = kInf;
        }
    }

    bool bounds_consistent() const {
        for (int j = 0; j < n_; ++j)
            if (ub_[j] < -opt_.tolerance) return false;
        return true;
    }

    // Runs simplex iterations for the given cost vector (length w_).
    Status run(const std::vector<double>& cost, int& iterations) {
        cost_ = cost;
        reduced_.assign(w_, 0.0);
        for (int j = 0; j < w_; ++j) {
            double d = cost_[j];
            for (int i = 0; i < m_; ++i) d -= cost_[basis_[i]] * at(i, j);
            reduced_[j] = d;
        }
        int degenerate_run = 0;
        bool bland = false;
        const double tol = opt_.tolerance;
        while (true) {
            if (iterations >= opt_.max_iterations) return Status::kIterationLimit;
            int enter = -1;
            double best = 0;
            for (int j = 0; j < w_; ++j) {
                if (is_basic_[j] >= 0 || ub_[j] <= tol) continue;
                double d = reduced_[j];
                double score = at_upper_[j] ? d : -d;
                if (score <= tol) continue;
                if (bland) {
                    enter = j;
                    break;
                }
                if (score > best) {
                    best = score;
                    enter = j;
                }
            }
            if (enter < 0) return Status::kOptimal;
            ++iterations;
            const double s = at_upper_[enter] ? -1.0 : 1.0;
            double theta = ub_[enter];
            int leave_row = -1;
            bool leave_to_upper = false;
            for (int i = 0; i < m_; ++i) {
                double alpha = at(i, enter);
                double change = -s * alpha;  // rate of change of the basic variable
                double limit;
                bool to_upper;
                if (change < -tol) {
                    limit = beta_[i] / -change;
                    to_upper = false;
                } else if (change > tol && ub_[basis_[i]] < kInf) {
                    limit = (ub_[basis_[i]] - beta_[i]) / change;
                    to_upper = true;
                } else {
                    continue;
                }
                limit = std::max(limit, 0.0);
                bool better = limit < theta - tol ||
                              (limit <= theta + tol && leave_row >= 0 && bland && basis_[i] < basis_[leave_row]) ||
                              (leave_row < 0 && limit <= theta + tol && limit < theta);
                if (better || (leave_row < 0 && limit < theta)) {
                    theta = limit;
                    leave_row = i;
                    leave_to_upper = to_upper;
                }
            }
            if (theta == kInf) return Status::kUnbounded;
            degenerate_run = theta < tol ? degenerate_run + 1 : 0;
            if (degenerate_run > 50) bland = true;
            for (int i = 0; i < m_; ++i) beta_[i] -= s * at(i, enter) * theta;
            if (leave_row < 0) {
                at_upper_[enter] = !at_upper_[enter];
                continue;
            }
            double entering_value = at_upper_[enter] ? ub_[enter] - theta : theta;
            int leaving = basis_[leave_row];
            pivot(leave_row, enter);
            beta_[leave_row] = entering_value;
            at_upper_[leaving] = leave_to_upper ? 1 : 0;
            at_upper_[enter] = 0;
        }
    }

    double artificial_sum() const {
        double s = 0;
        for (int i = 0; i < m_; ++i)
            if (basis_[i] >= n_) s += beta_[i];
        return s;
    }

    // After phase 1: pivot zero-valued artificials out of the basis where
    // possible and fix every artificial at zero.
    void retire_artificials() {
        for (int i = 0; i < m_; ++i) {
            if (basis_[i] < n_) continue;
            int best = -1;
            double mag = 1e-9;
            for (int j = 0; j < n_; ++j) {
                if (is_basic_[j] >= 0) continue;
                if (std::abs(at(i, j)) > mag) {
                    mag = std::abs(at(i, j));
                    best = j;
                }
            }
            if (best < 0) continue;
            double value = at_upper_[best] ? ub_[best] : 0.0;
            int leaving = basis_[i];
            pivot(i, best);
            beta_[i] = value;
            at_upper_[leaving] = 0;
            at_upper_[best] = 0;
        }
        for (int j = n_; j < w_; ++j) ub_[j] = 0.0;
    }

    std::vector<double> values() const {
        std::vector<double> x(n_, 0.0);
        for (int j = 0; j < n_; ++j) x[j] = at_upper_[j] ? ub_[j] : 0.0;
        for (int i = 0; i < m_; ++i)
            if (basis_[i] < n_) x[basis_[i]] = beta_[i];
        return x;
    }

    int width() const { return w_; }

private:
    double& at(int i, int j) { return t_[static_cast<std::size_t>(i) * w_ + j]; }
    double at(int i, int j) const { return t_[static_cast<std::size_t>(i) * w_ + j]; }

    void pivot(int r, int j) {
        double piv = at(r, j);
        double* row = &t_[static_cast<std::size_t>(r) * w_];
        for (int k = 0; k < w_; ++k) row[k] /= piv;
        row[j] = 1.0;
        for (int i = 0; i < m_; ++i) {
            if (i == r) continue;
            double f = at(i, j);
            if (f == 0.0) continue;
            double* other = &t_[static_cast<std::size_t>(i) * w_];
            for (int k = 0; k < w_; ++k) other[k] -= f * row[k];
            other[j] = 0.0;
        }
        if (!reduced_.empty()) {
            double f = reduced_[j];
            for (int k = 0; k < w_; ++k) reduced_[k] -= f * row[k];
            reduced_[j] = 0.0;
        }
        is_basic_[basis_[r]] = -1;
        basis_[r] = j;
        is_basic_[j] = r;
    }

    Options opt_;
    int m_, n_, w_;
    std::vector<double> t_;
    std::vector<double> beta_;
    std::vector<double> ub_;
    std::vector<char> at_upper_;
    std::vector<int> basis_;
    std::vector<int> is_basic_;
    std::vector<double> cost_;
    std::vector<double> reduced_;
};

}  // namespace

Solution solve(const Problem& p, const Options& options) {
    Solution sol;
    Tableau tab(p, options);
    if (!tab.bounds_consistent()) return sol;
    std::vector<double> phase1(tab.width(), 0.0);
    for (int j = p.cols; j < tab.width(); ++j) phase1[j] = 1.0;
    auto st = tab.run(phase1, sol.iterations);
    if (st == Status::kIterationLimit) {
        sol.status = st;
        return sol;
    }
    double scale = 1.0;
    for (double v : p.b) scale = std::max(scale, std::abs(v));
    if (tab.artificial_sum() > 1e-7 * scale) {
        sol.status = Status::kInfeasible;
        return sol;
    }
    tab.retire_artificials();
    std::vector<double> phase2(tab.width(), 0.0);
    std::copy(p.cost.begin(), p.cost.end(), phase2.begin());
    st = tab.run(phase2, sol.iterations);
    sol.status = st;
    if (st != Status::kOptimal) return sol;
    sol.x = tab.values();
    for (int j = 0; j < p.cols; ++j) sol.x[j] += p.lower[j];
    sol.objective = 0;
    for (int j = 0; j < p.cols; ++j) sol.objective += p.cost[j] * sol.x[j];
    return sol;
}

}  // namespace flatchain::lp
