#include "flatchain/target.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace flatchain {

GroupElement TargetManifold::classify_loop(const std::vector<std::vector<double>>& samples) const {
    if (k() != 2) throw InputError("loop classification needs a k = 2 target, got " + name());
    if (samples.empty()) throw InputError("empty loop");
    double total = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& a = samples[i];
        const auto& b = samples[(i + 1) % samples.size()];
        if (a.size() != static_cast<std::size_t>(ambient_dim()) || b.size() != a.size())
            throw InputError("loop sample has wrong dimension");
        if (!safe_step(a, b)) throw RefineNeeded(i, "loop samples " + std::to_string(i) + " and next exceed the safe step");
        total += step_transition(a, b);
    }
    return class_of(total);
}

double TargetManifold::path_transition(const std::function<void(double, std::span<double>)>& path) const {
    if (k() != 2) throw InputError("path transitions need a k = 2 target, got " + name());
    const int m = ambient_dim();
    struct Sample {
        std::vector<double> z, r;
        double dist;
    };
    auto at = [&](double t) {
        Sample s;
        s.z.resize(m);
        path(t, s.z);
        s.r = retract(s.z);
        s.dist = dist_to_X(s.z);
        return s;
    };
    // A step is trusted once its chord is short against the distance to X:
    // the rotation of rho inside it is then bounded, so no half-turn can
    // hide between the samples.
    auto certified = [&](const Sample& a, const Sample& b) {
        double c = 0;
        for (int i = 0; i < m; ++i) c += (a.z[i] - b.z[i]) * (a.z[i] - b.z[i]);
        return std::sqrt(c) <= 0.25 * std::min(a.dist, b.dist) && fine_step(a.r, b.r);
    };
    auto rec = [&](auto&& self, double t0, double t1, const Sample& a, const Sample& b, int depth) -> double {
        if (certified(a, b)) return step_transition(a.r, b.r);
        if (depth > 48) throw DegeneracyError("path transition did not resolve after maximal refinement");
        double tm = 0.5 * (t0 + t1);
        auto mid = at(tm);
        return self(self, t0, tm, a, mid, depth + 1) + self(self, tm, t1, mid, b, depth + 1);
    };
    return rec(rec, 0.0, 1.0, at(0.0), at(1.0), 0);
}

namespace {

double norm(std::span<const double> z) {
    double s = 0;
    for (double v : z) s += v * v;
    return std::sqrt(s);
}

class SphereTarget final : public TargetManifold {
public:
    explicit SphereTarget(int k) : k_(k), group_(CoefficientGroup::integers()) {
        if (k < 2 || k > 3) throw InputError("sphere targets need k in {2, 3}");
    }
    std::string name() const override { return k_ == 2 ? "circle" : "sphere" + std::to_string(k_); }
    int ambient_dim() const override { return k_; }
    int k() const override { return k_; }
    const CoefficientGroup& group() const override { return group_; }
    double delta0() const override { return 1.0; }
    bool is_sphere() const override { return true; }

    std::vector<double> retract(std::span<const double> z) const override {
        double r = norm(z);
        if (r <= kDegenerateRadius) throw DegeneracyError("point within " + std::to_string(kDegenerateRadius) + " of X");
        std::vector<double> out(z.begin(), z.end());
        for (double& v : out) v /= r;
        return out;
    }
    double dist_to_X(std::span<const double> z) const override { return norm(z); }

    bool safe_step(std::span<const double> a, std::span<const double> b) const override {
        return std::abs(step_transition(a, b)) < std::numbers::pi / 2;
    }
    double step_transition(std::span<const double> a, std::span<const double> b) const override {
        if (k_ != 2) throw InputError("angle increments need the circle");
        return std::atan2(a[0] * b[1] - a[1] * b[0], a[0] * b[0] + a[1] * b[1]);
    }
    GroupElement class_of(double total) const override {
        double w = total / (2 * std::numbers::pi);
        double r = std::round(w);
        if (std::abs(w - r) > 1e-6) throw Error("loop increments do not close up: winding " + std::to_string(w));
        return group_.element({static_cast<std::int64_t>(r)});
    }

protected:
    bool fine_step(std::span<const double> a, std::span<const double> b) const override {
        return std::abs(step_transition(a, b)) < std::numbers::pi / 3;
    }

private:
    int k_;
    CoefficientGroup group_;
};

const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;
const double kInvSqrt6 = 1.0 / std::sqrt(6.0);

Eigen::Matrix3d matrix_of(std::span<const double> z) {
    auto m = rp2q::to_matrix(z);
    Eigen::Matrix3d out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out(i, j) = m[3 * i + j];
    return out;
}

struct Spectrum {
    Eigen::Vector3d values;  // descending
    Eigen::Vector3d top;
};

Spectrum spectrum(std::span<const double> z) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(matrix_of(z));
    Spectrum s;
    s.values = es.eigenvalues().reverse();
    s.top = es.eigenvectors().col(2);
    return s;
}

std::array<double, 3> canonical(const Eigen::Vector3d& v) {
    double sign = 1;
    for (int i = 0; i < 3; ++i) {
        if (std::abs(v[i]) > 1e-12) {
            sign = v[i] > 0 ? 1 : -1;
            break;
        }
    }
    Eigen::Vector3d n = sign * v.normalized();
    return {n[0], n[1], n[2]};
}

double dot3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

class Rp2qTarget final : public TargetManifold {
public:
    Rp2qTarget() : group_(CoefficientGroup::cyclic(2)) {}
    std::string name() const override { return "rp2q"; }
    int ambient_dim() const override { return 5; }
    int k() const override { return 2; }
    const CoefficientGroup& group() const override { return group_; }
    double delta0() const override { return rp2q::kDelta0; }

    std::vector<double> retract(std::span<const double> z) const override {
        if (z.size() != 5) throw InputError("rp2q points live in R^5");
        auto s = spectrum(z);
        if ((s.values[0] - s.values[1]) * kInvSqrt2 <= kDegenerateRadius)
            throw DegeneracyError("Q-tensor within " + std::to_string(kDegenerateRadius) + " of the eigenvalue tie locus");
        auto q = rp2q::embed(canonical(s.top));
        return {q.begin(), q.end()};
    }
    double dist_to_X(std::span<const double> z) const override {
        auto s = spectrum(z);
        return (s.values[0] - s.values[1]) * kInvSqrt2;
    }

    bool safe_step(std::span<const double> a, std::span<const double> b) const override {
        return std::abs(dot3(rp2q::director(a), rp2q::director(b))) > 1e-12;
    }
    double step_transition(std::span<const double> a, std::span<const double> b) const override {
        return dot3(rp2q::director(a), rp2q::director(b)) < 0 ? 1.0 : 0.0;
    }
    GroupElement class_of(double total) const override {
        auto r = static_cast<std::int64_t>(std::llround(total));
        return group_.element({r});
    }

protected:
    bool fine_step(std::span<const double> a, std::span<const double> b) const override {
        return std::abs(dot3(rp2q::director(a), rp2q::director(b))) > 0.5;
    }

private:
    CoefficientGroup group_;
};

}  // namespace

std::shared_ptr<const TargetManifold> sphere_target(int k) { return std::make_shared<SphereTarget>(k); }

std::shared_ptr<const TargetManifold> rp2q_target() { return std::make_shared<Rp2qTarget>(); }

std::shared_ptr<const TargetManifold> make_target(const std::string& name) {
    if (name == "circle") return sphere_target(2);
    if (name == "sphere3") return sphere_target(3);
    if (name == "rp2q") return rp2q_target();
    throw InputError("unknown target '" + name + "' (expected circle, sphere3 or rp2q)");
}

namespace rp2q {

std::array<double, 5> embed(const std::array<double, 3>& n) {
    double r2 = n[0] * n[0] + n[1] * n[1] + n[2] * n[2];
    if (r2 <= 0) throw InputError("director must be nonzero");
    double c = std::sqrt(1.5) / r2;
    double q00 = c * (n[0] * n[0] - r2 / 3), q11 = c * (n[1] * n[1] - r2 / 3), q22 = c * (n[2] * n[2] - r2 / 3);
    double q01 = c * n[0] * n[1], q02 = c * n[0] * n[2], q12 = c * n[1] * n[2];
    return {(q00 - q11) * kInvSqrt2, (2 * q22 - q00 - q11) * kInvSqrt6, 2 * q01 * kInvSqrt2, 2 * q02 * kInvSqrt2,
            2 * q12 * kInvSqrt2};
}

std::array<double, 9> to_matrix(std::span<const double> z) {
    if (z.size() != 5) throw InputError("rp2q points live in R^5");
    double a = z[0] * kInvSqrt2, b = z[1] * kInvSqrt6;
    double q00 = a - b, q11 = -a - b, q22 = 2 * b;
    double q01 = z[2] * kInvSqrt2, q02 = z[3] * kInvSqrt2, q12 = z[4] * kInvSqrt2;
    return {q00, q01, q02, q01, q11, q12, q02, q12, q22};
}

std::array<double, 3> director(std::span<const double> z) { return canonical(spectrum(z).top); }

}  // namespace rp2q

}  // namespace flatchain
