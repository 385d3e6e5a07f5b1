#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "flatchain/coeff.hpp"
#include "flatchain/error.hpp"

namespace flatchain {

/// Consecutive loop samples are too far apart to classify; the caller should
/// subdivide the segment starting at `segment`.
class RefineNeeded : public Error {
public:
    RefineNeeded(std::size_t segment, const std::string& what) : Error(what), segment(segment) {}
    std::size_t segment;
};

/// A target manifold N in R^m with exceptional set X, retraction rho onto N
/// off X, safe radius delta0 = dist(N, X) and loop classification into
/// pi_{k-1}(N) (k = 2 only).
class TargetManifold {
public:
    virtual ~TargetManifold() = default;

    virtual std::string name() const = 0;
    virtual int ambient_dim() const = 0;
    /// Codimension of the singular set.
    virtual int k() const = 0;
    virtual const CoefficientGroup& group() const = 0;
    virtual double delta0() const = 0;
    /// N is the unit sphere of R^m and X = {0}.
    virtual bool is_sphere() const { return false; }

    /// rho(z); DegeneracyError when z is within kDegenerateRadius of X.
    virtual std::vector<double> retract(std::span<const double> z) const = 0;
    virtual double dist_to_X(std::span<const double> z) const = 0;

    /// Consecutive points of N lie within the safe-step bound.
    virtual bool safe_step(std::span<const double> a, std::span<const double> b) const = 0;

    /// Class of a closed loop sampled on N (the last sample connects back to
    /// the first). Throws RefineNeeded on a safe-step violation.
    GroupElement classify_loop(const std::vector<std::vector<double>>& samples) const;

    /// Lift increment of rho along a continuous path z(t), t in [0, 1],
    /// found by bisecting until consecutive retracted points are close.
    /// Increments are additive along concatenated paths and change sign
    /// under reversal; class_of turns the sum around a loop into its class.
    double path_transition(const std::function<void(double, std::span<double>)>& path) const;

    /// Increment between two nearby points of N.
    virtual double step_transition(std::span<const double> a, std::span<const double> b) const = 0;
    virtual GroupElement class_of(double total) const = 0;

    static constexpr double kDegenerateRadius = 1e-10;

protected:
    /// Stricter than safe_step; used to stop bisection.
    virtual bool fine_step(std::span<const double> a, std::span<const double> b) const = 0;
};

/// S^{k-1} in R^k with X = {0}, rho(y) = y/|y|. k = 2 is the circle.
std::shared_ptr<const TargetManifold> sphere_target(int k);
/// RP^2 as unit-norm uniaxial Q-tensors in R^5.
std::shared_ptr<const TargetManifold> rp2q_target();
/// By name: circle, sphere3, rp2q.
std::shared_ptr<const TargetManifold> make_target(const std::string& name);

namespace rp2q {

/// dist(N, X) for the uniaxial embedding: (lambda1 - lambda2)/sqrt(2) at
/// Q(n), i.e. sqrt(3)/2.
inline constexpr double kDelta0 = 0.86602540378443864676;

/// Coordinates of sqrt(3/2) (n n^T - I/3) in the orthonormal basis of
/// traceless symmetric matrices.
std::array<double, 5> embed(const std::array<double, 3>& n);
/// Symmetric traceless matrix (row-major 3x3) of a point of R^5.
std::array<double, 9> to_matrix(std::span<const double> z);
/// Eigenvector of the top eigenvalue, sign normalized so its first
/// significant component is positive.
std::array<double, 3> director(std::span<const double> z);

}  // namespace rp2q

}  // namespace flatchain
