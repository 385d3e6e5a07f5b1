#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flatchain/chain.hpp"
#include "flatchain/field.hpp"
#include "flatchain/target.hpp"

namespace flatchain {

enum class Backend { kPreimage, kLink };

std::string to_string(Backend b);
Backend backend_from_string(const std::string& s);

struct SingularOptions {
    /// Empty: preimage for sphere targets, link otherwise.
    std::optional<Backend> backend;
    /// Link backend on N-valued fields: retract the PL interpolant onto N
    /// along edges before subtracting y. Empty: on iff every sample lies
    /// within 1e-9 of N.
    std::optional<bool> n_valued;
    /// Seed for the jitter applied when y turns out degenerate.
    std::uint64_t jitter_seed = 0;
    int max_resamples = 8;
};

/// S_y(u) together with its provenance.
struct SingularChain {
    /// Preimage: chain on a complex built from the zero set.
    /// Link: chain on the dual complex of the field's grid.
    Chain chain;
    /// The same defect as a (d-k)-chain on the dual complex: for points the
    /// dual vertex of the containing top cell, for curves the signed
    /// crossings of the primal (d-1)-faces.
    Chain dual_chain;
    std::vector<double> y;
    Backend backend;
    int resamples = 0;
    bool n_valued = false;
    std::shared_ptr<const DualComplex> mesh;
    /// Preimage only: primal (d-1)-face carrying each vertex of chain's
    /// complex (-1 when the vertex is interior to a top cell), and the
    /// primal top cell containing each top cell of chain's complex.
    std::vector<int> vertex_face;
    std::vector<int> cell_owner;
};

/// The topological singular set of u at offset y.
SingularChain singular_set(const SampledField& u, const TargetManifold& t, std::span<const double> y,
                           const SingularOptions& options = {});

/// Lift increment of rho(u - y) along every primal edge, in the stored edge
/// orientation. Throws DegeneracyError when an edge path meets X.
std::vector<double> edge_transitions(const SampledField& u, const TargetManifold& t, std::span<const double> y,
                                     bool n_valued);

/// Whether every sample lies within tol of N.
bool field_is_n_valued(const SampledField& u, const TargetManifold& t, double tol = 1e-9);

/// d(S_y(u) restricted to the cells accepted by `inside`); the result is
/// checked to lie on the topological boundary of the region.
Chain singular_boundary(const SingularChain& s, const CellPredicate& inside);

/// Interior part of the boundary of S_y(u); zero by the cycle law.
Chain interior_boundary(const SingularChain& s);

struct Cobordism {
    /// pi_* S_y(U) for U(t, x) = (1 - t) u0 + t u1; a (d-k+1)-chain.
    Chain chain;
    /// The points S_y(u1) - S_y(u0) read off the prism ends, located as
    /// dual vertices of the field grid (chain on mesh->dual).
    Chain ends;
    /// dR with the parts on the lateral boundary of the prism dropped,
    /// located the same way.
    Chain interior_boundary_located;
    bool verified = false;
};

/// The field (1 - t) u0 + t u1 on one layer of prism cells over the grid of
/// u0 (d = 2 only), t the last coordinate.
SampledField homotopy_prism(const SampledField& u0, const SampledField& u1);

/// Cobordism between S_y(u0) and S_y(u1) for d = 2 and the circle target,
/// via the preimage backend on the prism [0,1] x Omega.
Cobordism homotopy_cobordism(const SampledField& u0, const SampledField& u1, const TargetManifold& t,
                             std::span<const double> y, const SingularOptions& options = {});

struct McOptions {
    int samples = 2000;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct JacobianReport {
    double estimate = 0;
    double standard_error = 0;
    double boundary_degree = 0;
    double radius = 0;
    int samples = 0;
    int degenerate_samples = 0;
    nlohmann::json to_json() const;
};

/// (1/omega_k) * integral of chi(S_y(u)) over y in B_{Lambda+1}.
JacobianReport jacobian_integral_check(const SampledField& u, const TargetManifold& t, const McOptions& mc = {});

/// Degree of u on the boundary of the grid box (winding for k = 2, solid
/// angle sum for k = 3).
double boundary_degree(const SampledField& u, const TargetManifold& t);

struct MassReport {
    double mass_integral = 0;
    double standard_error = 0;
    double gradient_norm = 0;  // int |Du|^k
    double ratio = 0;
    int samples = 0;
    nlohmann::json to_json() const;
};

/// Monte-Carlo integral of M(S_y(u)) over y against int |Du|^k.
MassReport mass_coarea_report(const SampledField& u, const TargetManifold& t, const McOptions& mc = {});

struct ContinuityReport {
    double flat_integral = 0;  // int F_Omega(S_y(u1) - S_y(u0)) dy
    double standard_error = 0;
    double rhs_integral = 0;   // int |u1 - u0| (|Du1|^{k-1} + |Du0|^{k-1})
    double ratio = 0;
    int samples = 0;
    int inexact_samples = 0;
    nlohmann::json to_json() const;
};

/// d = 2 only: relative flat distance of the singular sets on the full
/// dual graph (exact transport solver) against the gradient bound.
ContinuityReport continuity_report(const SampledField& u0, const SampledField& u1, const TargetManifold& t,
                                   const McOptions& mc = {});

struct StabilityReport {
    bool identical = true;
    int draws = 0;
    std::size_t defect_cells = 0;
    /// Pairs (index of draw, y) differing from the first draw.
    std::vector<std::pair<int, std::vector<double>>> mismatches;
    /// Loop classes of the raw vertex samples agree with S_y.
    bool loop_classes_agree = true;
    nlohmann::json to_json() const;
};

/// N-valued fields: S_y(u) is the same chain for |y| < 0.9 delta0.
StabilityReport n_valued_stability(const SampledField& u, const TargetManifold& t, const McOptions& mc = {});

/// Uniform point in the ball of radius r in R^m.
std::vector<double> sample_ball(int m, double r, std::mt19937_64& rng);

}  // namespace flatchain
