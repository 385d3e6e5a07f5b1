#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "flatchain/singular.hpp"

namespace flatchain {

/// Cut R with dR = S on the interior dual vertices, a dual 1-chain of the
/// grid. The witness is read off the homotopy cobordism between u and a
/// constant field (crossings of the prism's vertical faces); with `minimize`
/// it is replaced by the least-mass chain with the same interior boundary.
Chain cut_chain(const SampledField& u, const SingularChain& s, bool minimize = false);

struct LiftReport {
    double theta_variation = 0;  // sum over triangles of area * |grad theta|
    double jump_variation = 0;   // 2 pi M(R)
    double total_variation = 0;  // |D theta|(Omega)
    double du_variation = 0;     // |Du|(Omega)
    double ratio = 0;            // total / du
    double cut_mass = 0;
    double max_projection_error = 0;  // max |(cos, sin)(theta) - u/|u|| at vertices
    bool holonomy_consistent = true;
    nlohmann::json to_json() const;
};

struct LiftedField {
    std::vector<double> theta;
    Chain cut;
    /// Integer jump per primal edge: theta(b) - theta(a) equals the principal
    /// angle increment plus 2 pi * jump along the stored edge a -> b.
    std::vector<std::int64_t> jumps;
    LiftReport report;
};

/// Phase lifting of a circle-valued field on a planar grid by a
/// deterministic BFS spanning tree that adds 2 pi R(e*) on every edge e
/// crossing the cut. Throws Error when the holonomy around some triangle is
/// not cancelled by the cut (dR differs from the singular set).
LiftedField lift_circle_field(const SampledField& u, const Chain& cut);

/// S_0(u) by the link backend, its cut and the lift.
LiftedField lift_circle_field(const SampledField& u, bool minimize_cut = false);

}  // namespace flatchain
