#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flatchain/field.hpp"

namespace flatchain {

struct PresetOptions {
    int n = 64;  // cells per axis over [-1, 1]^d
    int dim = 2;  // noise only; line-defect-3d is always 3D
    /// Defect center; empty picks an off-vertex default.
    std::optional<std::array<double, 3>> center;
    double separation = 0.8;  // vortex-pair
    int degree = 1;           // degree-n
    double radius = 0.5;      // line-defect-3d ring radius
    std::string shape = "ring";  // line-defect-3d: line | ring
    std::uint64_t seed = 1;   // disclination-half locations, noise modes
};

struct Preset {
    SampledField field;
    std::string target;
    /// Parameters and the exact defect locations/charges where known.
    nlohmann::json meta;
};

/// vortex, vortex-pair, degree-n, disclination-half, line-defect-3d, smooth
/// (defect-free phase field) and noise (random smooth R^2-valued field).
Preset make_preset(const std::string& name, const PresetOptions& options = {});
const std::vector<std::string>& preset_names();

GridSpec unit_box_grid(int dim, int n);

}  // namespace flatchain
