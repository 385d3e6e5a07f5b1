#include "flatchain/presets.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "flatchain/error.hpp"
#include "flatchain/rng.hpp"
#include "flatchain/target.hpp"

namespace flatchain {

namespace {

constexpr double kPi = std::numbers::pi;

std::array<double, 3> center_or(const PresetOptions& o, std::array<double, 3> fallback) {
    return o.center.value_or(fallback);
}

nlohmann::json point(double x, double y) { return nlohmann::json::array({x, y}); }

Preset vortex(const PresetOptions& o) {
    auto c = center_or(o, {0.013, 0.021, 0});
    auto g = unit_box_grid(2, o.n);
    SampledField u(g, 2, sample_grid(g, 2, [&](auto x, auto out) {
                       double dx = x[0] - c[0], dy = x[1] - c[1], r = std::hypot(dx, dy);
                       if (r == 0) throw InputError("vortex center lies on a grid vertex");
                       out[0] = dx / r;
                       out[1] = dy / r;
                   }));
    return {std::move(u), "circle", {{"defects", {{{"x", point(c[0], c[1])}, {"charge", 1}}}}}};
}

Preset vortex_pair(const PresetOptions& o) {
    auto c = center_or(o, {0.013, 0.021, 0});
    const double h = o.separation / 2;
    auto g = unit_box_grid(2, o.n);
    SampledField u(g, 2, sample_grid(g, 2, [&](auto x, auto out) {
                       double th = std::atan2(x[1] - c[1], x[0] - (c[0] - h)) - std::atan2(x[1] - c[1], x[0] - (c[0] + h));
                       out[0] = std::cos(th);
                       out[1] = std::sin(th);
                   }));
    nlohmann::json defects = {{{"x", point(c[0] - h, c[1])}, {"charge", 1}}, {{"x", point(c[0] + h, c[1])}, {"charge", -1}}};
    return {std::move(u), "circle", {{"defects", defects}, {"separation", o.separation}}};
}

// Saturated profile: |u| = min(2r, 1), so |u| = 1 near the boundary and the
// averaged Jacobian equals the degree.
Preset degree_n(const PresetOptions& o) {
    auto c = center_or(o, {0.013, 0.021, 0});
    const int n = o.degree;
    auto g = unit_box_grid(2, o.n);
    SampledField u(g, 2, sample_grid(g, 2, [&](auto x, auto out) {
                       double dx = x[0] - c[0], dy = x[1] - c[1];
                       double r = std::hypot(dx, dy), th = n * std::atan2(dy, dx);
                       double a = std::min(2 * r, 1.0);
                       out[0] = a * std::cos(th);
                       out[1] = a * std::sin(th);
                   }));
    return {std::move(u), "circle", {{"defects", {{{"x", point(c[0], c[1])}, {"charge", n}}}}, {"degree", n}}};
}

// Director angle phi = (arg(x - a) - arg(x - b)) / 2 in the xy-plane.
Preset disclination_half(const PresetOptions& o) {
    auto rng = task_rng(o.seed, 0xd15c);
    std::uniform_real_distribution<double> jx(-0.15, 0.15), jy(-0.3, 0.3);
    std::array<double, 2> a{-0.35 + jx(rng), jy(rng)}, b{0.35 + jx(rng), jy(rng)};
    auto g = unit_box_grid(2, o.n);
    SampledField u(g, 5, sample_grid(g, 5, [&](auto x, auto out) {
                       double phi = 0.5 * (std::atan2(x[1] - a[1], x[0] - a[0]) - std::atan2(x[1] - b[1], x[0] - b[0]));
                       auto z = rp2q::embed({std::cos(phi), std::sin(phi), 0});
                       std::copy(z.begin(), z.end(), out.begin());
                   }));
    nlohmann::json defects = {{{"x", point(a[0], a[1])}, {"charge", "1/2"}}, {{"x", point(b[0], b[1])}, {"charge", "-1/2"}}};
    return {std::move(u), "rp2q", {{"defects", defects}, {"seed", o.seed}}};
}

Preset line_defect(const PresetOptions& o) {
    auto c = center_or(o, {0.013, 0.021, 0.017});
    const bool ring = o.shape == "ring";
    if (!ring && o.shape != "line") throw InputError("line-defect-3d shape must be line or ring");
    auto g = unit_box_grid(3, o.n);
    SampledField u(g, 2, sample_grid(g, 2, [&](auto x, auto out) {
                       double dx = x[0] - c[0], dy = x[1] - c[1];
                       double p = dx, q = dy;
                       if (ring) {
                           p = std::hypot(dx, dy) - o.radius;
                           q = x[2] - c[2];
                       }
                       double r = std::hypot(p, q);
                       if (r == 0) throw InputError("defect line passes through a grid vertex");
                       out[0] = p / r;
                       out[1] = q / r;
                   }));
    nlohmann::json meta = {{"shape", o.shape}, {"center", c}};
    if (ring) meta["radius"] = o.radius;
    return {std::move(u), "circle", meta};
}

Preset smooth(const PresetOptions& o) {
    auto g = unit_box_grid(2, o.n);
    SampledField u(g, 2, sample_grid(g, 2, [&](auto x, auto out) {
                       double th = 1.5 * std::sin(1.3 * x[0]) * std::cos(0.7 * x[1]);
                       out[0] = std::cos(th);
                       out[1] = std::sin(th);
                   }));
    return {std::move(u), "circle", {{"defects", nlohmann::json::array()}}};
}

// Each component is a sum of six random plane waves with wave numbers of
// order 2, so a 16-cell grid resolves it.
Preset noise(const PresetOptions& o) {
    if (o.dim != 2 && o.dim != 3) throw InputError("noise preset needs d in {2, 3}");
    auto rng = task_rng(o.seed, 0x9015e);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> phase(0, 2 * kPi);
    constexpr int kModes = 6;
    struct Mode {
        std::array<double, 3> k;
        double amp, phase;
    };
    std::array<std::array<Mode, kModes>, 2> modes;
    for (auto& comp : modes)
        for (auto& m : comp) {
            for (int i = 0; i < 3; ++i) m.k[i] = 2 * gauss(rng);
            m.amp = gauss(rng) / std::sqrt(double(kModes));
            m.phase = phase(rng);
        }
    auto g = unit_box_grid(o.dim, o.n);
    SampledField u(g, 2, sample_grid(g, 2, [&](auto x, auto out) {
                       for (int c = 0; c < 2; ++c) {
                           double s = 0;
                           for (const auto& m : modes[c]) {
                               double kx = m.phase;
                               for (int i = 0; i < o.dim; ++i) kx += m.k[i] * x[i];
                               s += m.amp * std::cos(kx);
                           }
                           out[c] = s;
                       }
                   }));
    return {std::move(u), "circle", {{"seed", o.seed}}};
}

}  // namespace

GridSpec unit_box_grid(int dim, int n) {
    if (n < 1) throw InputError("grid needs at least one cell per axis");
    GridSpec g;
    g.dim = dim;
    for (int i = 0; i < dim; ++i) {
        g.origin[i] = -1;
        g.spacing[i] = 2.0 / n;
        g.counts[i] = n;
    }
    return g;
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"vortex", "vortex-pair", "degree-n", "disclination-half",
                                                "line-defect-3d", "smooth", "noise"};
    return names;
}

Preset make_preset(const std::string& name, const PresetOptions& o) {
    Preset p = [&] {
        if (name == "vortex") return vortex(o);
        if (name == "vortex-pair") return vortex_pair(o);
        if (name == "degree-n") return degree_n(o);
        if (name == "disclination-half") return disclination_half(o);
        if (name == "line-defect-3d") return line_defect(o);
        if (name == "smooth") return smooth(o);
        if (name == "noise") return noise(o);
        throw InputError("unknown preset '" + name + "'");
    }();
    p.meta["preset"] = name;
    p.meta["n"] = o.n;
    return p;
}

}  // namespace flatchain
