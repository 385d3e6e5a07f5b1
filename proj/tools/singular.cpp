// Command-line front end: preset generation, extraction, flat norms, lifting
// and Monte-Carlo reports. JSON goes to stdout unless --out is given.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "flatchain/flatnorm.hpp"
#include "flatchain/io.hpp"
#include "flatchain/lifting.hpp"
#include "flatchain/presets.hpp"
#include "flatchain/singular.hpp"

using namespace flatchain;
using nlohmann::json;

namespace {

std::vector<double> parse_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw InputError(what + ": '" + s + "' is not a comma-separated list of numbers");
        }
    }
    return out;
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError("bad JSON in " + path + ": " + e.what());
    }
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out);
    if (!f) throw InputError("cannot write " + out);
    f << text;
}

std::shared_ptr<const TargetManifold> pick_target(const std::string& flag, const FieldFile& f) {
    std::string name = !flag.empty() ? flag : f.target.value_or("");
    if (name.empty()) throw InputError("no target: pass --target or set \"target\" in the field header");
    auto t = make_target(name);
    if (t->ambient_dim() != f.field.m())
        throw InputError("target " + name + " lives in R^" + std::to_string(t->ambient_dim()) + " but the field has m = " +
                         std::to_string(f.field.m()));
    return t;
}

struct Common {
    std::uint64_t seed = 1;
    int threads = 1;
};

struct GenArgs {
    std::string preset, out, blob, center, shape = "ring";
    PresetOptions o;
};

void run_gen(const GenArgs& a, const Common& c) {
    PresetOptions o = a.o;
    o.seed = c.seed;
    o.shape = a.shape;
    if (!a.center.empty()) {
        auto v = parse_list(a.center, "--center");
        if (v.size() < 2 || v.size() > 3) throw InputError("--center needs 2 or 3 coordinates");
        std::array<double, 3> p{0, 0, 0};
        std::copy(v.begin(), v.end(), p.begin());
        o.center = p;
    }
    auto p = make_preset(a.preset, o);
    if (a.out.empty()) {
        auto h = field_header(p.field, p.target);
        h["values"] = p.field.values();
        std::cout << h.dump() << '\n';
        return;
    }
    std::optional<std::filesystem::path> blob;
    if (!a.blob.empty()) blob = a.blob;
    write_field(a.out, p.field, p.target, blob);
    json j = p.meta;
    j["out"] = a.out;
    j["target"] = p.target;
    j["lambda"] = p.field.sup_norm();
    std::cout << j.dump(2) << '\n';
}

struct ExtractArgs {
    std::string field, target, y, backend, format = "json", out;
    bool n_valued = false, no_n_valued = false;
};

void run_extract(const ExtractArgs& a, const Common& c) {
    auto f = parse_field(a.field);
    auto t = pick_target(a.target, f);
    std::vector<double> y(t->ambient_dim(), 0.0);
    if (!a.y.empty()) y = parse_list(a.y, "--y");
    if (y.size() != static_cast<std::size_t>(t->ambient_dim()))
        throw InputError("--y needs " + std::to_string(t->ambient_dim()) + " components");
    SingularOptions opt;
    if (!a.backend.empty()) opt.backend = backend_from_string(a.backend);
    if (a.n_valued) opt.n_valued = true;
    if (a.no_n_valued) opt.n_valued = false;
    opt.jitter_seed = c.seed;
    auto s = singular_set(f.field, *t, y, opt);
    emit(export_defects(s, a.format), a.out);
}

struct FlatArgs {
    std::string chain, complex, region, out;
    bool oracle = false;
    int bound = 2;
};

void run_flatnorm(const FlatArgs& a) {
    auto doc = read_json(a.chain);
    Chain s = [&] {
        if (a.complex.empty()) return chain_from_document(doc);
        auto cx = Complex::from_json(read_json(a.complex));
        return chain_from_json(doc.contains("chain") ? doc.at("chain") : doc, cx);
    }();
    std::optional<CellPredicate> inside;
    if (!a.region.empty()) inside = region_from_json(read_json(a.region), s.complex_ptr());
    FlatDecomposition d = a.oracle ? flat_norm_oracle(s, a.bound, inside)
                                   : inside ? relative_flat_norm(s, *inside) : flat_norm(s);
    json j = {{"value", d.value},
              {"exactness", to_string(d.exactness)},
              {"lower_bound", d.lower_bound},
              {"P", chain_to_json(d.P)},
              {"Q", chain_to_json(d.Q)}};
    emit(j.dump(2) + "\n", a.out);
}

struct LiftArgs {
    std::string field, out;
    bool minimize = false;
};

void run_lift(const LiftArgs& a) {
    auto f = parse_field(a.field);
    if (f.target && *f.target != "circle") throw InputError("lifting needs a circle-valued field");
    auto l = lift_circle_field(f.field, a.minimize);
    json j = {{"theta", l.theta},
              {"cut", chain_to_json(l.cut)},
              {"jumps", l.jumps},
              {"variation_report", l.report.to_json()}};
    emit(j.dump() + "\n", a.out);
}

struct ReportArgs {
    std::string field, field1, target, out;
    int samples = 0;
};

McOptions mc_options(const ReportArgs& a, const Common& c, int default_samples) {
    McOptions mc;
    mc.samples = a.samples > 0 ? a.samples : default_samples;
    mc.seed = c.seed;
    mc.threads = c.threads;
    return mc;
}

void run_jacobian(const ReportArgs& a, const Common& c) {
    auto f = parse_field(a.field);
    auto t = pick_target(a.target, f);
    emit(jacobian_integral_check(f.field, *t, mc_options(a, c, 2000)).to_json().dump(2) + "\n", a.out);
}

void run_report(const std::string& kind, const ReportArgs& a, const Common& c) {
    auto f = parse_field(a.field);
    auto t = pick_target(a.target, f);
    json j;
    if (kind == "mass") {
        j = mass_coarea_report(f.field, *t, mc_options(a, c, 500)).to_json();
    } else if (kind == "continuity") {
        if (a.field1.empty()) throw InputError("report continuity needs --field1");
        auto f1 = parse_field(a.field1);
        j = continuity_report(f.field, f1.field, *t, mc_options(a, c, 200)).to_json();
    } else {
        j = n_valued_stability(f.field, *t, mc_options(a, c, 100)).to_json();
    }
    j["kind"] = kind;
    emit(j.dump(2) + "\n", a.out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Topological singular sets of sampled fields"};
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    app.add_option("--seed", common.seed, "seed for every sampled offset y")->capture_default_str();
    app.add_option("--threads", common.threads, "threads for y-ensembles")->check(CLI::PositiveNumber)->capture_default_str();

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "write a preset field");
    g->add_option("--preset", gen.preset, "preset name")->required()->check(CLI::IsMember(preset_names()));
    g->add_option("--n", gen.o.n, "cells per axis")->capture_default_str();
    g->add_option("--dim", gen.o.dim, "domain dimension (noise)")->capture_default_str();
    g->add_option("--center", gen.center, "defect center x,y[,z]");
    g->add_option("--separation", gen.o.separation, "vortex-pair separation")->capture_default_str();
    g->add_option("--degree", gen.o.degree, "degree-n degree")->capture_default_str();
    g->add_option("--radius", gen.o.radius, "ring radius")->capture_default_str();
    g->add_option("--shape", gen.shape, "line-defect-3d shape")->check(CLI::IsMember({"line", "ring"}))->capture_default_str();
    g->add_option("--out", gen.out, "field header path");
    g->add_option("--blob", gen.blob, "raw float64 sidecar (relative to the header)");

    ExtractArgs ex;
    auto* e = app.add_subcommand("extract", "singular set S_y(u)");
    e->add_option("--field", ex.field)->required();
    e->add_option("--target", ex.target)->check(CLI::IsMember({"circle", "sphere3", "rp2q"}));
    e->add_option("--y", ex.y, "offset y, comma-separated");
    e->add_option("--backend", ex.backend)->check(CLI::IsMember({"link", "preimage"}));
    e->add_option("--format", ex.format)->check(CLI::IsMember({"json", "csv", "svg", "obj"}))->capture_default_str();
    e->add_flag("--n-valued", ex.n_valued, "retract edges onto N (link backend)");
    e->add_flag("--no-n-valued", ex.no_n_valued);
    e->add_option("--out", ex.out);

    FlatArgs fl;
    auto* f = app.add_subcommand("flatnorm", "flat norm of a chain");
    f->add_option("--chain", fl.chain, "chain document, or bare chain with --complex")->required();
    f->add_option("--complex", fl.complex);
    f->add_option("--relative-to", fl.region, "region JSON");
    f->add_flag("--oracle", fl.oracle, "exhaustive search (small chains)");
    f->add_option("--bound", fl.bound, "oracle coefficient bound")->capture_default_str();
    f->add_option("--out", fl.out);

    LiftArgs li;
    auto* l = app.add_subcommand("lift", "phase lifting of a circle-valued planar field");
    l->add_option("--field", li.field)->required();
    l->add_flag("--minimize-cut", li.minimize);
    l->add_option("--out", li.out);

    ReportArgs jac;
    auto* j = app.add_subcommand("check-jacobian", "averaged Jacobian against the boundary degree");
    j->add_option("--field", jac.field)->required();
    j->add_option("--target", jac.target);
    j->add_option("--samples", jac.samples, "y-samples (default 2000)");
    j->add_option("--out", jac.out);

    ReportArgs rep;
    std::string kind;
    auto* r = app.add_subcommand("report", "Monte-Carlo reports");
    r->add_option("kind", kind)->required()->check(CLI::IsMember({"mass", "continuity", "stability"}));
    r->add_option("--field", rep.field)->required();
    r->add_option("--field1", rep.field1, "second field (continuity)");
    r->add_option("--target", rep.target);
    r->add_option("--samples", rep.samples);
    r->add_option("--out", rep.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& err) {
        return app.exit(err);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return 2;
    }

    try {
        if (*g) run_gen(gen, common);
        else if (*e) run_extract(ex, common);
        else if (*f) run_flatnorm(fl);
        else if (*l) run_lift(li);
        else if (*j) run_jacobian(jac, common);
        else run_report(kind, rep, common);
    } catch (const InputError& err) {
        std::cerr << "input error: " << err.what() << '\n';
        return 2;
    } catch (const DegeneracyError& err) {
        std::cerr << "degenerate: " << err.what() << '\n';
        return 3;
    } catch (const CapExceededError& err) {
        std::cerr << "cap exceeded: " << err.what() << '\n';
        return 4;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
    return 0;
}
