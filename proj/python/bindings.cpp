#include <cmath>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "flatchain/flatnorm.hpp"
#include "flatchain/io.hpp"
#include "flatchain/lifting.hpp"
#include "flatchain/presets.hpp"
#include "flatchain/singular.hpp"

namespace py = pybind11;
using namespace flatchain;

namespace {

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_python(const py::object& o) {
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

// Arrays are indexed [z][y][x][component], so x varies fastest as in the
// field files.
SampledField field_from_array(py::array_t<double, py::array::c_style | py::array::forcecast> a,
                              std::vector<double> origin, std::vector<double> spacing) {
    const int d = static_cast<int>(a.ndim()) - 1;
    if (d != 2 && d != 3) throw InputError("values must have shape (ny+1, nx+1, m) or (nz+1, ny+1, nx+1, m)");
    if (origin.empty()) origin.assign(d, 0.0);
    if (spacing.empty()) spacing.assign(d, 1.0);
    if (static_cast<int>(origin.size()) != d || static_cast<int>(spacing.size()) != d)
        throw InputError("origin and spacing need one entry per axis");
    GridSpec g;
    g.dim = d;
    for (int i = 0; i < d; ++i) {
        g.origin[i] = origin[i];
        g.spacing[i] = spacing[i];
        g.counts[i] = static_cast<int>(a.shape(d - 1 - i)) - 1;
    }
    const int m = static_cast<int>(a.shape(d));
    if (m != 2 && m != 3 && m != 5) throw InputError("fields need m in {2, 3, 5}");
    for (py::ssize_t i = 0; i < a.size(); ++i)
        if (!std::isfinite(a.data()[i])) throw InputError("field values must be finite");
    return SampledField(g, m, std::vector<double>(a.data(), a.data() + a.size()));
}

py::array_t<double> field_to_array(const SampledField& u) {
    std::vector<py::ssize_t> shape;
    const auto& g = u.grid();
    for (int i = u.dim() - 1; i >= 0; --i) shape.push_back(g.counts[i] + 1);
    shape.push_back(u.m());
    py::array_t<double> out(shape);
    std::copy(u.values().begin(), u.values().end(), out.mutable_data());
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Topological singular sets of sampled fields";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<DegeneracyError>(m, "DegeneracyError", PyExc_ArithmeticError);
    py::register_exception<CapExceededError>(m, "CapExceededError", PyExc_RuntimeError);

    py::class_<SampledField>(m, "Field")
        .def(py::init(&field_from_array), py::arg("values"), py::arg("origin") = std::vector<double>{},
             py::arg("spacing") = std::vector<double>{})
        .def_property_readonly("dim", &SampledField::dim)
        .def_property_readonly("m", &SampledField::m)
        .def_property_readonly("sup_norm", &SampledField::sup_norm)
        .def_property_readonly("grid", [](const SampledField& u) { return to_python(u.grid().to_json()); })
        .def("values", &field_to_array)
        .def("gradient_norm_power", &SampledField::gradient_norm_power, py::arg("p"));

    m.def("load_field", [](const std::string& path) {
        auto f = parse_field(path);
        return py::make_tuple(f.field, f.target ? py::cast(*f.target) : py::none());
    }, py::arg("path"), "Field and target name from a field file.");
    m.def("save_field", [](const std::string& path, const SampledField& u, std::optional<std::string> target,
                           std::optional<std::string> blob) {
        std::optional<std::filesystem::path> b;
        if (blob) b = *blob;
        write_field(path, u, target, b);
    }, py::arg("path"), py::arg("field"), py::arg("target") = py::none(), py::arg("blob") = py::none());

    m.def("preset", [](const std::string& name, int n, int dim, std::optional<std::vector<double>> center,
                       double separation, int degree, double radius, const std::string& shape, std::uint64_t seed) {
        PresetOptions o{.n = n, .dim = dim, .separation = separation, .degree = degree, .radius = radius,
                        .shape = shape, .seed = seed};
        if (center) {
            std::array<double, 3> c{0, 0, 0};
            for (std::size_t i = 0; i < std::min<std::size_t>(3, center->size()); ++i) c[i] = (*center)[i];
            o.center = c;
        }
        auto p = make_preset(name, o);
        return py::make_tuple(p.field, p.target, to_python(p.meta));
    }, py::arg("name"), py::arg("n") = 64, py::arg("dim") = 2, py::arg("center") = py::none(),
       py::arg("separation") = 0.8, py::arg("degree") = 1, py::arg("radius") = 0.5, py::arg("shape") = "ring",
       py::arg("seed") = 1, "(field, target, metadata) for a named preset.");
    m.attr("PRESETS") = preset_names();

    m.def("singular_set", [](const SampledField& u, const std::string& target, std::vector<double> y,
                             std::optional<std::string> backend, std::uint64_t seed, const std::string& format) {
        auto t = make_target(target);
        if (y.empty()) y.assign(t->ambient_dim(), 0.0);
        SingularOptions opt;
        if (backend) opt.backend = backend_from_string(*backend);
        opt.jitter_seed = seed;
        auto text = export_defects(singular_set(u, *t, y, opt), format);
        return format == "json" ? to_python(nlohmann::json::parse(text)) : py::cast(text);
    }, py::arg("field"), py::arg("target") = "circle", py::arg("y") = std::vector<double>{},
       py::arg("backend") = py::none(), py::arg("seed") = 0, py::arg("format") = "json",
       "S_y(u) as a chain document (or csv/svg/obj text).");

    m.def("flat_norm", [](const py::object& document, std::optional<py::object> region) {
        auto s = chain_from_document(from_python(document));
        auto d = region ? relative_flat_norm(s, region_from_json(from_python(*region), s.complex_ptr())) : flat_norm(s);
        return to_python({{"value", d.value},
                          {"exactness", to_string(d.exactness)},
                          {"lower_bound", d.lower_bound},
                          {"P", chain_to_json(d.P)},
                          {"Q", chain_to_json(d.Q)}});
    }, py::arg("document"), py::arg("region") = py::none());

    m.def("lift", [](const SampledField& u, bool minimize_cut) {
        auto l = lift_circle_field(u, minimize_cut);
        return to_python({{"theta", l.theta}, {"cut", chain_to_json(l.cut)}, {"jumps", l.jumps},
                          {"variation_report", l.report.to_json()}});
    }, py::arg("field"), py::arg("minimize_cut") = false);

    m.def("check_jacobian", [](const SampledField& u, const std::string& target, int samples, std::uint64_t seed,
                               int threads) {
        auto t = make_target(target);
        JacobianReport r;
        {
            py::gil_scoped_release release;
            r = jacobian_integral_check(u, *t, {samples, seed, threads});
        }
        return to_python(r.to_json());
    }, py::arg("field"), py::arg("target") = "circle", py::arg("samples") = 2000, py::arg("seed") = 1,
       py::arg("threads") = 1);
}
