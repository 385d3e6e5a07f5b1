#include "flatchain/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace flatchain {

namespace fs = std::filesystem;

namespace {

static_assert(std::endian::native == std::endian::little, "raw field blobs assume a little-endian host");

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError("bad JSON in " + path.string() + ": " + e.what());
    }
}

std::vector<double> read_blob(const fs::path& path, std::size_t expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open field blob " + path.string());
    in.seekg(0, std::ios::end);
    auto bytes = static_cast<std::size_t>(in.tellg());
    in.seekg(0);
    if (bytes % sizeof(double) != 0 || bytes / sizeof(double) != expected)
        throw InputError("field blob " + path.string() + ": expected " + std::to_string(expected) +
                         " float64 values, found " + std::to_string(bytes / sizeof(double)) +
                         (bytes % sizeof(double) ? " and a partial value" : ""));
    std::vector<double> v(expected);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(bytes));
    return v;
}

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

}  // namespace

FieldFile field_from_json(const nlohmann::json& h, const fs::path& base_dir) {
    try {
        GridSpec g = GridSpec::from_json(h);
        if (g.dim != 2 && g.dim != 3) throw InputError("field files need d in {2, 3}");
        const int m = h.at("m").get<int>();
        if (m != 2 && m != 3 && m != 5) throw InputError("field files need m in {2, 3, 5}");
        if (h.contains("endianness") && h.at("endianness").get<std::string>() != "little")
            throw InputError("only little-endian field blobs are supported");
        const std::size_t expected = g.num_vertices() * static_cast<std::size_t>(m);
        std::vector<double> values;
        if (h.contains("values")) {
            values = h.at("values").get<std::vector<double>>();
            if (values.size() != expected)
                throw InputError("field values: expected " + std::to_string(expected) + " numbers (m * prod(counts+1)), found " +
                                 std::to_string(values.size()));
        } else if (h.contains("blob")) {
            values = read_blob(base_dir / h.at("blob").get<std::string>(), expected);
        } else {
            throw InputError("field file needs \"values\" or \"blob\"");
        }
        for (double v : values)
            if (!std::isfinite(v)) throw InputError("field values must be finite (found NaN or Inf)");
        std::optional<std::string> target;
        if (h.contains("target")) target = h.at("target").get<std::string>();
        return {SampledField(g, m, std::move(values)), target};
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad field header: ") + e.what());
    }
}

FieldFile parse_field(const fs::path& path) { return field_from_json(read_json(path), path.parent_path()); }

nlohmann::json field_header(const SampledField& u, const std::optional<std::string>& target) {
    auto h = u.grid().to_json();
    h["m"] = u.m();
    h["endianness"] = "little";
    if (target) h["target"] = *target;
    return h;
}

void write_field(const fs::path& path, const SampledField& u, const std::optional<std::string>& target,
                 const std::optional<fs::path>& blob) {
    auto h = field_header(u, target);
    if (blob) {
        fs::path full = blob->is_absolute() ? *blob : path.parent_path() / *blob;
        std::ofstream out(full, std::ios::binary);
        if (!out) throw InputError("cannot write " + full.string());
        out.write(reinterpret_cast<const char*>(u.values().data()),
                  static_cast<std::streamsize>(u.values().size() * sizeof(double)));
        h["blob"] = fs::relative(full, path.parent_path().empty() ? fs::path(".") : path.parent_path()).string();
    } else {
        h["values"] = u.values();
    }
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out << h.dump() << '\n';
}

nlohmann::json chain_document(const Chain& c) { return {{"complex", c.complex().to_json()}, {"chain", chain_to_json(c)}}; }

Chain chain_from_document(const nlohmann::json& j) {
    try {
        std::shared_ptr<const Complex> cx;
        if (j.contains("complex")) {
            cx = Complex::from_json(j.at("complex"));
        } else if (j.contains("grid")) {
            cx = build_grid_complex(GridSpec::from_json(j.at("grid")));
            if (j.value("dual", false)) cx = build_dual_complex(cx)->dual;
        } else {
            throw InputError("chain document needs \"complex\" or \"grid\"");
        }
        return chain_from_json(j.at("chain"), cx);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad chain document: ") + e.what());
    }
}

namespace {

// Segments of a 1-chain joined into polylines, each oriented along the
// chain (negative coefficients reverse the segment).
struct Polyline {
    std::vector<int> vertices;
    bool closed = false;
};

std::vector<Polyline> polylines(const Chain& c) {
    const Complex& cx = c.complex();
    std::multimap<int, std::pair<int, int>> out_edges;  // tail -> (edge, head)
    std::map<int, int> indeg;
    for (const auto& [e, g] : c.entries()) {
        auto ends = cx.cell(1, e);
        bool fwd = c.group().free_rank() == 0 || g[0] > 0;
        int a = fwd ? ends[0] : ends[1], b = fwd ? ends[1] : ends[0];
        out_edges.emplace(a, std::make_pair(e, b));
        ++indeg[b];
    }
    std::vector<Polyline> lines;
    auto walk = [&](int start) {
        Polyline p;
        p.vertices.push_back(start);
        int v = start;
        while (true) {
            auto it = out_edges.find(v);
            if (it == out_edges.end()) break;
            int next = it->second.second;
            --indeg[next];
            out_edges.erase(it);
            p.vertices.push_back(next);
            v = next;
            if (v == start) {
                p.closed = true;
                break;
            }
        }
        lines.push_back(std::move(p));
    };
    // Open paths start where nothing comes in, then the remaining loops.
    std::vector<int> tails;
    for (const auto& [v, _] : out_edges) tails.push_back(v);
    for (int v : tails)
        if (indeg[v] == 0 && out_edges.count(v)) walk(v);
    while (!out_edges.empty()) walk(out_edges.begin()->first);
    return lines;
}

std::string coefficient_label(const Chain& c, const GroupElement& g) {
    auto j = c.group().element_to_json(g);
    if (j.is_array() && j.size() == 1) j = j[0];
    if (j.is_number_integer() && j.get<std::int64_t>() > 0 && c.group().free_rank() > 0) return "+" + j.dump();
    return j.dump();
}

std::string export_svg(const Chain& c, const SingularChain& s) {
    const auto& grid = s.mesh->primal->grid();
    double x0 = 0, y0 = 0, w = 1, h = 1;
    if (grid) {
        x0 = grid->origin[0];
        y0 = grid->origin[1];
        w = grid->spacing[0] * grid->counts[0];
        h = grid->spacing[1] * grid->counts[1];
    }
    const double scale = 512.0 / std::max(w, h);
    auto px = [&](double x) { return fmt((x - x0) * scale); };
    auto py = [&](double y) { return fmt((y0 + h - y) * scale); };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w * scale) << "\" height=\"" << fmt(h * scale)
       << "\">\n";
    os << "  <rect x=\"0\" y=\"0\" width=\"" << fmt(w * scale) << "\" height=\"" << fmt(h * scale)
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    const Complex& cx = c.complex();
    if (c.dim() == 0) {
        for (const auto& [v, g] : c.entries()) {
            auto p = cx.point(v);
            std::string label = coefficient_label(c, g);
            std::string color = label.starts_with("-") ? "blue" : "red";
            os << "  <circle class=\"defect\" cx=\"" << px(p[0]) << "\" cy=\"" << py(p[1]) << "\" r=\"4\" fill=\"" << color
               << "\"/>\n";
            os << "  <text x=\"" << px(p[0]) << "\" y=\"" << py(p[1]) << "\" dx=\"6\" dy=\"-6\">" << label << "</text>\n";
        }
    } else {
        for (const auto& line : polylines(c)) {
            os << "  <polyline class=\"defect\" fill=\"none\" stroke=\"red\" points=\"";
            for (std::size_t i = 0; i < line.vertices.size(); ++i) {
                auto p = cx.point(line.vertices[i]);
                os << (i ? " " : "") << px(p[0]) << "," << py(p[1]);
            }
            os << "\"/>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

std::string export_obj(const Chain& c) {
    const Complex& cx = c.complex();
    std::ostringstream os;
    os << "# defect set, " << c.size() << " cells\n";
    for (std::size_t v = 0; v < cx.num_vertices(); ++v) {
        auto p = cx.point(v);
        os << "v";
        for (int i = 0; i < 3; ++i) os << ' ' << fmt(i < cx.ambient_dim() ? p[i] : 0.0);
        os << '\n';
    }
    if (c.dim() == 0) {
        for (const auto& [v, g] : c.entries()) os << "p " << v + 1 << '\n';
    } else {
        for (const auto& line : polylines(c)) {
            os << "l";
            for (int v : line.vertices) os << ' ' << v + 1;
            os << '\n';
        }
    }
    return os.str();
}

std::string export_csv(const Chain& c) {
    const Complex& cx = c.complex();
    const int d = cx.ambient_dim();
    const char* axes = "xyz";
    std::ostringstream os;
    for (int k = 0; k <= c.dim(); ++k)
        for (int i = 0; i < d; ++i) os << axes[i] << (c.dim() ? std::to_string(k) : "") << ',';
    os << "coefficient\n";
    for (const auto& [cell, g] : c.entries()) {
        for (int v : cx.cell(c.dim(), cell))
            for (double x : cx.point(v)) os << fmt(x) << ',';
        auto j = c.group().element_to_json(g);
        if (j.is_array() && j.size() == 1) j = j[0];
        os << (j.is_number() ? j.dump() : "\"" + j.dump() + "\"") << '\n';
    }
    return os.str();
}

}  // namespace

std::string export_defects(const SingularChain& s, const std::string& format) {
    const Chain& c = s.chain;
    if (c.dim() > 1) throw InputError("defect export supports points and curves only");
    if (format == "json") {
        auto j = chain_document(c);
        j["backend"] = to_string(s.backend);
        j["y"] = s.y;
        j["resamples"] = s.resamples;
        j["n_valued"] = s.n_valued;
        j["augmentation"] = c.dim() == 0 ? c.group().element_to_json(augmentation(c)) : nlohmann::json();
        return j.dump(2) + "\n";
    }
    if (format == "csv") return export_csv(c);
    if (format == "svg") {
        if (c.complex().ambient_dim() != 2) throw InputError("svg export needs a planar field");
        return export_svg(c, s);
    }
    if (format == "obj") return export_obj(c);
    throw InputError("unknown export format '" + format + "' (json, csv, svg, obj)");
}

}  // namespace flatchain
