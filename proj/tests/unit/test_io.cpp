#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "flatchain/io.hpp"
#include "flatchain/presets.hpp"

using namespace flatchain;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / "flatchain_test_io";
    fs::create_directories(dir);
    return dir / name;
}

SingularChain extract(const Preset& p, std::vector<double> y = {0.01, -0.02}) {
    auto t = make_target(p.target);
    if (y.size() != static_cast<std::size_t>(t->ambient_dim())) y.assign(t->ambient_dim(), 0.0);
    return singular_set(p.field, *t, y);
}

}  // namespace

TEST_CASE("constant field on a 3x3 grid has Lambda = 1") {
    nlohmann::json h = {{"d", 2}, {"m", 2}, {"origin", {0, 0}}, {"spacing", {1, 1}}, {"counts", {2, 2}}};
    std::vector<double> v;
    for (int i = 0; i < 9; ++i) v.insert(v.end(), {1.0, 0.0});
    h["values"] = v;
    auto f = field_from_json(h);
    CHECK(f.field.sup_norm() == 1.0);
    CHECK(f.field.complex().num_vertices() == 9);
    CHECK_FALSE(f.target.has_value());
}

TEST_CASE("generated vortex round-trips bit-exactly through a blob and inline") {
    auto p = make_preset("vortex", {.n = 16});
    auto header = scratch("vortex.json");
    write_field(header, p.field, p.target, fs::path("vortex.bin"));
    auto back = parse_field(header);
    REQUIRE(back.field.values().size() == p.field.values().size());
    CHECK(std::memcmp(back.field.values().data(), p.field.values().data(), p.field.values().size() * sizeof(double)) == 0);
    CHECK(back.target == std::optional<std::string>("circle"));
    CHECK(back.field.grid() == p.field.grid());

    auto inline_header = scratch("vortex_inline.json");
    write_field(inline_header, p.field, p.target);
    CHECK(parse_field(inline_header).field.values() == p.field.values());
}

TEST_CASE("truncated blob names expected and found counts") {
    auto p = make_preset("vortex", {.n = 4});
    auto header = scratch("short.json");
    write_field(header, p.field, p.target, fs::path("short.bin"));
    auto blob = scratch("short.bin");
    fs::resize_file(blob, fs::file_size(blob) - 8);
    try {
        parse_field(header);
        FAIL("expected an InputError");
    } catch (const InputError& e) {
        std::string msg = e.what();
        CHECK(msg.find("expected 50") != std::string::npos);
        CHECK(msg.find("found 49") != std::string::npos);
    }
}

TEST_CASE("header validation") {
    nlohmann::json h = {{"d", 2}, {"m", 2}, {"origin", {0, 0}}, {"spacing", {1, 1}}, {"counts", {1, 1}}};
    h["values"] = std::vector<double>(8, 0.5);
    CHECK_NOTHROW(field_from_json(h));
    auto bad = h;
    bad["m"] = 4;
    bad["values"] = std::vector<double>(16, 0.5);
    CHECK_THROWS_AS(field_from_json(bad), InputError);
    bad = h;
    bad["values"] = std::vector<double>(7, 0.5);
    CHECK_THROWS_AS(field_from_json(bad), InputError);
    bad = h;
    bad["values"][3] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(field_from_json(bad), InputError);
    bad = h;
    bad.erase("values");
    CHECK_THROWS_AS(field_from_json(bad), InputError);
    CHECK_THROWS_AS(parse_field(scratch("missing.json")), InputError);
}

TEST_CASE("chain documents round-trip") {
    auto s = extract(make_preset("vortex-pair", {.n = 16}));
    auto back = chain_from_document(nlohmann::json::parse(chain_document(s.chain).dump()));
    CHECK(chain_to_json(back) == chain_to_json(s.chain));
    CHECK(back.complex().to_json() == s.chain.complex().to_json());
}

TEST_CASE("exports") {
    SUBCASE("empty chain gives a valid empty document") {
        auto s = extract(make_preset("smooth", {.n = 8}));
        REQUIRE(s.chain.is_zero());
        auto j = nlohmann::json::parse(export_defects(s, "json"));
        CHECK(j["chain"]["cells"].empty());
        CHECK(chain_from_document(j).is_zero());
        CHECK(export_defects(s, "csv") == "x,y,coefficient\n");
    }
    SUBCASE("vortex pair svg marks +1 and -1") {
        auto s = extract(make_preset("vortex-pair", {.n = 32}));
        auto svg = export_defects(s, "svg");
        int circles = 0;
        for (auto at = svg.find("<circle"); at != std::string::npos; at = svg.find("<circle", at + 1)) ++circles;
        CHECK(circles == 2);
        CHECK(svg.find(">+1</text>") != std::string::npos);
        CHECK(svg.find(">-1</text>") != std::string::npos);
        auto csv = export_defects(s, "csv");
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    }
    SUBCASE("3D ring gives one closed polyline") {
        auto p = make_preset("line-defect-3d", {.n = 8});
        auto s = extract(p);
        auto obj = export_defects(s, "obj");
        std::istringstream in(obj);
        std::string line;
        std::vector<std::string> polylines;
        while (std::getline(in, line))
            if (line.starts_with("l ")) polylines.push_back(line);
        REQUIRE(polylines.size() == 1);
        std::istringstream ids(polylines[0].substr(2));
        std::vector<int> v{std::istream_iterator<int>(ids), std::istream_iterator<int>()};
        CHECK(v.size() > 4);
        CHECK(v.front() == v.back());
        CHECK_THROWS_AS(export_defects(s, "svg"), InputError);
        CHECK_THROWS_AS(export_defects(s, "png"), InputError);
    }
    SUBCASE("two-dimensional chains are rejected") {
        auto p = make_preset("smooth", {.n = 2});
        auto s = extract(p);
        Chain c(p.field.complex_ptr(), 2, CoefficientGroup::integers());
        c.accumulate(0, c.group().element({1}));
        SingularChain wide{c, c, s.y, Backend::kLink, 0, false, s.mesh, {}, {}};
        CHECK_THROWS_AS(export_defects(wide, "json"), InputError);
    }
}

TEST_CASE("presets put their defects where the metadata says") {
    auto p = make_preset("disclination-half", {.n = 64, .seed = 7});
    CHECK(p.target == "rp2q");
    auto t = make_target("rp2q");
    std::vector<double> y(5, 0.0);
    auto s = singular_set(p.field, *t, y);
    REQUIRE(s.chain.size() == 2);
    CHECK(s.chain.group() == CoefficientGroup::cyclic(2));
    const double cell = std::sqrt(2.0) * 2.0 / 64;
    for (const auto& d : p.meta["defects"]) {
        double best = 1e9;
        for (const auto& [v, g] : s.chain.entries()) {
            auto x = s.chain.complex().point(v);
            best = std::min(best, std::hypot(x[0] - d["x"][0].get<double>(), x[1] - d["x"][1].get<double>()));
        }
        CHECK(best < cell);
    }
    auto q = make_preset("disclination-half", {.n = 64, .seed = 8});
    CHECK(q.meta["defects"] != p.meta["defects"]);

    auto noise = make_preset("noise", {.n = 4, .dim = 3, .seed = 3});
    CHECK(noise.field.dim() == 3);
    CHECK(make_preset("noise", {.n = 4, .dim = 3, .seed = 3}).field.values() == noise.field.values());
    CHECK_THROWS_AS(make_preset("nope"), InputError);
    CHECK_THROWS_AS(make_preset("line-defect-3d", {.shape = "knot"}), InputError);
}
