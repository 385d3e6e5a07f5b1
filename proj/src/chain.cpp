#include "flatchain/chain.hpp"

#include <cmath>
#include <limits>

#include "flatchain/error.hpp"
#include "flatchain/geometry.hpp"

namespace flatchain {

Chain::Chain(std::shared_ptr<const Complex> complex, int dim, CoefficientGroup group)
    : complex_(std::move(complex)), dim_(dim), group_(std::move(group)) {
    if (!complex_) throw InputError("chain needs a complex");
    if (dim_ < 0 || dim_ > complex_->dimension())
        throw InputError("chain dimension " + std::to_string(dim_) + " not present in complex");
}

GroupElement Chain::coefficient(int cell) const {
    auto it = entries_.find(cell);
    return it == entries_.end() ? group_.zero() : it->second;
}

void Chain::accumulate(int cell, const GroupElement& g) {
    complex_->cell(dim_, cell);
    auto it = entries_.find(cell);
    if (it == entries_.end()) {
        auto v = group_.add(group_.zero(), g);
        if (!v.is_zero()) entries_.emplace(cell, std::move(v));
        return;
    }
    it->second = group_.add(it->second, g);
    if (it->second.is_zero()) entries_.erase(it);
}

void Chain::accumulate_oriented(std::span<const int> vertices, const GroupElement& g) {
    auto found = complex_->find(dim_, vertices);
    if (!found) throw InputError("tuple is not a cell of the complex");
    accumulate(found->first, found->second > 0 ? g : group_.neg(g));
}

void Chain::require_compatible(const Chain& other) const {
    if (complex_ != other.complex_) throw InputError("chains live on different complexes");
    if (dim_ != other.dim_) throw InputError("chains have different dimensions");
    if (!(group_ == other.group_))
        throw InputError("chains have different coefficient groups: " + group_.to_string() + " vs " +
                         other.group_.to_string());
}

Chain Chain::operator-() const {
    Chain out(complex_, dim_, group_);
    for (const auto& [c, g] : entries_) out.entries_.emplace(c, group_.neg(g));
    return out;
}

Chain Chain::operator+(const Chain& other) const {
    require_compatible(other);
    Chain out = *this;
    for (const auto& [c, g] : other.entries_) out.accumulate(c, g);
    return out;
}

Chain Chain::operator-(const Chain& other) const { return *this + (-other); }

Chain Chain::scaled(std::int64_t k) const {
    Chain out(complex_, dim_, group_);
    for (const auto& [c, g] : entries_) out.accumulate(c, group_.scale(k, g));
    return out;
}

bool operator==(const Chain& a, const Chain& b) {
    return a.complex_ == b.complex_ && a.dim_ == b.dim_ && a.group_ == b.group_ &&
           a.entries_ == b.entries_;
}

Chain boundary(const Chain& s) {
    if (s.dim() == 0) throw InputError("boundary of a 0-chain is undefined");
    Chain out(s.complex_ptr(), s.dim() - 1, s.group());
    const auto& g = s.group();
    for (const auto& [cell, coef] : s.entries()) {
        auto neg = g.neg(coef);
        for (const auto& inc : s.complex().boundary_incidence(s.dim(), cell))
            out.accumulate(inc.facet, inc.sign > 0 ? coef : neg);
    }
    return out;
}

double mass(const Chain& s) {
    double m = 0;
    for (const auto& [cell, coef] : s.entries())
        m += static_cast<double>(s.group().norm(coef)) * s.complex().volume(s.dim(), cell);
    return m;
}

Chain restrict(const Chain& s, const CellPredicate& keep) {
    Chain out(s.complex_ptr(), s.dim(), s.group());
    for (const auto& [cell, coef] : s.entries())
        if (keep(s.dim(), cell)) out.accumulate(cell, coef);
    return out;
}

GroupElement augmentation(const Chain& s) {
    if (s.dim() != 0) throw InputError("augmentation needs a 0-chain");
    auto sum = s.group().zero();
    for (const auto& [cell, coef] : s.entries()) sum = s.group().add(sum, coef);
    return sum;
}

std::vector<std::set<int>> support(const Chain& s) {
    std::vector<std::set<int>> out(s.dim() + 1);
    for (const auto& [cell, coef] : s.entries()) out[s.dim()].insert(cell);
    for (int k = s.dim(); k >= 1; --k)
        for (int cell : out[k])
            for (const auto& inc : s.complex().boundary_incidence(k, cell)) out[k - 1].insert(inc.facet);
    return out;
}

namespace {

geometry::Simplex simplex_of(const Complex& c, int k, int id) {
    geometry::Simplex s{c.ambient_dim(), {}};
    for (int v : c.cell(k, id)) {
        auto p = c.point(v);
        s.pts.insert(s.pts.end(), p.begin(), p.end());
    }
    return s;
}

}  // namespace

double support_distance(const Chain& a, const Chain& b) {
    if (a.complex().ambient_dim() != b.complex().ambient_dim())
        throw InputError("chains live in different ambient spaces");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [ca, ga] : a.entries()) {
        auto sa = simplex_of(a.complex(), a.dim(), ca);
        for (const auto& [cb, gb] : b.entries())
            best = std::min(best, geometry::simplex_distance(sa, simplex_of(b.complex(), b.dim(), cb)));
    }
    return best;
}

nlohmann::json chain_to_json(const Chain& s) {
    auto cells = nlohmann::json::array();
    for (const auto& [cell, coef] : s.entries())
        cells.push_back(nlohmann::json::array({cell, s.group().element_to_json(coef)}));
    return {{"dim", s.dim()}, {"cells", cells}, {"group", s.group().to_json()}};
}

Chain chain_from_json(const nlohmann::json& j, std::shared_ptr<const Complex> complex) {
    try {
        auto group = CoefficientGroup::from_json(j.at("group"));
        Chain s(std::move(complex), j.at("dim").get<int>(), group);
        for (const auto& entry : j.at("cells")) {
            if (!entry.is_array() || entry.size() != 2) throw InputError("chain cell entries are [id, element]");
            s.accumulate(entry[0].get<int>(), group.element_from_json(entry[1]));
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad chain JSON: ") + e.what());
    }
}

CellPredicate region_from_json(const nlohmann::json& j, std::shared_ptr<const Complex> complex) {
    try {
        if (j.contains("box")) {
            auto lo = j.at("box").at("min").get<std::vector<double>>();
            auto hi = j.at("box").at("max").get<std::vector<double>>();
            if (lo.size() != static_cast<std::size_t>(complex->ambient_dim()) || hi.size() != lo.size())
                throw InputError("region box has wrong dimension");
            return [complex, lo, hi](int k, int id) {
                auto c = complex->barycenter(k, id);
                for (std::size_t i = 0; i < c.size(); ++i)
                    if (!(c[i] > lo[i] && c[i] < hi[i])) return false;
                return true;
            };
        }
        auto sets = std::make_shared<std::map<int, std::set<int>>>();
        for (const auto& [key, ids] : j.at("cells").items())
            for (const auto& id : ids) (*sets)[std::stoi(key)].insert(id.get<int>());
        return [sets](int k, int id) {
            auto it = sets->find(k);
            return it != sets->end() && it->second.count(id) > 0;
        };
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad region JSON: ") + e.what());
    }
}

CellPredicate interior_predicate(std::shared_ptr<const Complex> complex) {
    return [complex](int k, int id) { return !complex->on_boundary(k, id); };
}

}  // namespace flatchain
