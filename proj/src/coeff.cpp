#include "flatchain/coeff.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "flatchain/error.hpp"

namespace flatchain {

namespace {

constexpr std::int64_t kMaxTorsionTable = std::int64_t{1} << 22;

std::int64_t mod(std::int64_t a, std::int64_t n) {
    auto r = a % n;
    return r < 0 ? r + n : r;
}

// True when the rows span Z^cols as a lattice (integer row reduction).
bool spans_integer_lattice(std::vector<std::vector<std::int64_t>> rows, std::size_t cols) {
    std::size_t pivot_row = 0;
    for (std::size_t col = 0; col < cols; ++col) {
        // Euclid on column `col` among rows >= pivot_row.
        while (true) {
            std::size_t best = rows.size();
            for (std::size_t r = pivot_row; r < rows.size(); ++r) {
                if (rows[r][col] == 0) continue;
                if (best == rows.size() || std::llabs(rows[r][col]) < std::llabs(rows[best][col]))
                    best = r;
            }
            if (best == rows.size()) return false;
            std::swap(rows[pivot_row], rows[best]);
            bool done = true;
            for (std::size_t r = pivot_row + 1; r < rows.size(); ++r) {
                if (rows[r][col] == 0) continue;
                auto q = rows[r][col] / rows[pivot_row][col];
                for (std::size_t c = col; c < cols; ++c) rows[r][c] -= q * rows[pivot_row][c];
                if (rows[r][col] != 0) done = false;
            }
            if (done) break;
        }
        if (std::llabs(rows[pivot_row][col]) != 1) return false;
        ++pivot_row;
    }
    return true;
}

}  // namespace

CoefficientGroup::CoefficientGroup(int free_rank, std::vector<std::int64_t> torsion_orders)
    : free_rank_(free_rank), torsion_(std::move(torsion_orders)) {
    if (free_rank_ < 0) throw InputError("negative free rank");
    for (auto n : torsion_)
        if (n < 2) throw InputError("torsion order must be >= 2, got " + std::to_string(n));
    for (std::size_t i = 0; i < arity(); ++i) generators_.push_back(unit(i));
    build_torsion_table();
}

CoefficientGroup::CoefficientGroup(int free_rank, std::vector<std::int64_t> torsion_orders,
                                   std::vector<GroupElement> generators)
    : CoefficientGroup(free_rank, std::move(torsion_orders)) {
    for (auto& g : generators) {
        check(g);
        reduce(g.c_);
    }
    if (generators == generators_) return;
    standard_ = false;
    std::vector<std::vector<std::int64_t>> rows;
    for (const auto& g : generators) rows.emplace_back(g.c_.begin(), g.c_.end());
    for (std::size_t i = 0; i < torsion_.size(); ++i) {
        std::vector<std::int64_t> row(arity(), 0);
        row[free_rank_ + i] = torsion_[i];
        rows.push_back(std::move(row));
    }
    if (arity() > 0 && !spans_integer_lattice(rows, arity()))
        throw InputError("generators do not generate " + to_string());
    generators_ = std::move(generators);
}

std::int64_t CoefficientGroup::torsion_size() const {
    std::int64_t size = 1;
    for (auto n : torsion_) {
        if (size > kMaxTorsionTable / n) return kMaxTorsionTable + 1;
        size *= n;
    }
    return size;
}

void CoefficientGroup::build_torsion_table() {
    if (torsion_.empty()) return;
    auto size = torsion_size();
    if (size > kMaxTorsionTable) throw InputError("torsion part too large: " + to_string());
    // BFS over the Cayley graph of the torsion part with generators +-e_i.
    torsion_norm_.assign(static_cast<std::size_t>(size), -1);
    std::deque<std::int64_t> queue{0};
    torsion_norm_[0] = 0;
    std::vector<std::int64_t> digits(torsion_.size());
    while (!queue.empty()) {
        auto idx = queue.front();
        queue.pop_front();
        auto rest = idx;
        for (std::size_t i = 0; i < torsion_.size(); ++i) {
            digits[i] = rest % torsion_[i];
            rest /= torsion_[i];
        }
        for (std::size_t i = 0; i < torsion_.size(); ++i) {
            for (int step : {1, -1}) {
                auto saved = digits[i];
                digits[i] = mod(digits[i] + step, torsion_[i]);
                auto next = torsion_index(digits);
                if (torsion_norm_[next] < 0) {
                    torsion_norm_[next] = torsion_norm_[idx] + 1;
                    queue.push_back(next);
                }
                digits[i] = saved;
            }
        }
    }
}

std::int64_t CoefficientGroup::torsion_index(std::span<const std::int64_t> torsion) const {
    std::int64_t idx = 0;
    for (std::size_t i = torsion_.size(); i-- > 0;) idx = idx * torsion_[i] + torsion[i];
    return idx;
}

void CoefficientGroup::check(const GroupElement& g) const {
    if (g.size() != arity())
        throw InputError("group element of arity " + std::to_string(g.size()) +
                         " does not belong to " + to_string());
}

void CoefficientGroup::reduce(std::vector<std::int64_t>& c) const {
    for (std::size_t i = 0; i < torsion_.size(); ++i)
        c[free_rank_ + i] = mod(c[free_rank_ + i], torsion_[i]);
}

bool CoefficientGroup::contains(const GroupElement& g) const {
    if (g.size() != arity()) return false;
    for (std::size_t i = 0; i < torsion_.size(); ++i) {
        auto v = g[free_rank_ + i];
        if (v < 0 || v >= torsion_[i]) return false;
    }
    return true;
}

GroupElement CoefficientGroup::zero() const {
    return GroupElement(std::vector<std::int64_t>(arity(), 0));
}

GroupElement CoefficientGroup::element(std::vector<std::int64_t> components) const {
    if (components.size() != arity())
        throw InputError("expected " + std::to_string(arity()) + " components for " + to_string());
    reduce(components);
    return GroupElement(std::move(components));
}

GroupElement CoefficientGroup::unit(std::size_t i) const {
    std::vector<std::int64_t> c(arity(), 0);
    c.at(i) = 1;
    return GroupElement(std::move(c));
}

GroupElement CoefficientGroup::add(const GroupElement& a, const GroupElement& b) const {
    check(a);
    check(b);
    std::vector<std::int64_t> c(arity());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = a.c_[i] + b.c_[i];
    reduce(c);
    return GroupElement(std::move(c));
}

GroupElement CoefficientGroup::neg(const GroupElement& a) const {
    check(a);
    std::vector<std::int64_t> c(arity());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = -a.c_[i];
    reduce(c);
    return GroupElement(std::move(c));
}

GroupElement CoefficientGroup::scale(std::int64_t k, const GroupElement& a) const {
    check(a);
    std::vector<std::int64_t> c(arity());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = k * a.c_[i];
    reduce(c);
    return GroupElement(std::move(c));
}

std::int64_t CoefficientGroup::norm(const GroupElement& g) const {
    check(g);
    if (!standard_) return bfs_norm(g);
    std::int64_t n = 0;
    for (int i = 0; i < free_rank_; ++i) n += std::llabs(g.c_[i]);
    if (!torsion_.empty()) {
        std::vector<std::int64_t> t(g.c_.begin() + free_rank_, g.c_.end());
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = mod(t[i], torsion_[i]);
        n += torsion_norm_[static_cast<std::size_t>(torsion_index(t))];
    }
    return n;
}

std::int64_t CoefficientGroup::bfs_norm(const GroupElement& target) const {
    auto goal = target;
    reduce(goal.c_);
    if (goal.is_zero()) return 0;
    std::set<std::vector<std::int64_t>> seen{zero().c_};
    std::vector<std::vector<std::int64_t>> frontier{zero().c_};
    for (std::int64_t radius = 1; radius <= kBfsRadiusCap; ++radius) {
        std::vector<std::vector<std::int64_t>> next;
        for (const auto& v : frontier) {
            for (const auto& gen : generators_) {
                for (int sign : {1, -1}) {
                    auto w = v;
                    for (std::size_t i = 0; i < w.size(); ++i) w[i] += sign * gen.c_[i];
                    reduce(w);
                    if (w == goal.c_) return radius;
                    if (seen.insert(w).second) next.push_back(std::move(w));
                }
            }
        }
        frontier = std::move(next);
    }
    throw CapExceededError("group norm exceeds BFS radius cap " +
                           std::to_string(kBfsRadiusCap));
}

std::vector<GroupElement> CoefficientGroup::enumerate(std::int64_t bound) const {
    std::vector<std::int64_t> lo(arity()), hi(arity());
    for (int i = 0; i < free_rank_; ++i) {
        lo[i] = -bound;
        hi[i] = bound;
    }
    for (std::size_t i = 0; i < torsion_.size(); ++i) {
        lo[free_rank_ + i] = 0;
        hi[free_rank_ + i] = torsion_[i] - 1;
    }
    std::vector<GroupElement> out;
    std::vector<std::int64_t> cur = lo;
    while (true) {
        out.emplace_back(cur);
        std::size_t i = 0;
        for (; i < cur.size(); ++i) {
            if (cur[i] < hi[i]) {
                ++cur[i];
                break;
            }
            cur[i] = lo[i];
        }
        if (i == cur.size()) break;
    }
    return out;
}

nlohmann::json CoefficientGroup::to_json() const {
    nlohmann::json j{{"free_rank", free_rank_}, {"torsion", torsion_}};
    if (!standard_) {
        auto gens = nlohmann::json::array();
        for (const auto& g : generators_) gens.push_back(g.c_);
        j["generators"] = gens;
    }
    return j;
}

CoefficientGroup CoefficientGroup::from_json(const nlohmann::json& j) {
    try {
        auto rank = j.at("free_rank").get<int>();
        auto torsion = j.value("torsion", std::vector<std::int64_t>{});
        if (!j.contains("generators")) return {rank, torsion};
        std::vector<GroupElement> gens;
        for (const auto& g : j.at("generators")) gens.emplace_back(g.get<std::vector<std::int64_t>>());
        return {rank, torsion, gens};
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad group descriptor: ") + e.what());
    }
}

nlohmann::json CoefficientGroup::element_to_json(const GroupElement& g) const {
    check(g);
    if (arity() == 1) return g.c_[0];
    return g.c_;
}

GroupElement CoefficientGroup::element_from_json(const nlohmann::json& j) const {
    try {
        if (j.is_number_integer()) return element({j.get<std::int64_t>()});
        return element(j.get<std::vector<std::int64_t>>());
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad group element: ") + e.what());
    }
}

std::string CoefficientGroup::to_string() const {
    std::ostringstream os;
    bool first = true;
    for (int i = 0; i < free_rank_; ++i) {
        os << (first ? "" : "x") << "Z";
        first = false;
    }
    for (auto n : torsion_) {
        os << (first ? "" : "x") << "Z/" << n;
        first = false;
    }
    if (first) os << "0";
    return os.str();
}

}  // namespace flatchain
