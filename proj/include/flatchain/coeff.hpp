#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace flatchain {

/// An element of Z^r x Z/n_1 x ... x Z/n_s. Components are stored free part
/// first, torsion residues after. Elements do not carry their group; every
/// operation goes through a CoefficientGroup, which validates the shape.
class GroupElement {
public:
    GroupElement() = default;
    explicit GroupElement(std::vector<std::int64_t> components)
        : c_(std::move(components)) {}

    std::span<const std::int64_t> components() const { return c_; }
    std::int64_t operator[](std::size_t i) const { return c_[i]; }
    std::size_t size() const { return c_.size(); }

    bool is_zero() const {
        for (auto v : c_)
            if (v != 0) return false;
        return true;
    }

    friend bool operator==(const GroupElement&, const GroupElement&) = default;
    friend auto operator<=>(const GroupElement&, const GroupElement&) = default;

private:
    friend class CoefficientGroup;
    std::vector<std::int64_t> c_;
};

/// A finitely generated abelian group with a finite generating set and the
/// induced word-length norm |a| = min { sum |d_j| : a = sum d_j gamma_j }.
///
/// Descriptors are compared structurally; chains over different descriptors
/// never mix.
class CoefficientGroup {
public:
    /// Standard generators: the unit vectors of every factor.
    CoefficientGroup(int free_rank, std::vector<std::int64_t> torsion_orders);

    /// Custom generating set; throws InputError unless the elements generate
    /// the whole group.
    CoefficientGroup(int free_rank, std::vector<std::int64_t> torsion_orders,
                     std::vector<GroupElement> generators);

    static CoefficientGroup integers() { return {1, {}}; }
    static CoefficientGroup cyclic(std::int64_t n) { return {0, {n}}; }

    int free_rank() const { return free_rank_; }
    const std::vector<std::int64_t>& torsion_orders() const { return torsion_; }
    const std::vector<GroupElement>& generators() const { return generators_; }
    bool standard_generators() const { return standard_; }
    std::size_t arity() const { return static_cast<std::size_t>(free_rank_) + torsion_.size(); }
    bool is_finite() const { return free_rank_ == 0; }
    /// Number of elements of the torsion part.
    std::int64_t torsion_size() const;

    GroupElement zero() const;
    /// Builds an element from raw components, reducing torsion residues.
    GroupElement element(std::vector<std::int64_t> components) const;
    /// i-th standard unit element.
    GroupElement unit(std::size_t i) const;

    GroupElement add(const GroupElement& a, const GroupElement& b) const;
    GroupElement neg(const GroupElement& a) const;
    GroupElement sub(const GroupElement& a, const GroupElement& b) const {
        return add(a, neg(b));
    }
    GroupElement scale(std::int64_t k, const GroupElement& a) const;

    /// Word-length norm. Closed form on the free part for standard
    /// generators, Cayley-graph BFS otherwise (radius cap 64, CapExceededError
    /// beyond).
    std::int64_t norm(const GroupElement& g) const;

    /// Enumerates all elements whose free components lie in [-bound, bound].
    std::vector<GroupElement> enumerate(std::int64_t bound) const;

    bool contains(const GroupElement& g) const;

    nlohmann::json to_json() const;
    static CoefficientGroup from_json(const nlohmann::json& j);
    nlohmann::json element_to_json(const GroupElement& g) const;
    GroupElement element_from_json(const nlohmann::json& j) const;

    std::string to_string() const;

    friend bool operator==(const CoefficientGroup& a, const CoefficientGroup& b) {
        return a.free_rank_ == b.free_rank_ && a.torsion_ == b.torsion_ &&
               a.generators_ == b.generators_;
    }

    static constexpr std::int64_t kBfsRadiusCap = 64;

private:
    void check(const GroupElement& g) const;
    void reduce(std::vector<std::int64_t>& c) const;
    std::int64_t torsion_index(std::span<const std::int64_t> torsion) const;
    void build_torsion_table();
    std::int64_t bfs_norm(const GroupElement& g) const;

    int free_rank_ = 0;
    std::vector<std::int64_t> torsion_;
    std::vector<GroupElement> generators_;
    bool standard_ = true;
    // Word-length of each torsion element under the standard generators,
    // indexed mixed-radix.
    std::vector<std::int32_t> torsion_norm_;
};

}  // namespace flatchain
