#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "flatchain/coeff.hpp"
#include "flatchain/mesh.hpp"

namespace flatchain {

/// Selects cells of a complex by (dimension, id).
using CellPredicate = std::function<bool(int dim, int id)>;

/// A finite chain sum g_i [[sigma_i]] of n-cells of a background complex
/// with coefficients in a CoefficientGroup. Only nonzero coefficients are
/// stored, each against the stored orientation of its cell.
class Chain {
public:
    Chain(std::shared_ptr<const Complex> complex, int dim, CoefficientGroup group);

    const std::shared_ptr<const Complex>& complex_ptr() const { return complex_; }
    const Complex& complex() const { return *complex_; }
    int dim() const { return dim_; }
    const CoefficientGroup& group() const { return group_; }
    const std::map<int, GroupElement>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool is_zero() const { return entries_.empty(); }

    GroupElement coefficient(int cell) const;

    /// Adds g to the coefficient of a stored cell.
    void accumulate(int cell, const GroupElement& g);
    /// Adds g [[tuple]] where the tuple may list the cell's vertices in any
    /// order; an odd permutation negates g.
    void accumulate_oriented(std::span<const int> vertices, const GroupElement& g);

    Chain operator-() const;
    Chain operator+(const Chain& other) const;
    Chain operator-(const Chain& other) const;
    Chain scaled(std::int64_t k) const;

    /// Structural equality: same complex instance, dimension, group, entries.
    friend bool operator==(const Chain& a, const Chain& b);

private:
    void require_compatible(const Chain& other) const;

    std::shared_ptr<const Complex> complex_;
    int dim_;
    CoefficientGroup group_;
    std::map<int, GroupElement> entries_;
};

/// Boundary operator; throws InputError for 0-chains.
Chain boundary(const Chain& s);

/// sum |g_i| * H^n(sigma_i).
double mass(const Chain& s);

/// S restricted to the cells (of dimension dim S) accepted by the predicate.
Chain restrict(const Chain& s, const CellPredicate& keep);

/// Sum of the coefficients of a 0-chain; throws InputError otherwise.
GroupElement augmentation(const Chain& s);

/// Closed support: every cell with a nonzero coefficient plus all its faces,
/// listed per dimension.
std::vector<std::set<int>> support(const Chain& s);

/// Shortest distance between the closed supports of two chains (any
/// complexes in the same ambient space). +inf when either is empty.
double support_distance(const Chain& a, const Chain& b);

nlohmann::json chain_to_json(const Chain& s);
Chain chain_from_json(const nlohmann::json& j, std::shared_ptr<const Complex> complex);

/// Region file: {"box": {"min": [...], "max": [...]}} (open box, tested on
/// barycenters) or {"cells": {"<dim>": [ids...]}}.
CellPredicate region_from_json(const nlohmann::json& j, std::shared_ptr<const Complex> complex);

/// Cells whose closure avoids the topological boundary of the complex.
CellPredicate interior_predicate(std::shared_ptr<const Complex> complex);

}  // namespace flatchain
