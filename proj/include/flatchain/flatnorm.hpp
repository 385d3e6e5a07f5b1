#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flatchain/chain.hpp"

namespace flatchain {

enum class Exactness {
    kExact,       // proven optimal on the background complex
    kLpRelaxed,   // feasible decomposition, optimum bracketed by lower_bound
    kUpperBound,  // feasible decomposition only
};

std::string to_string(Exactness e);

struct FlatDecomposition {
    double value = 0;
    Chain P;
    Chain Q;
    Exactness exactness = Exactness::kExact;
    /// Certified lower bound on the optimum (equals value when exact).
    double lower_bound = 0;
};

struct FlatOptions {
    /// Branch-and-bound node budget for integer components.
    int max_lp_nodes = 400;
    /// Node budget for the cyclic-coefficient depth-first search.
    std::int64_t max_search_nodes = std::int64_t{1} << 22;
    /// Largest dense LP (rows * columns) attempted.
    std::int64_t max_lp_entries = std::int64_t{12} << 20;
};

/// min over P, Q of  sum_c p_cost[c] |p_c| + sum_r q_cost[r] |q_r|
/// subject to  q + B p = target  (entrywise over Z, or over Z/n).
/// Columns of B are sparse (row, coefficient) lists.
struct DecompositionProblem {
    int rows = 0;
    std::vector<std::vector<std::pair<int, int>>> columns;
    std::vector<std::int64_t> target;
    std::vector<double> p_cost;
    std::vector<double> q_cost;
};

struct DecompositionResult {
    std::vector<std::int64_t> p;
    std::vector<std::int64_t> q;
    double value = 0;
    Exactness exactness = Exactness::kExact;
    double lower_bound = 0;
};

/// Cost of a candidate p over Z; q = target - B p is written out.
double evaluate_decomposition(const DecompositionProblem& problem, const std::vector<std::int64_t>& p,
                              std::vector<std::int64_t>& q);

/// Integer coefficients. Graph-shaped problems (every column one +1 and one
/// -1) are transport problems and solved exactly by shortest paths and an
/// assignment; otherwise LP relaxation, rounding, then branch and bound.
DecompositionResult solve_integer_decomposition(const DecompositionProblem& problem,
                                                const FlatOptions& options = {});

/// Coefficients in Z/n with the cyclic norm min(r, n - r): depth-first
/// branch and bound over the P entries.
DecompositionResult solve_cyclic_decomposition(const DecompositionProblem& problem, std::int64_t n,
                                               const FlatOptions& options = {});

/// F(S) = min M(P) + M(Q) over S = dP + Q on the complex of S.
FlatDecomposition flat_norm(const Chain& s, const FlatOptions& options = {});

/// F_U(S) = min M(P|U) + M(Q|U); Q absorbs everything outside U for free.
FlatDecomposition relative_flat_norm(const Chain& s, const CellPredicate& inside,
                                     const FlatOptions& options = {});

/// Exhaustive minimum over all P with free components in
/// [-coefficient_bound, coefficient_bound]. Throws CapExceededError above
/// 14 cells in dimensions n, n+1 or 2e7 candidate P.
FlatDecomposition flat_norm_oracle(const Chain& s, std::int64_t coefficient_bound,
                                   const std::optional<CellPredicate>& inside = std::nullopt);

inline constexpr int kOracleCellCap = 14;
inline constexpr std::int64_t kOracleCombinationCap = 20'000'000;

}  // namespace flatchain
