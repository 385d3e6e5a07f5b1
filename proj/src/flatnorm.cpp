#include "flatchain/flatnorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>

#include "flatchain/error.hpp"
#include "flatchain/lp.hpp"

namespace flatchain {

std::string to_string(Exactness e) {
    switch (e) {
        case Exactness::kExact: return "exact";
        case Exactness::kLpRelaxed: return "lp-relaxed";
        case Exactness::kUpperBound: return "upper-bound";
    }
    return "unknown";
}

namespace {

constexpr double kTol = 1e-9;

std::int64_t cyclic_norm(std::int64_t r, std::int64_t n) {
    r %= n;
    if (r < 0) r += n;
    return std::min(r, n - r);
}

}  // namespace

double evaluate_decomposition(const DecompositionProblem& pr, const std::vector<std::int64_t>& p,
                              std::vector<std::int64_t>& q) {
    q = pr.target;
    for (std::size_t c = 0; c < pr.columns.size(); ++c)
        if (p[c] != 0)
            for (auto [r, a] : pr.columns[c]) q[r] -= a * p[c];
    double v = 0;
    for (std::size_t c = 0; c < p.size(); ++c) v += pr.p_cost[c] * static_cast<double>(std::llabs(p[c]));
    for (int r = 0; r < pr.rows; ++r) v += pr.q_cost[r] * static_cast<double>(std::llabs(q[r]));
    return v;
}

namespace {

struct Node {
    std::vector<double> lo, hi;
    double parent_bound;
};

// Columns with exactly one +1 and one -1 entry: B is a graph incidence
// matrix and the problem is a transport problem.
bool is_graph_problem(const DecompositionProblem& pr) {
    for (const auto& col : pr.columns) {
        if (col.size() != 2) return false;
        if (col[0].second + col[1].second != 0 || std::abs(col[0].second) != 1) return false;
    }
    return true;
}

// Minimum-cost perfect assignment on a square matrix.
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0), v(n + 1, 0), way_min(n + 1);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(way_min.begin(), way_min.end(), inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < way_min[j]) {
                    way_min[j] = cur;
                    way[j] = j0;
                }
                if (way_min[j] < delta) {
                    delta = way_min[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    way_min[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> match(n);
    for (int j = 1; j <= n; ++j) match[p[j] - 1] = j - 1;
    return match;
}

// Exact solution of a graph-shaped integer problem: unit charges either
// pair up along shortest paths or are absorbed at the cheapest reachable
// vertex (the Q part).
DecompositionResult solve_transport(const DecompositionProblem& pr) {
    const int nv = pr.rows;
    const int ne = static_cast<int>(pr.columns.size());
    // An arc x -> y with p_e += dir contributes x - y to dP: it carries one
    // unit of positive charge from x to y.
    struct Arc {
        int to, edge, dir;
    };
    std::vector<std::vector<Arc>> adj(nv);
    for (int e = 0; e < ne; ++e) {
        auto [r0, a0] = pr.columns[e][0];
        auto [r1, a1] = pr.columns[e][1];
        int head = a0 > 0 ? r0 : r1, tail = a0 > 0 ? r1 : r0;
        adj[head].push_back({tail, e, +1});
        adj[tail].push_back({head, e, -1});
    }
    std::vector<int> pos, neg;
    for (int r = 0; r < nv; ++r) {
        for (std::int64_t i = 0; i < pr.target[r]; ++i) pos.push_back(r);
        for (std::int64_t i = 0; i < -pr.target[r]; ++i) neg.push_back(r);
    }
    std::vector<int> sources = pos;
    sources.insert(sources.end(), neg.begin(), neg.end());
    std::sort(sources.begin(), sources.end());
    sources.erase(std::unique(sources.begin(), sources.end()), sources.end());

    const double inf = std::numeric_limits<double>::infinity();
    struct Tree {
        std::vector<double> dist;
        std::vector<int> pred, pred_edge, pred_dir;
        int sink = -1;
        double sink_cost = 0;
    };
    std::map<int, Tree> trees;
    for (int s : sources) {
        Tree t{std::vector<double>(nv, inf), std::vector<int>(nv, -1), std::vector<int>(nv, -1),
               std::vector<int>(nv, 0)};
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        t.dist[s] = 0;
        heap.push({0, s});
        while (!heap.empty()) {
            auto [d, x] = heap.top();
            heap.pop();
            if (d > t.dist[x]) continue;
            for (const auto& arc : adj[x]) {
                double nd = d + pr.p_cost[arc.edge];
                if (nd < t.dist[arc.to]) {
                    t.dist[arc.to] = nd;
                    t.pred[arc.to] = x;
                    t.pred_edge[arc.to] = arc.edge;
                    t.pred_dir[arc.to] = arc.dir;
                    heap.push({nd, arc.to});
                }
            }
        }
        t.sink_cost = inf;
        for (int w = 0; w < nv; ++w) {
            double c = t.dist[w] + pr.q_cost[w];
            if (c < t.sink_cost) {
                t.sink_cost = c;
                t.sink = w;
            }
        }
        trees.emplace(s, std::move(t));
    }
    const int np = static_cast<int>(pos.size()), nn = static_cast<int>(neg.size());
    const int n = np + nn;
    std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i < np && j < nn)
                cost[i][j] = trees.at(pos[i]).dist[neg[j]];
            else if (i < np)
                cost[i][j] = trees.at(pos[i]).sink_cost;
            else if (j < nn)
                cost[i][j] = trees.at(neg[j]).sink_cost;
        }
    auto match = n > 0 ? hungarian(cost) : std::vector<int>{};

    DecompositionResult res;
    res.p.assign(ne, 0);
    res.q.assign(nv, 0);
    // Carries `sign` units of charge from `from` to `to` along the
    // shortest-path tree rooted at `from`.
    auto route = [&](int from, int to, int sign) {
        const auto& t = trees.at(from);
        for (int x = to; x != from; x = t.pred[x]) {
            if (t.pred[x] < 0) throw Error("internal: target unreachable in transport problem");
            res.p[t.pred_edge[x]] += sign * t.pred_dir[x];
        }
    };
    std::vector<char> neg_matched(nn, 0);
    for (int i = 0; i < np; ++i) {
        int j = match[i];
        if (j < nn) {
            route(pos[i], neg[j], 1);
            neg_matched[j] = 1;
        } else {
            const auto& t = trees.at(pos[i]);
            route(pos[i], t.sink, 1);
            res.q[t.sink] += 1;
        }
    }
    for (int j = 0; j < nn; ++j) {
        if (neg_matched[j]) continue;
        const auto& t = trees.at(neg[j]);
        route(neg[j], t.sink, -1);
        res.q[t.sink] -= 1;
    }
    res.value = 0;
    for (int e = 0; e < ne; ++e) res.value += pr.p_cost[e] * static_cast<double>(std::llabs(res.p[e]));
    for (int r = 0; r < nv; ++r) res.value += pr.q_cost[r] * static_cast<double>(std::llabs(res.q[r]));
    res.exactness = Exactness::kExact;
    res.lower_bound = res.value;
    return res;
}

}  // namespace

DecompositionResult solve_integer_decomposition(const DecompositionProblem& pr, const FlatOptions& options) {
    const int ncol = static_cast<int>(pr.columns.size());
    if (is_graph_problem(pr) && !pr.columns.empty()) return solve_transport(pr);
    DecompositionResult best;
    best.p.assign(ncol, 0);
    best.value = evaluate_decomposition(pr, best.p, best.q);
    best.lower_bound = 0;
    best.exactness = Exactness::kUpperBound;
    if (best.value <= kTol) {
        best.exactness = Exactness::kExact;
        best.lower_bound = best.value;
        return best;
    }

    // Rows touched by no column have q fixed; keep the rest in the LP.
    std::vector<int> lp_row(pr.rows, -1);
    int m = 0;
    for (const auto& col : pr.columns)
        for (auto [r, a] : col)
            if (a != 0 && lp_row[r] < 0) lp_row[r] = m++;
    double fixed = 0;
    for (int r = 0; r < pr.rows; ++r)
        if (lp_row[r] < 0) fixed += pr.q_cost[r] * static_cast<double>(std::llabs(pr.target[r]));
    const int cols = 2 * m + 2 * ncol;
    if (static_cast<std::int64_t>(m) * (cols + m) > options.max_lp_entries) return best;

    lp::Problem base(m, cols);
    for (int r = 0; r < pr.rows; ++r) {
        if (lp_row[r] < 0) continue;
        int i = lp_row[r];
        base.b[i] = static_cast<double>(pr.target[r]);
        base.at(i, i) = 1;
        base.at(i, m + i) = -1;
        base.cost[i] = base.cost[m + i] = pr.q_cost[r];
    }
    for (int c = 0; c < ncol; ++c) {
        for (auto [r, a] : pr.columns[c]) {
            if (a == 0) continue;
            base.at(lp_row[r], 2 * m + c) += a;
            base.at(lp_row[r], 2 * m + ncol + c) -= a;
        }
        base.cost[2 * m + c] = base.cost[2 * m + ncol + c] = pr.p_cost[c];
    }

    const double inf = lp::kInf;
    std::vector<Node> stack;
    stack.push_back({std::vector<double>(ncol, -inf), std::vector<double>(ncol, inf), 0.0});
    int nodes = 0;
    double root_bound = -inf;
    bool complete = true;
    std::vector<std::int64_t> cand(ncol), q;
    while (!stack.empty()) {
        if (nodes >= options.max_lp_nodes) {
            complete = false;
            break;
        }
        Node node = std::move(stack.back());
        stack.pop_back();
        if (node.parent_bound >= best.value - kTol) continue;
        ++nodes;
        lp::Problem prob = base;
        for (int c = 0; c < ncol; ++c) {
            double lo = node.lo[c], hi = node.hi[c];
            prob.lower[2 * m + c] = std::max(lo, 0.0);
            prob.upper[2 * m + c] = std::max(hi, 0.0);
            prob.lower[2 * m + ncol + c] = std::max(-hi, 0.0);
            prob.upper[2 * m + ncol + c] = std::max(-lo, 0.0);
        }
        auto sol = lp::solve(prob);
        if (sol.status == lp::Status::kInfeasible) continue;
        if (sol.status != lp::Status::kOptimal) {
            complete = false;
            continue;
        }
        double bound = sol.objective + fixed;
        if (nodes == 1) root_bound = bound;
        if (bound >= best.value - kTol) continue;
        int frac = -1;
        double worst = 1e-6;
        for (int c = 0; c < ncol; ++c) {
            double v = sol.x[2 * m + c] - sol.x[2 * m + ncol + c];
            cand[c] = std::llround(v);
            double f = std::abs(v - std::round(v));
            if (f > worst) {
                worst = f;
                frac = c;
            }
        }
        double v = evaluate_decomposition(pr, cand, q);
        if (v < best.value - kTol) {
            best.value = v;
            best.p = cand;
            best.q = q;
        }
        if (frac < 0 || bound >= best.value - kTol) continue;
        double x = sol.x[2 * m + frac] - sol.x[2 * m + ncol + frac];
        Node down = node, up = std::move(node);
        down.hi[frac] = std::floor(x);
        up.lo[frac] = std::ceil(x);
        down.parent_bound = up.parent_bound = bound;
        // Explore the side nearer the LP value first.
        if (x - std::floor(x) < 0.5) {
            stack.push_back(std::move(up));
            stack.push_back(std::move(down));
        } else {
            stack.push_back(std::move(down));
            stack.push_back(std::move(up));
        }
    }
    if (complete && stack.empty()) {
        best.exactness = Exactness::kExact;
        best.lower_bound = best.value;
    } else {
        double lb = std::isfinite(root_bound) ? root_bound : 0.0;
        if (!stack.empty()) {
            double open = inf;
            for (const auto& n : stack) open = std::min(open, n.parent_bound);
            lb = std::max(lb, std::min(open, best.value));
        }
        best.lower_bound = std::min(std::max(lb, 0.0), best.value);
        best.exactness = std::isfinite(root_bound) ? Exactness::kLpRelaxed : Exactness::kUpperBound;
        if (best.lower_bound >= best.value - kTol) {
            best.exactness = Exactness::kExact;
            best.lower_bound = best.value;
        }
    }
    return best;
}

DecompositionResult solve_cyclic_decomposition(const DecompositionProblem& pr, std::int64_t n,
                                               const FlatOptions& options) {
    if (n < 2) throw InputError("cyclic decomposition needs n >= 2");
    const int ncol = static_cast<int>(pr.columns.size());
    std::vector<std::int64_t> target(pr.rows);
    for (int r = 0; r < pr.rows; ++r) target[r] = ((pr.target[r] % n) + n) % n;

    // Rows become determined after the last column touching them is fixed.
    std::vector<int> last(pr.rows, -1);
    for (int c = 0; c < ncol; ++c)
        for (auto [r, a] : pr.columns[c])
            if (a % n != 0) last[r] = c;
    std::vector<std::vector<int>> closes(ncol);
    double fixed = 0;
    for (int r = 0; r < pr.rows; ++r) {
        if (last[r] >= 0)
            closes[last[r]].push_back(r);
        else
            fixed += pr.q_cost[r] * static_cast<double>(cyclic_norm(target[r], n));
    }
    std::vector<std::int64_t> order;
    order.push_back(0);
    for (std::int64_t k = 1; 2 * k <= n; ++k) {
        order.push_back(k);
        if (n - k != k) order.push_back(n - k);
    }

    DecompositionResult best;
    best.p.assign(ncol, 0);
    {
        double v = fixed;
        for (int r = 0; r < pr.rows; ++r)
            if (last[r] >= 0) v += pr.q_cost[r] * static_cast<double>(cyclic_norm(target[r], n));
        best.value = v;
    }
    std::vector<std::int64_t> p(ncol, 0), acc(pr.rows, 0);
    std::int64_t nodes = 0;
    bool aborted = false;

    auto dfs = [&](auto&& self, int c, double cost) -> void {
        if (aborted) return;
        if (++nodes > options.max_search_nodes) {
            aborted = true;
            return;
        }
        if (c == ncol) {
            if (cost < best.value - kTol) {
                best.value = cost;
                best.p = p;
            }
            return;
        }
        for (auto v : order) {
            double step = pr.p_cost[c] * static_cast<double>(cyclic_norm(v, n));
            if (v != 0)
                for (auto [r, a] : pr.columns[c]) acc[r] = ((acc[r] + a * v) % n + n) % n;
            p[c] = v;
            for (int r : closes[c]) step += pr.q_cost[r] * static_cast<double>(cyclic_norm(target[r] - acc[r], n));
            if (cost + step < best.value - kTol) self(self, c + 1, cost + step);
            if (v != 0)
                for (auto [r, a] : pr.columns[c]) acc[r] = ((acc[r] - a * v) % n + n) % n;
            p[c] = 0;
            if (aborted) return;
        }
    };
    dfs(dfs, 0, fixed);

    best.q = target;
    for (int c = 0; c < ncol; ++c)
        if (best.p[c] != 0)
            for (auto [r, a] : pr.columns[c]) best.q[r] = ((best.q[r] - a * best.p[c]) % n + n) % n;
    if (aborted) {
        best.exactness = Exactness::kUpperBound;
        best.lower_bound = 0;
    } else {
        best.exactness = Exactness::kExact;
        best.lower_bound = best.value;
    }
    return best;
}

namespace {

Exactness combine(Exactness a, Exactness b) { return static_cast<Exactness>(std::max(static_cast<int>(a), static_cast<int>(b))); }

double decomposition_value(const Chain& p, const Chain& q, const CellPredicate* inside) {
    if (!inside) return mass(p) + mass(q);
    return mass(restrict(p, *inside)) + mass(restrict(q, *inside));
}

void verify(const Chain& s, const Chain& p, const Chain& q) {
    if (!(boundary(p) + q == s)) throw Error("internal: flat decomposition does not reproduce S");
}

void require_filling_cells(const Chain& s) {
    if (s.dim() + 1 > s.complex().dimension())
        throw InputError("flat norm needs (n+1)-cells on the complex of an n-chain");
}

FlatDecomposition solve_flat(const Chain& s, const CellPredicate* inside, const FlatOptions& options) {
    require_filling_cells(s);
    const Complex& cx = s.complex();
    const int n = s.dim();
    const auto& group = s.group();
    const int rows = static_cast<int>(cx.num_cells(n));
    const int ncol = static_cast<int>(cx.num_cells(n + 1));

    if (!group.standard_generators()) {
        try {
            auto res = flat_norm_oracle(s, 2, inside ? std::optional<CellPredicate>(*inside) : std::nullopt);
            if (!group.is_finite()) {
                res.exactness = Exactness::kUpperBound;
                res.lower_bound = 0;
            }
            return res;
        } catch (const CapExceededError&) {
            Chain p(s.complex_ptr(), n + 1, group);
            double v = decomposition_value(p, s, inside);
            return {v, p, s, Exactness::kUpperBound, 0.0};
        }
    }

    DecompositionProblem pr;
    pr.rows = rows;
    pr.columns.resize(ncol);
    pr.p_cost.resize(ncol);
    pr.q_cost.resize(rows);
    for (int c = 0; c < ncol; ++c) {
        for (const auto& inc : cx.boundary_incidence(n + 1, c)) pr.columns[c].emplace_back(inc.facet, inc.sign);
        pr.p_cost[c] = (!inside || (*inside)(n + 1, c)) ? cx.volume(n + 1, c) : 0.0;
    }
    for (int r = 0; r < rows; ++r) pr.q_cost[r] = (!inside || (*inside)(n, r)) ? cx.volume(n, r) : 0.0;

    const std::size_t arity = group.arity();
    std::vector<std::vector<std::int64_t>> pc(ncol, std::vector<std::int64_t>(arity, 0));
    std::vector<std::vector<std::int64_t>> qc(rows, std::vector<std::int64_t>(arity, 0));
    Exactness ex = Exactness::kExact;
    double lower = 0;
    for (std::size_t comp = 0; comp < arity; ++comp) {
        pr.target.assign(rows, 0);
        bool any = false;
        for (const auto& [cell, g] : s.entries()) {
            pr.target[cell] = g[comp];
            any = any || g[comp] != 0;
        }
        if (!any) continue;
        DecompositionResult res = static_cast<int>(comp) < group.free_rank()
                                      ? solve_integer_decomposition(pr, options)
                                      : solve_cyclic_decomposition(
                                            pr, group.torsion_orders()[comp - group.free_rank()], options);
        ex = combine(ex, res.exactness);
        lower += res.lower_bound;
        for (int c = 0; c < ncol; ++c) pc[c][comp] = res.p[c];
        for (int r = 0; r < rows; ++r) qc[r][comp] = res.q[r];
    }
    Chain p(s.complex_ptr(), n + 1, group), q(s.complex_ptr(), n, group);
    for (int c = 0; c < ncol; ++c) p.accumulate(c, group.element(pc[c]));
    for (int r = 0; r < rows; ++r) q.accumulate(r, group.element(qc[r]));
    verify(s, p, q);
    double value = decomposition_value(p, q, inside);
    if (ex == Exactness::kExact) lower = value;
    return {value, p, q, ex, std::min(lower, value)};
}

}  // namespace

FlatDecomposition flat_norm(const Chain& s, const FlatOptions& options) { return solve_flat(s, nullptr, options); }

FlatDecomposition relative_flat_norm(const Chain& s, const CellPredicate& inside, const FlatOptions& options) {
    return solve_flat(s, &inside, options);
}

FlatDecomposition flat_norm_oracle(const Chain& s, std::int64_t coefficient_bound,
                                   const std::optional<CellPredicate>& inside) {
    require_filling_cells(s);
    const Complex& cx = s.complex();
    const int n = s.dim();
    const auto& group = s.group();
    const int rows = static_cast<int>(cx.num_cells(n));
    const int ncol = static_cast<int>(cx.num_cells(n + 1));
    if (rows + ncol > kOracleCellCap)
        throw CapExceededError("oracle limited to " + std::to_string(kOracleCellCap) + " cells in dimensions n, n+1");
    auto elems = group.enumerate(coefficient_bound);
    double combos = std::pow(static_cast<double>(elems.size()), ncol);
    if (combos > static_cast<double>(kOracleCombinationCap))
        throw CapExceededError("oracle would enumerate " + std::to_string(combos) + " candidates");

    std::vector<double> pcost(ncol), qcost(rows);
    for (int c = 0; c < ncol; ++c) pcost[c] = (!inside || (*inside)(n + 1, c)) ? cx.volume(n + 1, c) : 0.0;
    for (int r = 0; r < rows; ++r) qcost[r] = (!inside || (*inside)(n, r)) ? cx.volume(n, r) : 0.0;
    std::vector<std::int64_t> enorm(elems.size());
    for (std::size_t i = 0; i < elems.size(); ++i) enorm[i] = group.norm(elems[i]);
    std::vector<GroupElement> negs(elems.size());
    for (std::size_t i = 0; i < elems.size(); ++i) negs[i] = group.neg(elems[i]);

    std::vector<GroupElement> base(rows, group.zero());
    for (const auto& [cell, g] : s.entries()) base[cell] = g;

    std::vector<std::size_t> idx(ncol, 0);
    std::size_t zero_idx = 0;
    for (std::size_t i = 0; i < elems.size(); ++i)
        if (elems[i].is_zero()) zero_idx = i;
    std::fill(idx.begin(), idx.end(), zero_idx);
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_idx;
    std::vector<GroupElement> q(rows);
    while (true) {
        double cost = 0;
        for (int c = 0; c < ncol; ++c) cost += pcost[c] * static_cast<double>(enorm[idx[c]]);
        if (cost < best - kTol) {
            q = base;
            for (int c = 0; c < ncol; ++c) {
                if (idx[c] == zero_idx) continue;
                for (const auto& inc : cx.boundary_incidence(n + 1, c))
                    q[inc.facet] = group.add(q[inc.facet], inc.sign > 0 ? negs[idx[c]] : elems[idx[c]]);
            }
            for (int r = 0; r < rows && cost < best - kTol; ++r)
                cost += qcost[r] * static_cast<double>(group.norm(q[r]));
            if (cost < best - kTol) {
                best = cost;
                best_idx = idx;
            }
        }
        int c = 0;
        while (c < ncol) {
            idx[c] = (idx[c] + 1) % elems.size();
            if (idx[c] != zero_idx) break;
            ++c;
        }
        if (c == ncol) break;
    }
    Chain p(s.complex_ptr(), n + 1, group);
    for (int c = 0; c < ncol; ++c) p.accumulate(c, elems[best_idx[c]]);
    Chain qc = s - boundary(p);
    double value = inside ? decomposition_value(p, qc, &*inside) : decomposition_value(p, qc, nullptr);
    return {value, p, qc, Exactness::kExact, value};
}

}  // namespace flatchain
