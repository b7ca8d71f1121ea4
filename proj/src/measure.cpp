#include "ramiflow/measure.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

namespace ramiflow {

DiscreteMeasure::DiscreteMeasure(int dim) : dim_(dim) {
    if (dim < 0) throw std::invalid_argument("DiscreteMeasure: negative dimension");
}

DiscreteMeasure::DiscreteMeasure(int dim, std::vector<Atom> atoms) : dim_(dim) {
    if (dim <= 0 && !atoms.empty())
        throw std::invalid_argument("DiscreteMeasure: dimension must be positive");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const Atom& a = atoms[i];
        if (static_cast<int>(a.pos.size()) != dim)
            throw std::invalid_argument("DiscreteMeasure: atom " + std::to_string(i) +
                                        " has wrong dimension");
        if (!is_finite(a.pos))
            throw std::invalid_argument("DiscreteMeasure: atom " + std::to_string(i) +
                                        " has non-finite position");
        if (!(a.mass > 0.0) || !std::isfinite(a.mass))
            throw std::invalid_argument("DiscreteMeasure: atom " + std::to_string(i) +
                                        " must have positive finite mass");
    }
    // Merge bitwise-equal positions, accumulating in input order.
    std::map<Vec, double> merged;
    for (const Atom& a : atoms) merged[a.pos] += a.mass;
    atoms_.reserve(merged.size());
    for (auto& [pos, mass] : merged) atoms_.push_back({pos, mass});
}

double DiscreteMeasure::total_mass() const {
    double s = 0;
    for (const Atom& a : atoms_) s += a.mass;
    return s;
}

double total_mass(const DiscreteMeasure& mu) { return mu.total_mass(); }

DiscreteMeasure grid_discretize(const DiscreteMeasure& mu, double h) {
    if (!(h > 0.0) || !std::isfinite(h))
        throw std::invalid_argument("grid_discretize: step must be positive");
    std::vector<Atom> snapped;
    snapped.reserve(mu.size());
    for (const Atom& a : mu.atoms()) {
        Vec corner(a.pos.size());
        for (std::size_t i = 0; i < a.pos.size(); ++i)
            corner[i] = h * std::floor(a.pos[i] / h);
        snapped.push_back({std::move(corner), a.mass});
    }
    return DiscreteMeasure(mu.dim(), std::move(snapped));
}

namespace {

// Transportation simplex state: basis cells form a spanning tree of the
// bipartite row/column graph.
struct Basis {
    std::size_t rows = 0, cols = 0;
    // flow[r][c] valid only on basic cells
    std::vector<std::vector<double>> flow;
    std::vector<std::vector<char>> basic;

    std::vector<std::pair<std::size_t, std::size_t>> basic_cells() const {
        std::vector<std::pair<std::size_t, std::size_t>> cells;
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c)
                if (basic[r][c]) cells.emplace_back(r, c);
        return cells;
    }
};

Basis northwest_corner(const std::vector<double>& a, const std::vector<double>& b) {
    Basis bs;
    bs.rows = a.size();
    bs.cols = b.size();
    bs.flow.assign(bs.rows, std::vector<double>(bs.cols, 0.0));
    bs.basic.assign(bs.rows, std::vector<char>(bs.cols, 0));
    std::vector<double> ra = a, rb = b;
    std::size_t r = 0, c = 0;
    while (r < bs.rows && c < bs.cols) {
        double f = std::min(ra[r], rb[c]);
        bs.flow[r][c] = f;
        bs.basic[r][c] = 1;
        ra[r] -= f;
        rb[c] -= f;
        // Advance one side only, keeping exactly rows+cols-1 basic cells
        // (degenerate zero cells included).
        if (r + 1 == bs.rows && c + 1 == bs.cols) break;
        if (ra[r] <= rb[c] && r + 1 < bs.rows)
            ++r;
        else
            ++c;
    }
    return bs;
}

// Duals from the basis tree: u[0] = 0, u[r] + v[c] = cost[r][c] on basic cells.
void compute_duals(const Basis& bs, const std::vector<std::vector<double>>& cost,
                   std::vector<double>& u, std::vector<double>& v) {
    const double unset = std::numeric_limits<double>::quiet_NaN();
    u.assign(bs.rows, unset);
    v.assign(bs.cols, unset);
    std::vector<std::vector<std::size_t>> row_cells(bs.rows), col_cells(bs.cols);
    for (std::size_t r = 0; r < bs.rows; ++r)
        for (std::size_t c = 0; c < bs.cols; ++c)
            if (bs.basic[r][c]) {
                row_cells[r].push_back(c);
                col_cells[c].push_back(r);
            }
    // BFS over the tree; the basis may decompose if degenerate bookkeeping ever
    // broke the tree, so seed every still-unset row.
    std::vector<std::pair<char, std::size_t>> stack;  // ('r', idx) or ('c', idx)
    for (std::size_t seed = 0; seed < bs.rows; ++seed) {
        if (!std::isnan(u[seed])) continue;
        u[seed] = 0.0;
        stack.push_back({'r', seed});
        while (!stack.empty()) {
            auto [kind, idx] = stack.back();
            stack.pop_back();
            if (kind == 'r') {
                for (std::size_t c : row_cells[idx])
                    if (std::isnan(v[c])) {
                        v[c] = cost[idx][c] - u[idx];
                        stack.push_back({'c', c});
                    }
            } else {
                for (std::size_t r : col_cells[idx])
                    if (std::isnan(u[r])) {
                        u[r] = cost[r][idx] - v[idx];
                        stack.push_back({'r', r});
                    }
            }
        }
    }
    for (std::size_t c = 0; c < bs.cols; ++c)
        if (std::isnan(v[c])) v[c] = 0.0;
}

// Unique alternating cycle created by adding (er, ec) to the basis tree:
// returns cells in cycle order starting with the entering cell.
std::vector<std::pair<std::size_t, std::size_t>> find_pivot_cycle(const Basis& bs, std::size_t er,
                                                                  std::size_t ec) {
    // Path from row er to column ec through basic cells.
    struct Node {
        char kind;
        std::size_t idx;
    };
    std::vector<std::vector<std::size_t>> row_cells(bs.rows), col_cells(bs.cols);
    for (std::size_t r = 0; r < bs.rows; ++r)
        for (std::size_t c = 0; c < bs.cols; ++c)
            if (bs.basic[r][c]) {
                row_cells[r].push_back(c);
                col_cells[c].push_back(r);
            }
    // DFS from row er looking for column ec.
    std::vector<Node> path{{'r', er}};
    std::vector<char> vis_row(bs.rows, 0), vis_col(bs.cols, 0);
    vis_row[er] = 1;

    std::function<bool()> dfs = [&]() -> bool {
        Node cur = path.back();
        if (cur.kind == 'r') {
            for (std::size_t c : row_cells[cur.idx]) {
                if (vis_col[c]) continue;
                vis_col[c] = 1;
                path.push_back({'c', c});
                if (c == ec || dfs()) return true;
                path.pop_back();
            }
        } else {
            for (std::size_t r : col_cells[cur.idx]) {
                if (vis_row[r]) continue;
                vis_row[r] = 1;
                path.push_back({'r', r});
                if (dfs()) return true;
                path.pop_back();
            }
        }
        return false;
    };
    if (!dfs()) throw std::runtime_error("solve_transport: basis lost its spanning tree");

    // path alternates r,c,r,c,...,c; cells along it plus the entering cell
    // close the cycle.
    std::vector<std::pair<std::size_t, std::size_t>> cycle;
    cycle.emplace_back(er, ec);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        if (path[i].kind == 'r')
            cycle.emplace_back(path[i].idx, path[i + 1].idx);
        else
            cycle.emplace_back(path[i + 1].idx, path[i].idx);
    }
    return cycle;
}

}  // namespace

TransportResult solve_transport(const std::vector<double>& supplies,
                                const std::vector<double>& demands,
                                const std::vector<std::vector<double>>& cost) {
    const std::size_t k = supplies.size(), l = demands.size();
    if (cost.size() != k) throw std::invalid_argument("solve_transport: cost matrix rows");
    for (const auto& row : cost)
        if (row.size() != l) throw std::invalid_argument("solve_transport: cost matrix cols");
    double sa = 0, sb = 0;
    for (double x : supplies) {
        if (!(x >= 0.0)) throw std::invalid_argument("solve_transport: negative supply");
        sa += x;
    }
    for (double x : demands) {
        if (!(x >= 0.0)) throw std::invalid_argument("solve_transport: negative demand");
        sb += x;
    }
    double scale = std::max({sa, sb, 1.0});
    if (std::abs(sa - sb) > 1e-9 * scale)
        throw std::invalid_argument("solve_transport: supplies and demands do not balance");
    TransportResult result;
    if (k == 0 || l == 0 || sa == 0.0) return result;

    std::vector<double> b = demands;
    b.back() += sa - sb;  // absorb the (tolerated) residue

    Basis bs = northwest_corner(supplies, b);
    std::vector<double> u, v;
    const double rc_tol = 1e-12 * std::max(1.0, scale);
    const std::size_t max_pivots = 2000 + 40 * k * l * (k + l);
    for (std::size_t iter = 0;; ++iter) {
        if (iter > max_pivots) throw std::runtime_error("solve_transport: pivot budget exceeded");
        compute_duals(bs, cost, u, v);
        // Bland's rule: first cell (lexicographic) with negative reduced cost.
        std::size_t er = k, ec = l;
        for (std::size_t r = 0; r < k && er == k; ++r)
            for (std::size_t c = 0; c < l; ++c) {
                if (bs.basic[r][c]) continue;
                if (cost[r][c] - u[r] - v[c] < -rc_tol) {
                    er = r;
                    ec = c;
                    break;
                }
            }
        if (er == k) break;  // optimal

        auto cycle = find_pivot_cycle(bs, er, ec);
        // Even positions gain flow, odd positions lose it.
        double theta = std::numeric_limits<double>::infinity();
        std::size_t leave = 0;
        for (std::size_t i = 1; i < cycle.size(); i += 2) {
            double f = bs.flow[cycle[i].first][cycle[i].second];
            if (f < theta) {
                theta = f;
                leave = i;
            }
        }
        for (std::size_t i = 0; i < cycle.size(); ++i) {
            auto [r, c] = cycle[i];
            if (i % 2 == 0)
                bs.flow[r][c] += theta;
            else
                bs.flow[r][c] -= theta;
        }
        auto [lr, lc] = cycle[leave];
        bs.flow[lr][lc] = 0.0;
        bs.basic[lr][lc] = 0;
        bs.basic[er][ec] = 1;
        if (!(theta > 0.0)) bs.flow[er][ec] = 0.0;
    }

    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < l; ++c)
            if (bs.basic[r][c] && bs.flow[r][c] > 0.0) {
                result.plan.entries.push_back({r, c, bs.flow[r][c]});
                result.value += cost[r][c] * bs.flow[r][c];
            }
    return result;
}

TransportResult wasserstein1(const DiscreteMeasure& mu_plus, const DiscreteMeasure& mu_minus) {
    if (!mu_plus.empty() && !mu_minus.empty() && mu_plus.dim() != mu_minus.dim())
        throw std::invalid_argument("wasserstein1: dimension mismatch");
    double ma = mu_plus.total_mass(), mb = mu_minus.total_mass();
    if (std::abs(ma - mb) > 1e-9 * std::max({ma, mb, 1.0}))
        throw std::invalid_argument("wasserstein1: total masses differ");

    const auto& A = mu_plus.atoms();
    const auto& B = mu_minus.atoms();
    std::vector<double> supplies(A.size()), demands(B.size());
    for (std::size_t i = 0; i < A.size(); ++i) supplies[i] = A[i].mass;
    for (std::size_t j = 0; j < B.size(); ++j) demands[j] = B[j].mass;
    std::vector<std::vector<double>> cost(A.size(), std::vector<double>(B.size(), 0.0));
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = 0; j < B.size(); ++j) cost[i][j] = distance(A[i].pos, B[j].pos);
    return solve_transport(supplies, demands, cost);
}

}  // namespace ramiflow
