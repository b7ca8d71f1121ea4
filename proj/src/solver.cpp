#include "ramiflow/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <tuple>

#include "ramiflow/graph_reduce.hpp"

namespace ramiflow {

void SolveConfig::validate() const {
    if (max_steiner < 0) throw std::invalid_argument("SolveConfig: max_steiner must be >= 0");
    if (restarts < 1) throw std::invalid_argument("SolveConfig: restarts must be >= 1");
    if (!(geom_tol > 0.0)) throw std::invalid_argument("SolveConfig: geom_tol must be positive");
    if (max_iters < 1) throw std::invalid_argument("SolveConfig: max_iters must be >= 1");
}

Vec fermat_point(const std::vector<Vec>& anchors, const std::vector<double>& weights, Vec start,
                 double tol) {
    if (anchors.size() != weights.size())
        throw std::invalid_argument("fermat_point: anchors/weights size mismatch");
    Vec z = std::move(start);
    double scale = 1.0;
    for (const Vec& p : anchors) scale = std::max(scale, norm(p));
    for (int iter = 0; iter < 300; ++iter) {
        // Singularity: z sits on an anchor.
        int at = -1;
        for (std::size_t i = 0; i < anchors.size(); ++i)
            if (weights[i] > 0.0 && distance(z, anchors[i]) < 1e-13 * scale) at = static_cast<int>(i);
        if (at >= 0) {
            Vec pull(z.size(), 0.0);
            double inv_sum = 0;
            for (std::size_t j = 0; j < anchors.size(); ++j) {
                if (static_cast<int>(j) == at || weights[j] <= 0.0) continue;
                double dj = distance(z, anchors[j]);
                if (dj == 0.0) continue;
                for (std::size_t k = 0; k < z.size(); ++k)
                    pull[k] += weights[j] * (anchors[j][k] - z[k]) / dj;
                inv_sum += weights[j] / dj;
            }
            double pull_norm = norm(pull);
            if (pull_norm <= weights[at] || inv_sum == 0.0) return z;  // anchor is optimal
            double step = 0.5 * (pull_norm - weights[at]) / inv_sum;   // damped escape
            for (std::size_t k = 0; k < z.size(); ++k) z[k] += step * pull[k] / pull_norm;
            continue;
        }
        Vec num(z.size(), 0.0);
        double den = 0;
        for (std::size_t i = 0; i < anchors.size(); ++i) {
            if (weights[i] <= 0.0) continue;
            double di = distance(z, anchors[i]);
            double wi = weights[i] / di;
            for (std::size_t k = 0; k < z.size(); ++k) num[k] += wi * anchors[i][k];
            den += wi;
        }
        if (den == 0.0) return z;
        Vec znew(z.size());
        for (std::size_t k = 0; k < z.size(); ++k) znew[k] = num[k] / den;
        if (distance(znew, z) < tol) return znew;
        z = std::move(znew);
    }
    return z;
}

namespace {

constexpr double kImproveTol = 1e-11;

struct Terminals {
    std::vector<Vec> source_pos, sink_pos;
    std::vector<double> supply, demand;
};

// Nets out mass shared between the two measures at equal positions; what is
// already in place needs no transport.
Terminals net_terminals(const DiscreteMeasure& mu_plus, const DiscreteMeasure& mu_minus) {
    std::map<Vec, double> net;
    for (const Atom& a : mu_plus.atoms()) net[a.pos] += a.mass;
    for (const Atom& a : mu_minus.atoms()) net[a.pos] -= a.mass;
    Terminals t;
    for (const auto& [pos, m] : net) {
        if (m > 0.0) {
            t.source_pos.push_back(pos);
            t.supply.push_back(m);
        } else if (m < 0.0) {
            t.sink_pos.push_back(pos);
            t.demand.push_back(-m);
        }
    }
    return t;
}

struct GraphState {
    std::vector<Vec> vertices;
    std::vector<FluxEdge> edges;
};

GraphState to_state(const FluxGraph& g) { return {g.vertices(), g.edges()}; }

FluxGraph to_graph(int dim, const GraphState& s) {
    return FluxGraph(dim, s.vertices, s.edges).canonicalized();
}

using MoveKey = std::tuple<int, std::size_t, std::size_t, std::size_t>;

struct Candidate {
    double cost = std::numeric_limits<double>::infinity();
    MoveKey key{99, 0, 0, 0};
    FluxGraph graph;
    bool valid = false;
};

void consider(Candidate& best, double cost, MoveKey key, FluxGraph g) {
    if (!best.valid || cost < best.cost || (cost == best.cost && key < best.key)) {
        best.cost = cost;
        best.key = key;
        best.graph = std::move(g);
        best.valid = true;
    }
}

// Snap a computed branch point onto a nearby existing vertex so coordinates
// stay shared and corridors can merge exactly.
Vec snap_to_vertices(Vec z, const std::vector<Vec>& vertices, double tol) {
    for (const Vec& v : vertices)
        if (distance(z, v) <= tol) return v;
    return z;
}

class LocalOptimizer {
public:
    LocalOptimizer(int dim, const std::set<Vec>& pinned, const CostSpec& spec,
                   const SolveConfig& cfg)
        : dim_(dim), pinned_(pinned), spec_(spec), cfg_(cfg) {}

    // Returns true if the accepted-move budget ran out before convergence.
    bool run(FluxGraph& g, int restart, std::vector<TraceEntry>& trace) {
        double cur_cost = graph_cost(g, spec_);
        trace.push_back({restart, cur_cost});
        for (int accepted = 0; accepted < cfg_.max_iters; ++accepted) {
            Candidate best = scan(g);
            if (!best.valid || best.cost >= cur_cost - kImproveTol) return false;
            g = std::move(best.graph);
            cur_cost = best.cost;
            if (!is_acyclic(g)) {
                g = reduce_all_cycles(g).canonicalized();
                cur_cost = graph_cost(g, spec_);
            }
            trace.push_back({restart, cur_cost});
        }
        return true;
    }

private:
    int dim_;
    const std::set<Vec>& pinned_;
    CostSpec spec_;
    SolveConfig cfg_;

    bool is_free(const Vec& p) const { return !pinned_.count(p); }

    std::size_t free_count(const FluxGraph& g) const {
        std::size_t n = 0;
        for (const Vec& v : g.vertices()) n += is_free(v) ? 1 : 0;
        return n;
    }

    Candidate scan(const FluxGraph& g) {
        Candidate best;
        const auto& edges = g.edges();
        const auto& verts = g.vertices();
        std::vector<std::vector<std::size_t>> out(verts.size()), in(verts.size());
        for (std::size_t e = 0; e < edges.size(); ++e) {
            out[edges[e].tail].push_back(e);
            in[edges[e].head].push_back(e);
        }
        const bool may_insert = free_count(g) < static_cast<std::size_t>(cfg_.max_steiner);

        for (std::size_t v = 0; v < verts.size(); ++v) {
            if (may_insert) {
                for (std::size_t i = 0; i < out[v].size(); ++i)
                    for (std::size_t j = i + 1; j < out[v].size(); ++j)
                        try_fermat(best, g, v, out[v][i], out[v][j], /*outgoing=*/true);
                for (std::size_t i = 0; i < in[v].size(); ++i)
                    for (std::size_t j = i + 1; j < in[v].size(); ++j)
                        try_fermat(best, g, v, in[v][i], in[v][j], /*outgoing=*/false);
            }
            if (is_free(verts[v]) && !(in[v].empty() && out[v].empty()))
                try_reposition(best, g, v, in[v], out[v]);
            for (std::size_t ei : in[v])
                for (std::size_t eo : out[v]) try_shortcut(best, g, v, ei, eo);
        }
        for (std::size_t e = 0; e < edges.size(); ++e)
            for (std::size_t m = 0; m < verts.size(); ++m) {
                if (m == edges[e].tail || m == edges[e].head) continue;
                try_reroute(best, g, e, m);
            }
        return best;
    }

    void try_fermat(Candidate& best, const FluxGraph& g, std::size_t v, std::size_t e1,
                    std::size_t e2, bool outgoing) {
        const auto& edges = g.edges();
        const auto& verts = g.vertices();
        std::size_t x = outgoing ? edges[e1].head : edges[e1].tail;
        std::size_t y = outgoing ? edges[e2].head : edges[e2].tail;
        double w1 = edges[e1].weight, w2 = edges[e2].weight;
        std::vector<Vec> anchors{verts[v], verts[x], verts[y]};
        std::vector<double> lambdas{edge_cost(w1 + w2, spec_), edge_cost(w1, spec_),
                                    edge_cost(w2, spec_)};
        Vec start(dim_, 0.0);
        for (int k = 0; k < dim_; ++k)
            start[k] = (verts[v][k] + verts[x][k] + verts[y][k]) / 3.0;
        Vec z = fermat_point(anchors, lambdas, start, cfg_.geom_tol);
        z = snap_to_vertices(std::move(z), verts, cfg_.geom_tol);
        if (z == verts[v]) return;

        GraphState s = to_state(g);
        std::size_t zi = s.vertices.size();
        s.vertices.push_back(z);
        std::vector<FluxEdge> kept;
        for (std::size_t e = 0; e < s.edges.size(); ++e)
            if (e != e1 && e != e2) kept.push_back(s.edges[e]);
        if (outgoing) {
            kept.push_back({v, zi, w1 + w2});
            kept.push_back({zi, x, w1});
            kept.push_back({zi, y, w2});
        } else {
            kept.push_back({x, zi, w1});
            kept.push_back({y, zi, w2});
            kept.push_back({zi, v, w1 + w2});
        }
        s.edges = std::move(kept);
        FluxGraph cand = to_graph(dim_, s);
        consider(best, graph_cost(cand, spec_), {outgoing ? 0 : 1, v, e1, e2}, std::move(cand));
    }

    void try_reposition(Candidate& best, const FluxGraph& g, std::size_t v,
                        const std::vector<std::size_t>& in, const std::vector<std::size_t>& out) {
        const auto& edges = g.edges();
        const auto& verts = g.vertices();
        std::vector<Vec> anchors;
        std::vector<double> lambdas;
        for (std::size_t e : in) {
            anchors.push_back(verts[edges[e].tail]);
            lambdas.push_back(edge_cost(edges[e].weight, spec_));
        }
        for (std::size_t e : out) {
            anchors.push_back(verts[edges[e].head]);
            lambdas.push_back(edge_cost(edges[e].weight, spec_));
        }
        Vec z = fermat_point(anchors, lambdas, verts[v], cfg_.geom_tol);
        z = snap_to_vertices(std::move(z), verts, cfg_.geom_tol);
        if (z == verts[v]) return;
        GraphState s = to_state(g);
        s.vertices[v] = z;
        FluxGraph cand = to_graph(dim_, s);
        consider(best, graph_cost(cand, spec_), {2, v, 0, 0}, std::move(cand));
    }

    // Peel the through-flow at v straight from u to w (corridor unmerge).
    void try_shortcut(Candidate& best, const FluxGraph& g, std::size_t v, std::size_t ei,
                      std::size_t eo) {
        const auto& edges = g.edges();
        std::size_t u = edges[ei].tail, w = edges[eo].head;
        if (u == w) return;
        double delta = std::min(edges[ei].weight, edges[eo].weight);
        GraphState s = to_state(g);
        s.edges[ei].weight -= delta;
        s.edges[eo].weight -= delta;
        s.edges.push_back({u, w, delta});
        FluxGraph cand = to_graph(dim_, s);
        consider(best, graph_cost(cand, spec_), {3, v, ei, eo}, std::move(cand));
    }

    // Send the whole edge flow through m instead (corridor merge).
    void try_reroute(Candidate& best, const FluxGraph& g, std::size_t e, std::size_t m) {
        const auto& edges = g.edges();
        GraphState s = to_state(g);
        double w = edges[e].weight;
        std::size_t u = edges[e].tail, v = edges[e].head;
        s.edges[e].weight = 0.0;
        s.edges.push_back({u, m, w});
        s.edges.push_back({m, v, w});
        FluxGraph cand = to_graph(dim_, s);
        consider(best, graph_cost(cand, spec_), {4, e, m, 0}, std::move(cand));
    }
};

}  // namespace

SolveResult solve_discrete(const DiscreteMeasure& mu_plus, const DiscreteMeasure& mu_minus,
                           const CostSpec& spec, const SolveConfig& cfg) {
    cfg.validate();
    if (!mu_plus.empty() && !mu_minus.empty() && mu_plus.dim() != mu_minus.dim())
        throw std::invalid_argument("solve_discrete: dimension mismatch");
    double ma = mu_plus.total_mass(), mb = mu_minus.total_mass();
    if (std::abs(ma - mb) > 1e-9 * std::max({ma, mb, 1.0}))
        throw std::invalid_argument("solve_discrete: total masses differ");
    const int dim = mu_plus.empty() ? mu_minus.dim() : mu_plus.dim();

    Terminals t = net_terminals(mu_plus, mu_minus);
    SolveResult result;
    result.graph = FluxGraph(dim);
    if (t.source_pos.empty()) {
        result.trace.push_back({0, 0.0});
        return result;  // mu_plus == mu_minus: the zero flux is optimal
    }

    std::set<Vec> pinned(t.source_pos.begin(), t.source_pos.end());
    pinned.insert(t.sink_pos.begin(), t.sink_pos.end());

    std::vector<std::vector<double>> base_cost(t.source_pos.size(),
                                               std::vector<double>(t.sink_pos.size()));
    for (std::size_t i = 0; i < t.source_pos.size(); ++i)
        for (std::size_t j = 0; j < t.sink_pos.size(); ++j)
            base_cost[i][j] = distance(t.source_pos[i], t.sink_pos[j]);

    bool have_best = false;
    double best_cost = 0;
    for (int r = 0; r < cfg.restarts; ++r) {
        // Restart 0 matches plain 1-Wasserstein; the next two use concave
        // powers of the ground distance (which prefer bundling matchings);
        // later restarts jitter the costs.
        std::vector<std::vector<double>> cost = base_cost;
        if (r == 1 || r == 2) {
            double q = r == 1 ? 0.5 : 0.75;
            for (auto& row : cost)
                for (double& c : row) c = std::pow(c, q);
        } else if (r >= 3) {
            std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(r));
            std::uniform_real_distribution<double> jitter(0.0, 0.5);
            for (auto& row : cost)
                for (double& c : row) c *= 1.0 + jitter(rng);
        }
        TransportResult plan = solve_transport(t.supply, t.demand, cost);

        std::vector<Vec> verts;
        std::vector<FluxEdge> edges;
        std::map<Vec, std::size_t> index;
        auto vid = [&](const Vec& p) {
            auto [it, fresh] = index.emplace(p, verts.size());
            if (fresh) verts.push_back(p);
            return it->second;
        };
        for (const PlanEntry& pe : plan.plan.entries)
            edges.push_back({vid(t.source_pos[pe.source]), vid(t.sink_pos[pe.sink]), pe.mass});
        FluxGraph g = FluxGraph(dim, std::move(verts), std::move(edges)).canonicalized();

        LocalOptimizer opt(dim, pinned, spec, cfg);
        bool exhausted = opt.run(g, r, result.trace);
        g = reduce_all_cycles(g).canonicalized();

        if (spec.is_urban()) {
            FluxGraph pruned = prune_long_paths(g, mu_plus, mu_minus, spec.a).canonicalized();
            if (graph_cost(pruned, spec) < graph_cost(g, spec) - kImproveTol) {
                g = std::move(pruned);
                result.trace.push_back({r, graph_cost(g, spec)});
            }
        }
        double c = graph_cost(g, spec);
        result.budget_exhausted = result.budget_exhausted || exhausted;
        if (!have_best || c < best_cost) {
            have_best = true;
            best_cost = c;
            result.graph = std::move(g);
        }
    }
    result.cost = best_cost;

    if (!check_mass_flux(result.graph, mu_plus, mu_minus, 1e-9))
        throw std::runtime_error("solve_discrete: output violates mass conservation");
    return result;
}

namespace {

// Flows on a tree forced by the terminal nets (leaf elimination). Edge k
// oriented tree_edges[k].first -> .second when the flow is positive.
std::vector<double> tree_flows(const std::vector<std::pair<std::size_t, std::size_t>>& tree_edges,
                               std::vector<double> net) {
    const std::size_t n = net.size();
    std::vector<double> flow(tree_edges.size(), 0.0);
    std::vector<int> degree(n, 0);
    std::vector<std::vector<std::size_t>> incident(n);
    for (std::size_t k = 0; k < tree_edges.size(); ++k) {
        degree[tree_edges[k].first]++;
        degree[tree_edges[k].second]++;
        incident[tree_edges[k].first].push_back(k);
        incident[tree_edges[k].second].push_back(k);
    }
    std::vector<char> removed_edge(tree_edges.size(), 0);
    std::vector<char> removed_vertex(n, 0);
    for (std::size_t round = 0; round + 1 < n; ++round) {
        std::size_t leaf = n;
        for (std::size_t v = 0; v < n && leaf == n; ++v)
            if (!removed_vertex[v] && degree[v] == 1) leaf = v;
        if (leaf == n) break;
        std::size_t edge = SIZE_MAX;
        for (std::size_t k : incident[leaf])
            if (!removed_edge[k]) edge = k;
        auto [p, q] = tree_edges[edge];
        std::size_t other = (p == leaf) ? q : p;
        // Flow out of the leaf equals its net.
        flow[edge] = (p == leaf) ? net[leaf] : -net[leaf];
        net[other] += net[leaf];
        net[leaf] = 0;
        removed_edge[edge] = 1;
        removed_vertex[leaf] = 1;
        degree[leaf]--;
        degree[other]--;
    }
    return flow;
}

}  // namespace

FluxGraph brute_force_tiny(const DiscreteMeasure& mu_plus, const DiscreteMeasure& mu_minus,
                           const CostSpec& spec, int max_steiner, double geom_tol) {
    if (mu_plus.size() > 4 || mu_minus.size() > 4)
        throw std::invalid_argument("brute_force_tiny: instance too large (more than 4 atoms per side)");
    if (max_steiner < 0 || max_steiner > 6)
        throw std::invalid_argument("brute_force_tiny: max_steiner must lie in [0, 6]");
    double ma = mu_plus.total_mass(), mb = mu_minus.total_mass();
    if (std::abs(ma - mb) > 1e-9 * std::max({ma, mb, 1.0}))
        throw std::invalid_argument("brute_force_tiny: total masses differ");
    const int dim = mu_plus.empty() ? mu_minus.dim() : mu_plus.dim();

    Terminals t = net_terminals(mu_plus, mu_minus);
    const std::size_t nt = t.source_pos.size() + t.sink_pos.size();
    if (nt == 0) return FluxGraph(dim);

    std::vector<Vec> term_pos = t.source_pos;
    term_pos.insert(term_pos.end(), t.sink_pos.begin(), t.sink_pos.end());
    std::vector<double> term_net;
    for (double s : t.supply) term_net.push_back(s);
    for (double d : t.demand) term_net.push_back(-d);

    // Deterministic spread for initial free-vertex placement.
    Vec centroid(dim, 0.0);
    double wsum = 0;
    for (std::size_t i = 0; i < nt; ++i) {
        for (int k = 0; k < dim; ++k) centroid[k] += std::abs(term_net[i]) * term_pos[i][k];
        wsum += std::abs(term_net[i]);
    }
    for (int k = 0; k < dim; ++k) centroid[k] /= wsum;
    double spread = 0;
    for (std::size_t i = 0; i < nt; ++i) spread = std::max(spread, distance(centroid, term_pos[i]));
    if (spread == 0.0) spread = 1.0;

    bool have_best = false;
    double best_cost = 0;
    FluxGraph best_graph(dim);

    for (int s = 0; s <= max_steiner; ++s) {
        const std::size_t v_count = nt + static_cast<std::size_t>(s);
        if (v_count < 2) continue;
        if (v_count > 9)
            throw std::invalid_argument("brute_force_tiny: instance too large (tree enumeration)");

        // Prüfer enumeration of labelled trees on v_count vertices.
        const std::size_t seq_len = v_count - 2;
        std::vector<std::size_t> seq(seq_len, 0);
        while (true) {
            // Free vertices of degree < 3 only duplicate smaller topologies.
            bool useful = true;
            for (std::size_t f = nt; f < v_count && useful; ++f) {
                std::size_t occurrences = 0;
                for (std::size_t x : seq) occurrences += (x == f) ? 1 : 0;
                if (occurrences + 1 < 3) useful = false;
            }
            if (useful) {
                // Decode the Prüfer sequence.
                std::vector<std::size_t> deg(v_count, 1);
                for (std::size_t x : seq) deg[x]++;
                std::vector<std::pair<std::size_t, std::size_t>> tree_edges;
                std::set<std::size_t> leaves;
                for (std::size_t v = 0; v < v_count; ++v)
                    if (deg[v] == 1) leaves.insert(v);
                std::vector<std::size_t> work = seq;
                for (std::size_t x : work) {
                    std::size_t leaf = *leaves.begin();
                    leaves.erase(leaves.begin());
                    tree_edges.push_back({leaf, x});
                    if (--deg[x] == 1) leaves.insert(x);
                }
                std::size_t u = *leaves.begin(), w = *std::next(leaves.begin());
                tree_edges.push_back({u, w});

                std::vector<double> net(v_count, 0.0);
                for (std::size_t i = 0; i < nt; ++i) net[i] = term_net[i];
                std::vector<double> flow = tree_flows(tree_edges, net);

                // Positions: terminals fixed, free vertices optimised by
                // round-robin Weiszfeld.
                std::vector<Vec> pos = term_pos;
                for (int f = 0; f < s; ++f) {
                    Vec p = centroid;
                    for (int k = 0; k < dim; ++k)
                        p[k] += spread * 0.05 * (f + 1) / (k + 1.0);
                    pos.push_back(p);
                }
                if (s > 0) {
                    std::vector<std::vector<std::size_t>> incident(v_count);
                    for (std::size_t k = 0; k < tree_edges.size(); ++k) {
                        incident[tree_edges[k].first].push_back(k);
                        incident[tree_edges[k].second].push_back(k);
                    }
                    for (int round = 0; round < 80; ++round) {
                        double moved = 0;
                        for (std::size_t f = nt; f < v_count; ++f) {
                            std::vector<Vec> anchors;
                            std::vector<double> lambdas;
                            for (std::size_t k : incident[f]) {
                                std::size_t other = tree_edges[k].first == f ? tree_edges[k].second
                                                                             : tree_edges[k].first;
                                anchors.push_back(pos[other]);
                                lambdas.push_back(edge_cost(std::abs(flow[k]), spec));
                            }
                            Vec z = fermat_point(anchors, lambdas, pos[f], geom_tol);
                            moved = std::max(moved, distance(z, pos[f]));
                            pos[f] = std::move(z);
                        }
                        if (moved < geom_tol) break;
                    }
                }

                std::vector<FluxEdge> edges;
                for (std::size_t k = 0; k < tree_edges.size(); ++k) {
                    if (flow[k] == 0.0) continue;
                    auto [p, q] = tree_edges[k];
                    if (pos[p] == pos[q]) continue;
                    if (flow[k] > 0.0)
                        edges.push_back({p, q, flow[k]});
                    else
                        edges.push_back({q, p, -flow[k]});
                }
                FluxGraph g = FluxGraph(dim, pos, std::move(edges)).canonicalized();
                double c = graph_cost(g, spec);
                if (!have_best || c < best_cost) {
                    have_best = true;
                    best_cost = c;
                    best_graph = std::move(g);
                }
            }
            // Next sequence.
            std::size_t pos_idx = 0;
            while (pos_idx < seq_len && seq[pos_idx] + 1 == v_count) seq[pos_idx++] = 0;
            if (pos_idx == seq_len) break;
            seq[pos_idx]++;
        }
    }
    if (!have_best) return FluxGraph(dim);
    return best_graph;
}

}  // namespace ramiflow
