#include "ramiflow/graph_reduce.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace ramiflow {

namespace {

// Out-edge adjacency; edges are already sorted by (tail, head), so the
// per-vertex lists come out sorted by head index.
std::vector<std::vector<std::size_t>> out_adjacency(const FluxGraph& g) {
    std::vector<std::vector<std::size_t>> adj(g.vertices().size());
    for (std::size_t e = 0; e < g.edges().size(); ++e) adj[g.edges()[e].tail].push_back(e);
    return adj;
}

// Strongly connected components (Tarjan, iterative).
std::vector<std::size_t> scc_ids(const FluxGraph& g, std::vector<std::size_t>& comp_size) {
    const std::size_t n = g.vertices().size();
    auto adj = out_adjacency(g);
    std::vector<std::size_t> index(n, SIZE_MAX), low(n, 0), comp(n, SIZE_MAX);
    std::vector<char> on_stack(n, 0);
    std::vector<std::size_t> stack;
    std::size_t next_index = 0, next_comp = 0;

    struct Frame {
        std::size_t v;
        std::size_t edge_pos;
    };
    for (std::size_t start = 0; start < n; ++start) {
        if (index[start] != SIZE_MAX) continue;
        std::vector<Frame> frames{{start, 0}};
        index[start] = low[start] = next_index++;
        stack.push_back(start);
        on_stack[start] = 1;
        while (!frames.empty()) {
            Frame& f = frames.back();
            if (f.edge_pos < adj[f.v].size()) {
                std::size_t w = g.edges()[adj[f.v][f.edge_pos++]].head;
                if (index[w] == SIZE_MAX) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
            } else {
                std::size_t v = f.v;
                frames.pop_back();
                if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
                if (low[v] == index[v]) {
                    std::size_t sz = 0;
                    while (true) {
                        std::size_t w = stack.back();
                        stack.pop_back();
                        on_stack[w] = 0;
                        comp[w] = next_comp;
                        ++sz;
                        if (w == v) break;
                    }
                    comp_size.push_back(sz);
                    ++next_comp;
                }
            }
        }
    }
    return comp;
}

}  // namespace

bool is_acyclic(const FluxGraph& g) {
    std::vector<std::size_t> comp_size;
    auto comp = scc_ids(g, comp_size);
    for (std::size_t c : comp)
        if (comp_size[c] > 1) return false;
    return true;
}

std::optional<Cycle> find_cycle(const FluxGraph& g) {
    std::vector<std::size_t> comp_size;
    auto comp = scc_ids(g, comp_size);
    auto adj = out_adjacency(g);
    const std::size_t n = g.vertices().size();

    for (std::size_t s = 0; s < n; ++s) {
        if (comp_size[comp[s]] < 2) continue;
        // s is the smallest vertex inside a nontrivial SCC: a DFS over simple
        // paths within that SCC, exploring successors in ascending order,
        // reports the lexicographically smallest cycle through s first.
        std::vector<char> on_path(n, 0);
        std::vector<std::size_t> vpath{s}, epath;
        on_path[s] = 1;
        struct Frame {
            std::size_t v;
            std::size_t pos;
        };
        std::vector<Frame> frames{{s, 0}};
        while (!frames.empty()) {
            Frame& f = frames.back();
            bool advanced = false;
            while (f.pos < adj[f.v].size()) {
                std::size_t e = adj[f.v][f.pos++];
                std::size_t w = g.edges()[e].head;
                if (comp[w] != comp[s]) continue;
                if (w == s) {
                    epath.push_back(e);
                    Cycle c;
                    c.vertices = vpath;
                    c.edges = epath;
                    c.weight = std::numeric_limits<double>::infinity();
                    for (std::size_t ce : c.edges) c.weight = std::min(c.weight, g.edges()[ce].weight);
                    for (std::size_t ce : c.edges)
                        if (g.edges()[ce].weight == c.weight) c.min_edges.push_back(ce);
                    return c;
                }
                if (!on_path[w]) {
                    on_path[w] = 1;
                    vpath.push_back(w);
                    epath.push_back(e);
                    frames.push_back({w, 0});
                    advanced = true;
                    break;
                }
            }
            if (!advanced) {
                on_path[f.v] = 0;
                frames.pop_back();
                if (!frames.empty()) {
                    vpath.pop_back();
                    epath.pop_back();
                }
            }
        }
        // A nontrivial SCC always contains a cycle through its smallest vertex.
        throw std::runtime_error("find_cycle: SCC search failed");
    }
    return std::nullopt;
}

FluxGraph reduce_cycle(const FluxGraph& g, const Cycle& cycle) {
    const auto& edges = g.edges();
    if (cycle.edges.empty() || cycle.edges.size() != cycle.vertices.size())
        throw std::invalid_argument("reduce_cycle: malformed cycle");
    for (std::size_t i = 0; i < cycle.edges.size(); ++i) {
        std::size_t e = cycle.edges[i];
        if (e >= edges.size()) throw std::invalid_argument("reduce_cycle: edge out of range");
        std::size_t from = cycle.vertices[i];
        std::size_t to = cycle.vertices[(i + 1) % cycle.vertices.size()];
        if (edges[e].tail != from || edges[e].head != to)
            throw std::invalid_argument("reduce_cycle: edges do not trace the cycle");
    }
    std::vector<char> on_cycle(edges.size(), 0);
    for (std::size_t e : cycle.edges) on_cycle[e] = 1;

    double w0 = cycle.weight;
    std::vector<FluxEdge> reduced;
    reduced.reserve(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        FluxEdge ne = edges[e];
        if (on_cycle[e]) {
            if (ne.weight <= w0) continue;  // the J_C^G edges vanish
            ne.weight -= w0;
        }
        reduced.push_back(ne);
    }
    return FluxGraph(g.dim(), g.vertices(), std::move(reduced));
}

FluxGraph reduce_all_cycles(const FluxGraph& g) {
    FluxGraph cur = g;
    while (auto c = find_cycle(cur)) cur = reduce_cycle(cur, *c);
    return cur;
}

TransportPathMeasure path_decompose(const FluxGraph& g) {
    if (!is_acyclic(g)) throw std::invalid_argument("path_decompose: graph has a cycle");
    const std::size_t n = g.vertices().size();
    std::vector<double> w(g.edges().size());
    for (std::size_t e = 0; e < g.edges().size(); ++e) w[e] = g.edges()[e].weight;
    auto adj = out_adjacency(g);

    TransportPathMeasure tpm;
    const std::size_t peel_budget = 10 * (g.edges().size() + n) + 100;
    for (std::size_t iter = 0;; ++iter) {
        if (iter > peel_budget) throw std::runtime_error("path_decompose: peel budget exceeded");
        // Remaining nets, recomputed from the live weights.
        std::vector<double> net(n, 0.0);
        bool any_edge = false;
        for (std::size_t e = 0; e < g.edges().size(); ++e) {
            if (w[e] <= 0.0) continue;
            any_edge = true;
            net[g.edges()[e].tail] += w[e];
            net[g.edges()[e].head] -= w[e];
        }
        if (!any_edge) break;

        std::size_t start = n;
        for (std::size_t v = 0; v < n && start == n; ++v)
            if (net[v] > 0.0)
                for (std::size_t e : adj[v])
                    if (w[e] > 0.0) {
                        start = v;
                        break;
                    }
        bool capped = true;
        if (start == n) {
            // Numerical residue only: fall back to a topologically first
            // vertex and peel the full bottleneck.
            capped = false;
            std::vector<char> has_in(n, 0);
            for (std::size_t e = 0; e < g.edges().size(); ++e)
                if (w[e] > 0.0) has_in[g.edges()[e].head] = 1;
            for (std::size_t v = 0; v < n && start == n; ++v) {
                if (has_in[v]) continue;
                for (std::size_t e : adj[v])
                    if (w[e] > 0.0) {
                        start = v;
                        break;
                    }
            }
            if (start == n) throw std::runtime_error("path_decompose: no start vertex found");
        }

        // Lexicographically smallest maximal walk: always take the live
        // out-edge with the smallest head.
        std::vector<std::size_t> walk_edges;
        std::vector<std::size_t> walk_vertices{start};
        double bottleneck = std::numeric_limits<double>::infinity();
        std::size_t v = start;
        while (true) {
            std::size_t chosen = SIZE_MAX;
            for (std::size_t e : adj[v])
                if (w[e] > 0.0) {
                    chosen = e;
                    break;
                }
            if (chosen == SIZE_MAX) break;
            walk_edges.push_back(chosen);
            bottleneck = std::min(bottleneck, w[chosen]);
            v = g.edges()[chosen].head;
            walk_vertices.push_back(v);
        }
        double delta = capped ? std::min(bottleneck, net[start]) : bottleneck;
        for (std::size_t e : walk_edges) w[e] -= delta;

        Path p;
        p.weight = delta;
        p.vertices.reserve(walk_vertices.size());
        for (std::size_t u : walk_vertices) p.vertices.push_back(g.vertices()[u]);
        tpm.paths.push_back(std::move(p));
    }
    return tpm;
}

FluxGraph paths_to_graph(int dim, const TransportPathMeasure& tpm) {
    FluxGraph acc(dim);
    for (const Path& p : tpm.paths) {
        std::vector<Vec> verts = p.vertices;
        std::vector<FluxEdge> edges;
        for (std::size_t i = 0; i + 1 < verts.size(); ++i) edges.push_back({i, i + 1, p.weight});
        acc = graph_sum(acc, FluxGraph(dim, std::move(verts), std::move(edges)));
    }
    return acc;
}

FluxGraph prune_long_paths(const FluxGraph& g, const DiscreteMeasure& mu_plus,
                           const DiscreteMeasure& mu_minus, double a) {
    if (!(a > 1.0)) throw std::invalid_argument("prune_long_paths: a must exceed 1");
    std::vector<Vec> support;
    for (const Atom& at : mu_plus.atoms()) support.push_back(at.pos);
    for (const Atom& at : mu_minus.atoms()) support.push_back(at.pos);
    double diam = 0;
    for (std::size_t i = 0; i < support.size(); ++i)
        for (std::size_t j = i + 1; j < support.size(); ++j)
            diam = std::max(diam, distance(support[i], support[j]));
    const double bound = 2.0 * a * diam;

    FluxGraph cur = g;
    for (int round = 0; round < 100; ++round) {
        TransportPathMeasure tpm = path_decompose(cur);
        TransportPathMeasure kept, removed;
        for (Path& p : tpm.paths) {
            if (polyline_length(p.vertices) > bound)
                removed.paths.push_back(std::move(p));
            else
                kept.paths.push_back(std::move(p));
        }
        if (removed.paths.empty()) return cur;

        // Deficits at the removed paths' sources, surpluses at their sinks.
        std::map<Vec, double> deficit, surplus;
        for (const Path& p : removed.paths) {
            deficit[p.vertices.front()] += p.weight;
            surplus[p.vertices.back()] += p.weight;
        }
        // Mass that starts and ends at the same point needs no repair edge.
        for (auto& [pos, d] : deficit) {
            auto it = surplus.find(pos);
            if (it == surplus.end()) continue;
            double cancel = std::min(d, it->second);
            d -= cancel;
            it->second -= cancel;
        }
        std::vector<std::pair<Vec, double>> defs, surs;
        for (auto& [pos, m] : deficit)
            if (m > 0.0) defs.push_back({pos, m});
        for (auto& [pos, m] : surplus)
            if (m > 0.0) surs.push_back({pos, m});

        // Straight repair edges, nearest pairs first (ties by position order).
        std::vector<FluxEdge> repair_edges;
        std::vector<Vec> repair_verts;
        auto vid = [&](const Vec& p) {
            for (std::size_t i = 0; i < repair_verts.size(); ++i)
                if (repair_verts[i] == p) return i;
            repair_verts.push_back(p);
            return repair_verts.size() - 1;
        };
        while (!defs.empty() && !surs.empty()) {
            std::size_t bi = 0, bj = 0;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < defs.size(); ++i)
                for (std::size_t j = 0; j < surs.size(); ++j) {
                    double d = distance(defs[i].first, surs[j].first);
                    if (d < best) {
                        best = d;
                        bi = i;
                        bj = j;
                    }
                }
            double m = std::min(defs[bi].second, surs[bj].second);
            repair_edges.push_back({vid(defs[bi].first), vid(surs[bj].first), m});
            defs[bi].second -= m;
            surs[bj].second -= m;
            if (defs[bi].second <= 0.0) defs.erase(defs.begin() + bi);
            if (surs[bj].second <= 0.0) surs.erase(surs.begin() + bj);
        }

        FluxGraph kept_graph = paths_to_graph(cur.dim(), kept);
        FluxGraph repair(cur.dim(), std::move(repair_verts), std::move(repair_edges));
        cur = graph_sum(kept_graph, repair);
    }
    throw std::runtime_error("prune_long_paths: did not converge");
}

}  // namespace ramiflow
