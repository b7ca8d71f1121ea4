#include "ramiflow/flux_graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace ramiflow {

namespace {

struct Seg {
    Vec a, b;
    double w;  // signed along a->b after orientation bookkeeping
};

// Splits collinear overlapping segments at all endpoints and nets out the
// signed weights per elementary piece. Segments meeting transversally are
// left alone. Only exact collinearity merges; this mirrors addition of the
// underlying vector measures.
std::vector<Seg> arrange_and_net(std::vector<Seg> segs) {
    std::vector<std::vector<std::size_t>> groups;
    std::vector<char> grouped(segs.size(), 0);
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (grouped[i]) continue;
        std::vector<std::size_t> group{i};
        grouped[i] = 1;
        for (std::size_t j = i + 1; j < segs.size(); ++j) {
            if (grouped[j]) continue;
            if (collinear(segs[i].a, segs[i].b, segs[j].a) &&
                collinear(segs[i].a, segs[i].b, segs[j].b)) {
                group.push_back(j);
                grouped[j] = 1;
            }
        }
        groups.push_back(std::move(group));
    }

    std::vector<Seg> out;
    for (const auto& group : groups) {
        if (group.size() == 1) {
            out.push_back(segs[group[0]]);
            continue;
        }
        const Seg& rep = segs[group[0]];
        Vec dir = sub(rep.b, rep.a);
        std::size_t axis = 0;
        for (std::size_t i = 1; i < dir.size(); ++i)
            if (std::abs(dir[i]) > std::abs(dir[axis])) axis = i;

        // Breakpoints keyed by the dominant coordinate; on a common line the
        // coordinate determines the point.
        std::map<double, Vec> pts;
        struct Span {
            double lo, hi;
            double w;  // signed in +axis direction
        };
        std::vector<Span> spans;
        for (std::size_t idx : group) {
            const Seg& s = segs[idx];
            double ta = s.a[axis], tb = s.b[axis];
            if (ta == tb) {
                // Cannot happen for nondegenerate segments exactly collinear
                // with the representative; keep the segment untouched.
                out.push_back(s);
                continue;
            }
            pts.emplace(ta, s.a);
            pts.emplace(tb, s.b);
            spans.push_back({std::min(ta, tb), std::max(ta, tb), tb > ta ? s.w : -s.w});
        }
        std::vector<std::pair<double, Vec>> bp(pts.begin(), pts.end());
        for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
            double lo = bp[i].first, hi = bp[i + 1].first;
            double net = 0;
            for (const Span& sp : spans)
                if (sp.lo <= lo && hi <= sp.hi) net += sp.w;
            if (net != 0.0) out.push_back({bp[i].second, bp[i + 1].second, net});
        }
    }
    return out;
}

FluxGraph graph_from_segments(int dim, const std::vector<Seg>& segs) {
    std::map<Vec, std::size_t> index;
    std::vector<Vec> verts;
    std::vector<FluxEdge> edges;
    auto vid = [&](const Vec& p) {
        auto [it, fresh] = index.emplace(p, verts.size());
        if (fresh) verts.push_back(p);
        return it->second;
    };
    for (const Seg& s : segs) {
        if (s.w == 0.0) continue;
        std::size_t t = vid(s.a), h = vid(s.b);
        if (s.w > 0.0)
            edges.push_back({t, h, s.w});
        else
            edges.push_back({h, t, -s.w});
    }
    return FluxGraph(dim, std::move(verts), std::move(edges));
}

}  // namespace

FluxGraph::FluxGraph(int dim, std::vector<Vec> vertices, std::vector<FluxEdge> edges)
    : dim_(dim) {
    if (dim <= 0 && !(vertices.empty() && edges.empty()))
        throw std::invalid_argument("FluxGraph: dimension must be positive");
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        if (static_cast<int>(vertices[i].size()) != dim)
            throw std::invalid_argument("FluxGraph: vertex " + std::to_string(i) +
                                        " has wrong dimension");
        if (!is_finite(vertices[i]))
            throw std::invalid_argument("FluxGraph: vertex " + std::to_string(i) +
                                        " has non-finite coordinates");
    }
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const FluxEdge& e = edges[i];
        if (e.tail >= vertices.size() || e.head >= vertices.size())
            throw std::invalid_argument("FluxGraph: edge " + std::to_string(i) +
                                        " references a missing vertex");
        if (!(e.weight >= 0.0) || !std::isfinite(e.weight))
            throw std::invalid_argument("FluxGraph: edge " + std::to_string(i) +
                                        " must have non-negative finite weight");
    }

    // Deduplicate vertices bitwise, then net weights per unordered vertex
    // pair so antiparallel flow cancels.
    std::map<Vec, std::size_t> dedup;
    std::vector<std::size_t> remap(vertices.size());
    std::vector<Vec> uniq;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        auto [it, fresh] = dedup.emplace(vertices[i], uniq.size());
        if (fresh) uniq.push_back(vertices[i]);
        remap[i] = it->second;
    }
    std::map<std::pair<std::size_t, std::size_t>, double> net;
    for (const FluxEdge& e : edges) {
        std::size_t t = remap[e.tail], h = remap[e.head];
        if (t == h) continue;  // degenerate: zero-length measure
        if (e.weight == 0.0) continue;
        if (t < h)
            net[{t, h}] += e.weight;
        else
            net[{h, t}] -= e.weight;
    }

    // Keep only vertices referenced by surviving edges, sorted lexicographically.
    std::vector<char> used(uniq.size(), 0);
    for (const auto& [key, w] : net)
        if (w != 0.0) used[key.first] = used[key.second] = 1;
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < uniq.size(); ++i)
        if (used[i]) order.push_back(i);
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return lex_less(uniq[x], uniq[y]); });
    std::vector<std::size_t> final_id(uniq.size(), 0);
    for (std::size_t i = 0; i < order.size(); ++i) {
        final_id[order[i]] = i;
        vertices_.push_back(uniq[order[i]]);
    }
    for (const auto& [key, w] : net) {
        if (w == 0.0) continue;
        std::size_t lo = final_id[key.first], hi = final_id[key.second];
        if (w > 0.0)
            edges_.push_back({lo, hi, w});
        else
            edges_.push_back({hi, lo, -w});
    }
    std::sort(edges_.begin(), edges_.end(), [](const FluxEdge& x, const FluxEdge& y) {
        return std::pair(x.tail, x.head) < std::pair(y.tail, y.head);
    });
}

std::optional<std::size_t> FluxGraph::find_vertex(const Vec& pos) const {
    auto it = std::lower_bound(vertices_.begin(), vertices_.end(), pos,
                               [](const Vec& a, const Vec& b) { return lex_less(a, b); });
    if (it != vertices_.end() && *it == pos)
        return static_cast<std::size_t>(it - vertices_.begin());
    return std::nullopt;
}

FluxGraph FluxGraph::reversed() const {
    std::vector<FluxEdge> rev = edges_;
    for (FluxEdge& e : rev) std::swap(e.tail, e.head);
    return FluxGraph(dim_, vertices_, std::move(rev));
}

FluxGraph FluxGraph::canonicalized() const {
    std::vector<Seg> segs;
    segs.reserve(edges_.size());
    for (const FluxEdge& e : edges_)
        segs.push_back({vertices_[e.tail], vertices_[e.head], e.weight});
    return graph_from_segments(dim_, arrange_and_net(std::move(segs)));
}

bool FluxGraph::operator==(const FluxGraph& other) const {
    if (vertices_.size() != other.vertices_.size() || edges_.size() != other.edges_.size())
        return false;
    for (std::size_t i = 0; i < vertices_.size(); ++i)
        if (vertices_[i] != other.vertices_[i]) return false;
    for (std::size_t i = 0; i < edges_.size(); ++i)
        if (edges_[i].tail != other.edges_[i].tail || edges_[i].head != other.edges_[i].head ||
            edges_[i].weight != other.edges_[i].weight)
            return false;
    return true;
}

std::pair<DiscreteMeasure, DiscreteMeasure> divergence(const FluxGraph& g) {
    std::vector<double> net(g.vertices().size(), 0.0);
    for (const FluxEdge& e : g.edges()) {
        net[e.tail] += e.weight;
        net[e.head] -= e.weight;
    }
    std::vector<Atom> plus, minus;
    for (std::size_t v = 0; v < net.size(); ++v) {
        if (net[v] > 0.0) plus.push_back({g.vertices()[v], net[v]});
        if (net[v] < 0.0) minus.push_back({g.vertices()[v], -net[v]});
    }
    int d = g.dim();
    return {DiscreteMeasure(d, std::move(plus)), DiscreteMeasure(d, std::move(minus))};
}

bool check_mass_flux(const FluxGraph& g, const DiscreteMeasure& mu_plus,
                     const DiscreteMeasure& mu_minus, double tol) {
    std::map<Vec, double> target;
    for (const Atom& a : mu_plus.atoms()) target[a.pos] += a.mass;
    for (const Atom& a : mu_minus.atoms()) target[a.pos] -= a.mass;
    auto [dp, dm] = divergence(g);
    std::map<Vec, double> actual;
    for (const Atom& a : dp.atoms()) actual[a.pos] += a.mass;
    for (const Atom& a : dm.atoms()) actual[a.pos] -= a.mass;
    for (const auto& [pos, m] : target)
        if (std::abs(m - (actual.count(pos) ? actual[pos] : 0.0)) > tol) return false;
    for (const auto& [pos, m] : actual)
        if (!target.count(pos) && std::abs(m) > tol) return false;
    return true;
}

double graph_cost(const FluxGraph& g, const CostSpec& spec) {
    double total = 0;
    for (std::size_t e = 0; e < g.edges().size(); ++e)
        total += edge_cost(g.edges()[e].weight, spec) * g.edge_length(e);
    return total;
}

double total_variation(const FluxGraph& g) {
    double total = 0;
    for (std::size_t e = 0; e < g.edges().size(); ++e)
        total += g.edges()[e].weight * g.edge_length(e);
    return total;
}

FluxGraph graph_sum(const FluxGraph& g1, const FluxGraph& g2) {
    if (!g1.edges().empty() && !g2.edges().empty() && g1.dim() != g2.dim())
        throw std::invalid_argument("graph_sum: dimension mismatch");
    int dim = g1.edges().empty() ? g2.dim() : g1.dim();
    std::vector<Seg> segs;
    segs.reserve(g1.edges().size() + g2.edges().size());
    for (const FluxEdge& e : g1.edges())
        segs.push_back({g1.vertices()[e.tail], g1.vertices()[e.head], e.weight});
    for (const FluxEdge& e : g2.edges())
        segs.push_back({g2.vertices()[e.tail], g2.vertices()[e.head], e.weight});
    return graph_from_segments(dim, arrange_and_net(std::move(segs)));
}

double tv_distance(const FluxGraph& g1, const FluxGraph& g2) {
    return total_variation(graph_sum(g1, g2.reversed()));
}

std::vector<std::size_t> extract_network_subgraph(const FluxGraph& g, double eps, double a) {
    if (!(eps > 0.0)) throw std::invalid_argument("extract_network_subgraph: eps must be positive");
    if (!(a > 1.0)) throw std::invalid_argument("extract_network_subgraph: a must exceed 1");
    std::vector<std::size_t> result;
    for (std::size_t e = 0; e < g.edges().size(); ++e)
        if (a * g.edges()[e].weight > g.edges()[e].weight + eps) result.push_back(e);
    return result;
}

}  // namespace ramiflow
