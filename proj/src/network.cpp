#include "ramiflow/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

namespace ramiflow {

NetworkSet::NetworkSet(int dim, std::vector<Segment> segments) : dim_(dim) {
    if (dim <= 0 && !segments.empty())
        throw std::invalid_argument("NetworkSet: dimension must be positive");
    for (std::size_t i = 0; i < segments.size(); ++i) {
        Segment& s = segments[i];
        if (static_cast<int>(s.a.size()) != dim || static_cast<int>(s.b.size()) != dim)
            throw std::invalid_argument("NetworkSet: segment " + std::to_string(i) +
                                        " has wrong dimension");
        if (!is_finite(s.a) || !is_finite(s.b))
            throw std::invalid_argument("NetworkSet: segment " + std::to_string(i) +
                                        " has non-finite coordinates");
        if (s.a == s.b)
            throw std::invalid_argument("NetworkSet: segment " + std::to_string(i) +
                                        " is degenerate");
        if (!lex_less(s.a, s.b)) std::swap(s.a, s.b);
    }
    std::sort(segments.begin(), segments.end(), [](const Segment& x, const Segment& y) {
        return std::pair(x.a, x.b) < std::pair(y.a, y.b);
    });
    segments.erase(std::unique(segments.begin(), segments.end(),
                               [](const Segment& x, const Segment& y) {
                                   return x.a == y.a && x.b == y.b;
                               }),
                   segments.end());
    segments_ = std::move(segments);
}

double h1_length(const NetworkSet& sigma) {
    // Group collinear segments and take the interval union along the line.
    const auto& segs = sigma.segments();
    std::vector<char> grouped(segs.size(), 0);
    double total = 0;
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
        if (group.size() == 1) {
            total += distance(segs[i].a, segs[i].b);
            continue;
        }
        Vec dir = sub(segs[i].b, segs[i].a);
        std::size_t axis = 0;
        for (std::size_t k = 1; k < dir.size(); ++k)
            if (std::abs(dir[k]) > std::abs(dir[axis])) axis = k;
        double span = std::abs(dir[axis]) / distance(segs[i].a, segs[i].b);
        std::vector<std::pair<double, double>> intervals;
        for (std::size_t j : group) {
            double ta = segs[j].a[axis], tb = segs[j].b[axis];
            intervals.push_back({std::min(ta, tb), std::max(ta, tb)});
        }
        std::sort(intervals.begin(), intervals.end());
        double covered = 0, lo = intervals[0].first, hi = intervals[0].second;
        for (std::size_t k = 1; k < intervals.size(); ++k) {
            if (intervals[k].first <= hi) {
                hi = std::max(hi, intervals[k].second);
            } else {
                covered += hi - lo;
                lo = intervals[k].first;
                hi = intervals[k].second;
            }
        }
        covered += hi - lo;
        total += covered / span;
    }
    return total;
}

namespace {

struct MetricGraph {
    std::vector<Vec> nodes;
    // On-network chains: consecutive node index pairs along each segment.
    std::vector<std::pair<std::size_t, std::size_t>> rails;
    double a = 1.0;
};

// Nodes: extra points, segment endpoints, and nested samples (power-of-two
// counts) with spacing at most delta.
MetricGraph build_metric_graph(const NetworkSet& sigma, double a, double delta,
                               const std::vector<Vec>& extra) {
    if (!(delta > 0.0)) throw std::invalid_argument("d_sigma: refinement step must be positive");
    if (!(a > 1.0)) throw std::invalid_argument("d_sigma: a must exceed 1");
    MetricGraph mg;
    mg.a = a;
    std::map<Vec, std::size_t> index;
    auto nid = [&](const Vec& p) {
        auto [it, fresh] = index.emplace(p, mg.nodes.size());
        if (fresh) mg.nodes.push_back(p);
        return it->second;
    };
    for (const Vec& p : extra) nid(p);
    for (const Segment& s : sigma.segments()) {
        double len = distance(s.a, s.b);
        std::size_t k = 1;
        while (len / static_cast<double>(k) > delta && k < (1u << 24)) k *= 2;
        std::size_t prev = nid(s.a);
        for (std::size_t i = 1; i <= k; ++i) {
            Vec p = lerp(s.a, s.b, static_cast<double>(i) / static_cast<double>(k));
            std::size_t cur = nid(p);
            mg.rails.push_back({prev, cur});
            prev = cur;
        }
    }
    if (mg.nodes.size() > 400000)
        throw std::runtime_error("d_sigma: refinement produces too many sample nodes");
    return mg;
}

// Dense Dijkstra; the off-network relaxation is against every node.
std::vector<double> dijkstra(const MetricGraph& mg, std::size_t source) {
    const std::size_t n = mg.nodes.size();
    std::vector<std::vector<std::pair<std::size_t, double>>> rail_adj(n);
    for (const auto& [u, v] : mg.rails) {
        double len = distance(mg.nodes[u], mg.nodes[v]);
        rail_adj[u].push_back({v, len});
        rail_adj[v].push_back({u, len});
    }
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<char> settled(n, 0);
    dist[source] = 0.0;
    const std::size_t d = mg.nodes[source].size();
    std::vector<double> flat(n * d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) flat[i * d + j] = mg.nodes[i][j];
    for (std::size_t round = 0; round < n; ++round) {
        std::size_t u = n;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i)
            if (!settled[i] && dist[i] < best) {
                best = dist[i];
                u = i;
            }
        if (u == n) break;
        settled[u] = 1;
        const double du = dist[u];
        const double* pu = &flat[u * d];
        if (d == 2) {
            const double ux = pu[0], uy = pu[1];
            for (std::size_t v = 0; v < n; ++v) {
                double dx = flat[v * 2] - ux, dy = flat[v * 2 + 1] - uy;
                double cand = du + mg.a * std::sqrt(dx * dx + dy * dy);
                if (cand < dist[v]) dist[v] = cand;
            }
        } else {
            for (std::size_t v = 0; v < n; ++v) {
                double s = 0;
                for (std::size_t j = 0; j < d; ++j) {
                    double diff = flat[v * d + j] - pu[j];
                    s += diff * diff;
                }
                double cand = du + mg.a * std::sqrt(s);
                if (cand < dist[v]) dist[v] = cand;
            }
        }
        for (const auto& [v, len] : rail_adj[u]) {
            double cand = du + len;
            if (cand < dist[v]) dist[v] = cand;
        }
    }
    return dist;
}

}  // namespace

double d_sigma(const Vec& x, const Vec& y, const NetworkSet& sigma, double a, double delta) {
    if (x == y) return 0.0;
    MetricGraph mg = build_metric_graph(sigma, a, delta, {x, y});
    std::size_t sx = 0, sy = 0;
    for (std::size_t i = 0; i < mg.nodes.size(); ++i) {
        if (mg.nodes[i] == x) sx = i;
        if (mg.nodes[i] == y) sy = i;
    }
    return dijkstra(mg, sx)[sy];
}

double wasserstein_dsigma(const DiscreteMeasure& mu_plus, const DiscreteMeasure& mu_minus,
                          const NetworkSet& sigma, double a, double delta) {
    double ma = mu_plus.total_mass(), mb = mu_minus.total_mass();
    if (std::abs(ma - mb) > 1e-9 * std::max({ma, mb, 1.0}))
        throw std::invalid_argument("wasserstein_dsigma: total masses differ");
    if (mu_plus.empty()) return 0.0;

    std::vector<Vec> extra;
    for (const Atom& at : mu_plus.atoms()) extra.push_back(at.pos);
    for (const Atom& at : mu_minus.atoms()) extra.push_back(at.pos);
    MetricGraph mg = build_metric_graph(sigma, a, delta, extra);

    std::vector<std::size_t> srcs, snks;
    for (const Atom& at : mu_plus.atoms())
        for (std::size_t i = 0; i < mg.nodes.size(); ++i)
            if (mg.nodes[i] == at.pos) {
                srcs.push_back(i);
                break;
            }
    for (const Atom& at : mu_minus.atoms())
        for (std::size_t i = 0; i < mg.nodes.size(); ++i)
            if (mg.nodes[i] == at.pos) {
                snks.push_back(i);
                break;
            }

    std::vector<std::vector<double>> cost(srcs.size(), std::vector<double>(snks.size(), 0.0));
    for (std::size_t i = 0; i < srcs.size(); ++i) {
        std::vector<double> dist = dijkstra(mg, srcs[i]);
        for (std::size_t j = 0; j < snks.size(); ++j) cost[i][j] = dist[snks[j]];
    }
    std::vector<double> supplies, demands;
    for (const Atom& at : mu_plus.atoms()) supplies.push_back(at.mass);
    for (const Atom& at : mu_minus.atoms()) demands.push_back(at.mass);
    return solve_transport(supplies, demands, cost).value;
}

double cost_sigma(const NetworkSet& sigma, const DiscreteMeasure& mu_plus,
                  const DiscreteMeasure& mu_minus, double eps, double a, double delta) {
    if (!(eps > 0.0)) throw std::invalid_argument("cost_sigma: eps must be positive");
    return wasserstein_dsigma(mu_plus, mu_minus, sigma, a, delta) + eps * h1_length(sigma);
}

NetworkSet extract_sigma(const IrrigationPattern& chi, double eps, double a) {
    if (!(eps > 0.0)) throw std::invalid_argument("extract_sigma: eps must be positive");
    if (!(a > 1.0)) throw std::invalid_argument("extract_sigma: a must exceed 1");
    const double threshold = eps / (a - 1.0);
    std::vector<Segment> segs;
    for (const auto& [key, mass] : chi.segment_masses())
        if (mass > threshold) segs.push_back({key.first, key.second});
    return NetworkSet(chi.dim(), std::move(segs));
}

}  // namespace ramiflow
