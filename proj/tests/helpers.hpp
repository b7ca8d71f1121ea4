#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "ramiflow/flux_graph.hpp"
#include "ramiflow/measure.hpp"
#include "ramiflow/pattern.hpp"

namespace testutil {

using namespace ramiflow;

// Dyadic rationals keep regrouped floating sums exact, which the
// mass-conservation tests rely on.
inline double dyadic_mass(std::mt19937_64& rng, int max_ticks = 256, int denom = 128) {
    std::uniform_int_distribution<int> ticks(1, max_ticks);
    return static_cast<double>(ticks(rng)) / denom;
}

inline Vec random_point(std::mt19937_64& rng, int dim, double lo = -2.0, double hi = 2.0) {
    std::uniform_real_distribution<double> coord(lo, hi);
    Vec p(dim);
    for (int k = 0; k < dim; ++k) p[k] = coord(rng);
    return p;
}

inline DiscreteMeasure random_measure(std::mt19937_64& rng, int dim, int max_atoms,
                                      double lo = -2.0, double hi = 2.0) {
    std::uniform_int_distribution<int> count(1, max_atoms);
    int n = count(rng);
    std::vector<Atom> atoms;
    for (int i = 0; i < n; ++i) atoms.push_back({random_point(rng, dim, lo, hi), dyadic_mass(rng)});
    return DiscreteMeasure(dim, std::move(atoms));
}

// A second measure balancing the first one's total mass exactly (dyadic).
inline DiscreteMeasure balancing_measure(std::mt19937_64& rng, const DiscreteMeasure& mu,
                                         int max_atoms, double lo = -2.0, double hi = 2.0) {
    std::uniform_int_distribution<int> count(1, max_atoms);
    int n = count(rng);
    double total = mu.total_mass();
    std::vector<Atom> atoms;
    double left = total;
    for (int i = 0; i < n; ++i) {
        double m;
        if (i + 1 == n) {
            m = left;
        } else {
            std::uniform_int_distribution<int> split(1, 3);
            m = left / (1 << split(rng));  // dyadic fraction of a dyadic value
        }
        if (m <= 0.0) break;
        atoms.push_back({random_point(rng, mu.dim(), lo, hi), m});
        left -= m;
    }
    if (atoms.empty() || left > 0.0) {
        if (atoms.empty())
            atoms.push_back({random_point(rng, mu.dim(), lo, hi), total});
        else
            atoms.back().mass += left;
    }
    return DiscreteMeasure(mu.dim(), std::move(atoms));
}

// Random weighted digraph on a few vertices; weights dyadic in (0, 2].
inline FluxGraph random_graph(std::mt19937_64& rng, int dim, int max_vertices, double edge_prob) {
    std::uniform_int_distribution<int> count(2, max_vertices);
    int n = count(rng);
    std::vector<Vec> verts;
    for (int v = 0; v < n; ++v) verts.push_back(random_point(rng, dim));
    std::vector<FluxEdge> edges;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) {
            if (u == v) continue;
            if (coin(rng) < edge_prob)
                edges.push_back({static_cast<std::size_t>(u), static_cast<std::size_t>(v),
                                 dyadic_mass(rng)});
        }
    return FluxGraph(dim, std::move(verts), std::move(edges));
}

// Random DAG: edges only from lower to higher index.
inline FluxGraph random_dag(std::mt19937_64& rng, int dim, int max_vertices, double edge_prob) {
    std::uniform_int_distribution<int> count(2, max_vertices);
    int n = count(rng);
    std::vector<Vec> verts;
    for (int v = 0; v < n; ++v) verts.push_back(random_point(rng, dim));
    std::vector<FluxEdge> edges;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (coin(rng) < edge_prob)
                edges.push_back({static_cast<std::size_t>(u), static_cast<std::size_t>(v),
                                 dyadic_mass(rng)});
    return FluxGraph(dim, std::move(verts), std::move(edges));
}

// Random loop-free pattern built from monotone polylines on a small grid, so
// overlaps are exact corridor sharing.
inline IrrigationPattern random_pattern(std::mt19937_64& rng, int max_fibres = 4) {
    std::uniform_int_distribution<int> count(1, max_fibres);
    std::uniform_int_distribution<int> grid(0, 3);
    std::uniform_int_distribution<int> steps(1, 4);
    int n = count(rng);
    std::vector<Fibre> fibres;
    for (int f = 0; f < n; ++f) {
        Fibre fb;
        fb.mass = dyadic_mass(rng);
        double x = grid(rng), y = grid(rng);
        fb.polyline.push_back({x, y});
        int m = steps(rng);
        for (int s = 0; s < m; ++s) {
            // Monotone walk: strictly increase one coordinate.
            if (rng() % 2)
                x += 1.0;
            else
                y += 1.0;
            fb.polyline.push_back({x, y});
        }
        fibres.push_back(std::move(fb));
    }
    return IrrigationPattern(2, std::move(fibres));
}

// The equal-cost family instance: two sources at (0,s) and (2,0), two sinks
// at (1,0) and (3,s) with s = sqrt(a^2-1); any routing parameter m in
// [0, m2] gives the same urban planning cost 2*a*m1 + 2*a*eps + 3*a*m2.
struct FamilyInstance {
    Vec A, B, C, D;
    double m1, m2, eps, a, s;

    FamilyInstance(double m1_ = 1.0, double m2_ = 0.1, double eps_ = 0.5, double a_ = 2.0)
        : m1(m1_), m2(m2_), eps(eps_), a(a_), s(std::sqrt(a_ * a_ - 1.0)) {
        A = {0.0, s};
        B = {1.0, 0.0};
        C = {2.0, 0.0};
        D = {3.0, s};
    }

    FluxGraph graph(double m) const {
        std::vector<Vec> verts{A, B, C, D};
        std::vector<FluxEdge> edges{
            {0, 1, m1 + m}, {1, 2, m}, {2, 3, m1 + m}, {0, 3, m2 - m}};
        return FluxGraph(2, std::move(verts), std::move(edges));
    }

    DiscreteMeasure mu_plus() const { return DiscreteMeasure(2, {{A, m1 + m2}, {C, m1}}); }
    DiscreteMeasure mu_minus() const { return DiscreteMeasure(2, {{B, m1}, {D, m1 + m2}}); }

    double family_cost() const { return 2 * a * m1 + 2 * a * eps + 3 * a * m2; }
    // The competing direct routing A->D plus C->B.
    double direct_cost() const { return 3 * (m1 + m2 + eps) + (m1 + eps); }
};

// Exhaustive unit-mass matching oracle for the 1-Wasserstein value.
inline double w1_bruteforce_unit(const std::vector<Vec>& xs, const std::vector<Vec>& ys) {
    std::vector<std::size_t> perm(ys.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    double best = std::numeric_limits<double>::infinity();
    do {
        double c = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) c += distance(xs[i], ys[perm[i]]);
        best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Signed-net comparison of two (mu+, mu-) pairs.
inline bool same_signed_measure(const std::pair<DiscreteMeasure, DiscreteMeasure>& a,
                                const std::pair<DiscreteMeasure, DiscreteMeasure>& b, double tol) {
    std::map<Vec, double> net;
    for (const Atom& at : a.first.atoms()) net[at.pos] += at.mass;
    for (const Atom& at : a.second.atoms()) net[at.pos] -= at.mass;
    for (const Atom& at : b.first.atoms()) net[at.pos] -= at.mass;
    for (const Atom& at : b.second.atoms()) net[at.pos] += at.mass;
    for (const auto& [pos, m] : net)
        if (std::abs(m) > tol) return false;
    return true;
}

}  // namespace testutil
