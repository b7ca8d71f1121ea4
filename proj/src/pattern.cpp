#include "ramiflow/pattern.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace ramiflow {

namespace {

// Union-find for the vertex snapping pass.
struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        for (std::size_t i = 0; i < n; ++i) parent[i] = i;
    }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

IrrigationPattern::IrrigationPattern(int dim, std::vector<Fibre> fibres) : dim_(dim) {
    if (dim <= 0 && !fibres.empty())
        throw std::invalid_argument("IrrigationPattern: dimension must be positive");
    for (std::size_t f = 0; f < fibres.size(); ++f) {
        const Fibre& fb = fibres[f];
        if (!(fb.mass > 0.0) || !std::isfinite(fb.mass))
            throw std::invalid_argument("IrrigationPattern: fibre " + std::to_string(f) +
                                        " must have positive finite mass");
        if (fb.polyline.empty())
            throw std::invalid_argument("IrrigationPattern: fibre " + std::to_string(f) +
                                        " has an empty polyline");
        for (const Vec& p : fb.polyline) {
            if (static_cast<int>(p.size()) != dim)
                throw std::invalid_argument("IrrigationPattern: fibre " + std::to_string(f) +
                                            " has a point of wrong dimension");
            if (!is_finite(p))
                throw std::invalid_argument("IrrigationPattern: fibre " + std::to_string(f) +
                                            " has a non-finite point");
        }
    }

    // 1) Snap near-coincident vertices onto the lexicographically smallest
    //    representative of their cluster.
    std::vector<Vec> points;
    for (const Fibre& fb : fibres)
        for (const Vec& p : fb.polyline) points.push_back(p);
    std::sort(points.begin(), points.end(), lex_less);
    points.erase(std::unique(points.begin(), points.end()), points.end());
    UnionFind uf(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            if (distance(points[i], points[j]) <= kPatternSnapTol) uf.unite(i, j);
    std::vector<Vec> rep(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::size_t r = uf.find(i);
        if (rep[r].empty() || lex_less(points[i], rep[r])) rep[r] = points[i];
    }
    auto snap = [&](const Vec& p) {
        auto it = std::lower_bound(points.begin(), points.end(), p, lex_less);
        return rep[uf.find(static_cast<std::size_t>(it - points.begin()))];
    };
    std::vector<Vec> canon_vertices;
    for (std::size_t i = 0; i < points.size(); ++i)
        if (uf.find(i) == i) canon_vertices.push_back(rep[i]);
    std::sort(canon_vertices.begin(), canon_vertices.end(), lex_less);
    canon_vertices.erase(std::unique(canon_vertices.begin(), canon_vertices.end()),
                         canon_vertices.end());

    // 2) Remap polylines, drop consecutive duplicates.
    fibres_.reserve(fibres.size());
    for (Fibre& fb : fibres) {
        Fibre nf;
        nf.mass = fb.mass;
        for (const Vec& p : fb.polyline) {
            Vec q = snap(p);
            if (nf.polyline.empty() || nf.polyline.back() != q) nf.polyline.push_back(std::move(q));
        }
        fibres_.push_back(std::move(nf));
    }

    // 3) Split every segment at canonical vertices lying on its interior.
    for (Fibre& fb : fibres_) {
        if (fb.polyline.size() < 2) continue;
        std::vector<Vec> refined;
        for (std::size_t i = 0; i + 1 < fb.polyline.size(); ++i) {
            const Vec& a = fb.polyline[i];
            const Vec& b = fb.polyline[i + 1];
            refined.push_back(a);
            std::vector<std::pair<double, const Vec*>> inner;
            for (const Vec& v : canon_vertices) {
                if (v == a || v == b) continue;
                auto [t, d] = point_segment_closest(v, a, b);
                if (d <= kPatternSnapTol && t > 0.0 && t < 1.0) inner.push_back({t, &v});
            }
            std::sort(inner.begin(), inner.end(),
                      [](const auto& x, const auto& y) { return x.first < y.first; });
            for (const auto& [t, v] : inner)
                if (refined.back() != *v) refined.push_back(*v);
        }
        if (refined.back() != fb.polyline.back()) refined.push_back(fb.polyline.back());
        fb.polyline = std::move(refined);
    }

    // 4) Solidarity mass per segment key (set semantics per fibre) and the
    //    opposite-direction overlap flag.
    std::map<SegmentKey, int> direction_seen;  // bit 1: key order, bit 2: reversed
    for (const Fibre& fb : fibres_) {
        std::set<SegmentKey> seen;
        for (std::size_t i = 0; i + 1 < fb.polyline.size(); ++i) {
            SegmentKey key = key_of(fb.polyline[i], fb.polyline[i + 1]);
            if (seen.insert(key).second) segment_masses_[key] += fb.mass;
            direction_seen[key] |= (fb.polyline[i] == key.first) ? 1 : 2;
        }
    }
    for (const auto& [key, bits] : direction_seen)
        if (bits == 3) has_opposite_overlap_ = true;
}

double IrrigationPattern::total_mass() const {
    double s = 0;
    for (const Fibre& f : fibres_) s += f.mass;
    return s;
}

std::pair<DiscreteMeasure, DiscreteMeasure> irrigating_measures(const IrrigationPattern& chi) {
    std::vector<Atom> plus, minus;
    for (const Fibre& f : chi.fibres()) {
        plus.push_back({f.polyline.front(), f.mass});
        minus.push_back({f.polyline.back(), f.mass});
    }
    return {DiscreteMeasure(chi.dim(), std::move(plus)),
            DiscreteMeasure(chi.dim(), std::move(minus))};
}

double solidarity_mass(const IrrigationPattern& chi, const Vec& x) {
    double m = 0;
    for (const Fibre& f : chi.fibres()) {
        bool contains = false;
        if (f.polyline.size() == 1) {
            contains = distance(f.polyline[0], x) <= kPatternSnapTol;
        } else {
            for (std::size_t i = 0; i + 1 < f.polyline.size() && !contains; ++i)
                contains =
                    point_segment_closest(x, f.polyline[i], f.polyline[i + 1]).dist <= kPatternSnapTol;
        }
        if (contains) m += f.mass;
    }
    return m;
}

double pattern_cost(const IrrigationPattern& chi, const CostSpec& spec) {
    double total = 0;
    const auto& masses = chi.segment_masses();
    for (const Fibre& f : chi.fibres()) {
        for (std::size_t i = 0; i + 1 < f.polyline.size(); ++i) {
            auto it = masses.find(IrrigationPattern::key_of(f.polyline[i], f.polyline[i + 1]));
            if (it == masses.end())
                throw std::logic_error("pattern_cost: segment missing from the arrangement");
            double m = it->second;
            double len = distance(f.polyline[i], f.polyline[i + 1]);
            total += f.mass * (edge_cost(m, spec) / m) * len;
        }
    }
    return total;
}

IrrigationPattern reparameterise_constant_speed(const IrrigationPattern& chi) {
    // The stored polylines already are the constant-speed representatives;
    // re-running construction normalises away duplicate vertices.
    return IrrigationPattern(chi.dim(), chi.fibres());
}

bool is_loop_free(const IrrigationPattern& chi) {
    for (const Fibre& f : chi.fibres()) {
        const auto& pl = f.polyline;
        if (pl.size() < 3) continue;
        for (std::size_t i = 0; i + 1 < pl.size(); ++i) {
            // Consecutive segments: a collinear reversal re-enters the
            // previous segment.
            if (i + 2 < pl.size()) {
                Vec d1 = sub(pl[i + 1], pl[i]);
                Vec d2 = sub(pl[i + 2], pl[i + 1]);
                if (collinear(pl[i], pl[i + 1], pl[i + 2]) && dot(d1, d2) < 0.0) return false;
            }
            // Non-adjacent segments may not intersect at all.
            for (std::size_t j = i + 2; j + 1 < pl.size(); ++j) {
                auto r = segment_segment_closest(pl[i], pl[i + 1], pl[j], pl[j + 1]);
                if (r.dist <= kPatternSnapTol) {
                    // The shared vertex between segments i and i+1 == j-1 is
                    // already covered; any contact here is a revisit.
                    return false;
                }
            }
        }
    }
    return true;
}

namespace {

// Arclength positions (first visit) of x along the fibre, or -1.
double arclength_of(const Fibre& f, const Vec& x) {
    double acc = 0;
    if (f.polyline.size() == 1) return distance(f.polyline[0], x) <= kPatternSnapTol ? 0.0 : -1.0;
    for (std::size_t i = 0; i + 1 < f.polyline.size(); ++i) {
        auto [t, d] = point_segment_closest(x, f.polyline[i], f.polyline[i + 1]);
        double seg_len = distance(f.polyline[i], f.polyline[i + 1]);
        if (d <= kPatternSnapTol) return acc + t * seg_len;
        acc += seg_len;
    }
    return -1.0;
}

// Sub-polyline between two arclength positions, with exact cut points.
std::vector<Vec> sub_polyline(const Fibre& f, double s0, const Vec& p0, double s1, const Vec& p1) {
    std::vector<Vec> out{p0};
    double acc = 0;
    for (std::size_t i = 0; i + 1 < f.polyline.size(); ++i) {
        double seg_len = distance(f.polyline[i], f.polyline[i + 1]);
        double lo = acc, hi = acc + seg_len;
        acc = hi;
        if (hi <= s0 || lo >= s1) continue;
        const Vec& v = f.polyline[i + 1];
        if (hi < s1) {
            if (out.back() != v) out.push_back(v);
        }
    }
    if (out.back() != p1) out.push_back(p1);
    return out;
}

// All points shared by two fibres: common canonical vertices plus transversal
// crossing points.
std::vector<Vec> shared_points(const Fibre& f, const Fibre& g) {
    std::vector<Vec> pts;
    for (const Vec& p : f.polyline)
        if (arclength_of(g, p) >= 0.0) pts.push_back(p);
    for (const Vec& p : g.polyline)
        if (arclength_of(f, p) >= 0.0) pts.push_back(p);
    for (std::size_t i = 0; i + 1 < f.polyline.size(); ++i)
        for (std::size_t j = 0; j + 1 < g.polyline.size(); ++j) {
            auto r = segment_segment_closest(f.polyline[i], f.polyline[i + 1], g.polyline[j],
                                             g.polyline[j + 1]);
            if (r.dist <= kPatternSnapTol) {
                Vec p = lerp(f.polyline[i], f.polyline[i + 1], r.s);
                pts.push_back(p);
            }
        }
    std::sort(pts.begin(), pts.end(), lex_less);
    // Collapse points within the snapping tolerance.
    std::vector<Vec> uniq;
    for (const Vec& p : pts) {
        bool dup = false;
        for (const Vec& q : uniq)
            if (distance(p, q) <= 10 * kPatternSnapTol) dup = true;
        if (!dup) uniq.push_back(p);
    }
    return uniq;
}

bool same_point_set(std::vector<Vec> a, std::vector<Vec> b) {
    auto normalise = [](std::vector<Vec>& pl) {
        std::vector<std::pair<Vec, Vec>> segs;
        for (std::size_t i = 0; i + 1 < pl.size(); ++i) {
            if (pl[i] == pl[i + 1]) continue;
            segs.push_back(lex_less(pl[i], pl[i + 1]) ? std::pair(pl[i], pl[i + 1])
                                                      : std::pair(pl[i + 1], pl[i]));
        }
        std::sort(segs.begin(), segs.end());
        return segs;
    };
    return normalise(a) == normalise(b);
}

}  // namespace

bool check_single_path(const IrrigationPattern& chi) {
    if (!is_loop_free(chi)) throw std::invalid_argument("check_single_path: pattern has loops");
    const auto& fibres = chi.fibres();
    for (std::size_t i = 0; i < fibres.size(); ++i) {
        for (std::size_t j = i + 1; j < fibres.size(); ++j) {
            std::vector<Vec> shared = shared_points(fibres[i], fibres[j]);
            if (shared.size() < 2) continue;
            struct Mark {
                Vec p;
                double si, sj;
            };
            std::vector<Mark> marks;
            for (const Vec& p : shared)
                marks.push_back({p, arclength_of(fibres[i], p), arclength_of(fibres[j], p)});
            for (std::size_t x = 0; x < marks.size(); ++x)
                for (std::size_t y = 0; y < marks.size(); ++y) {
                    if (x == y) continue;
                    // Ordered pair visited in the same order by both fibres.
                    if (marks[x].si < marks[y].si && marks[x].sj < marks[y].sj) {
                        auto sub_i = sub_polyline(fibres[i], marks[x].si, marks[x].p, marks[y].si,
                                                  marks[y].p);
                        auto sub_j = sub_polyline(fibres[j], marks[x].sj, marks[x].p, marks[y].sj,
                                                  marks[y].p);
                        if (!same_point_set(sub_i, sub_j)) return false;
                    }
                }
        }
    }
    return true;
}

}  // namespace ramiflow
