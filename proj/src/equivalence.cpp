#include "ramiflow/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace ramiflow {

IrrigationPattern flux_to_pattern(const FluxGraph& g) {
    FluxGraph reduced = reduce_all_cycles(g);
    TransportPathMeasure tpm = path_decompose(reduced);
    std::vector<Fibre> fibres;
    fibres.reserve(tpm.paths.size());
    for (Path& p : tpm.paths) fibres.push_back({std::move(p.vertices), p.weight});
    return IrrigationPattern(g.dim(), std::move(fibres));
}

FluxGraph pattern_to_flux(const IrrigationPattern& chi) {
    // Signed mass per canonical segment; a fibre contributes once per
    // traversal, with its direction.
    std::map<IrrigationPattern::SegmentKey, double> net;
    for (const Fibre& f : chi.fibres()) {
        for (std::size_t i = 0; i + 1 < f.polyline.size(); ++i) {
            auto key = IrrigationPattern::key_of(f.polyline[i], f.polyline[i + 1]);
            net[key] += (f.polyline[i] == key.first) ? f.mass : -f.mass;
        }
    }
    std::vector<Vec> verts;
    std::vector<FluxEdge> edges;
    std::map<Vec, std::size_t> index;
    auto vid = [&](const Vec& p) {
        auto [it, fresh] = index.emplace(p, verts.size());
        if (fresh) verts.push_back(p);
        return it->second;
    };
    for (const auto& [key, w] : net) {
        if (w == 0.0) continue;
        std::size_t lo = vid(key.first), hi = vid(key.second);
        if (w > 0.0)
            edges.push_back({lo, hi, w});
        else
            edges.push_back({hi, lo, -w});
    }
    return FluxGraph(chi.dim(), std::move(verts), std::move(edges));
}

namespace {

double fibre_arclength_of(const Fibre& f, const Vec& x) {
    double acc = 0;
    if (f.polyline.size() == 1)
        return distance(f.polyline[0], x) <= kPatternSnapTol ? 0.0 : -1.0;
    for (std::size_t i = 0; i + 1 < f.polyline.size(); ++i) {
        auto [t, d] = point_segment_closest(x, f.polyline[i], f.polyline[i + 1]);
        double seg_len = distance(f.polyline[i], f.polyline[i + 1]);
        if (d <= kPatternSnapTol) return acc + t * seg_len;
        acc += seg_len;
    }
    return -1.0;
}

// Vertex index ranges of f covering arclengths (s0, s1), cut points included
// as explicit coordinates.
std::vector<Vec> fibre_section(const Fibre& f, double s0, const Vec& p0, double s1,
                               const Vec& p1) {
    std::vector<Vec> out{p0};
    double acc = 0;
    for (std::size_t i = 0; i + 1 < f.polyline.size(); ++i) {
        double seg_len = distance(f.polyline[i], f.polyline[i + 1]);
        double lo = acc, hi = acc + seg_len;
        acc = hi;
        if (hi <= s0 || lo >= s1) continue;
        if (hi < s1 && out.back() != f.polyline[i + 1]) out.push_back(f.polyline[i + 1]);
    }
    if (out.back() != p1) out.push_back(p1);
    return out;
}

// First violating ordered pair between fibres i (kept) and j (rerouted), if
// any: both visit x before y but along different sub-paths.
struct Violation {
    Vec x, y;
    double xi, yi, xj, yj;
};

std::vector<Vec> fibre_shared_points(const Fibre& f, const Fibre& g) {
    std::vector<Vec> pts;
    for (const Vec& p : f.polyline)
        if (fibre_arclength_of(g, p) >= 0.0) pts.push_back(p);
    for (const Vec& p : g.polyline)
        if (fibre_arclength_of(f, p) >= 0.0) pts.push_back(p);
    for (std::size_t i = 0; i + 1 < f.polyline.size(); ++i)
        for (std::size_t j = 0; j + 1 < g.polyline.size(); ++j) {
            auto r = segment_segment_closest(f.polyline[i], f.polyline[i + 1], g.polyline[j],
                                             g.polyline[j + 1]);
            if (r.dist <= kPatternSnapTol)
                pts.push_back(lerp(f.polyline[i], f.polyline[i + 1], r.s));
        }
    std::sort(pts.begin(), pts.end(), lex_less);
    std::vector<Vec> uniq;
    for (const Vec& p : pts) {
        bool dup = false;
        for (const Vec& q : uniq)
            if (distance(p, q) <= 10 * kPatternSnapTol) dup = true;
        if (!dup) uniq.push_back(p);
    }
    return uniq;
}

bool same_section(std::vector<Vec> a, std::vector<Vec> b) {
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

std::optional<Violation> find_violation(const Fibre& fi, const Fibre& fj) {
    std::vector<Vec> shared = fibre_shared_points(fi, fj);
    if (shared.size() < 2) return std::nullopt;
    struct Mark {
        Vec p;
        double si, sj;
    };
    std::vector<Mark> marks;
    for (const Vec& p : shared)
        marks.push_back({p, fibre_arclength_of(fi, p), fibre_arclength_of(fj, p)});
    for (std::size_t x = 0; x < marks.size(); ++x)
        for (std::size_t y = 0; y < marks.size(); ++y) {
            if (x == y) continue;
            if (marks[x].si < marks[y].si && marks[x].sj < marks[y].sj) {
                auto si = fibre_section(fi, marks[x].si, marks[x].p, marks[y].si, marks[y].p);
                auto sj = fibre_section(fj, marks[x].sj, marks[x].p, marks[y].sj, marks[y].p);
                if (!same_section(si, sj))
                    return Violation{marks[x].p, marks[y].p, marks[x].si, marks[y].si,
                                     marks[x].sj, marks[y].sj};
            }
        }
    return std::nullopt;
}

Fibre reroute(const Fibre& onto, const Fibre& moved, const Violation& v) {
    // moved keeps its prefix up to x and suffix from y, with onto's section
    // between x and y in place of its own.
    Fibre out;
    out.mass = moved.mass;
    auto prefix = fibre_section(moved, 0.0, moved.polyline.front(), v.xj, v.x);
    auto middle = fibre_section(onto, v.xi, v.x, v.yi, v.y);
    auto suffix =
        fibre_section(moved, v.yj, v.y, polyline_length(moved.polyline), moved.polyline.back());
    out.polyline = prefix;
    for (const Vec& p : middle)
        if (out.polyline.empty() || out.polyline.back() != p) out.polyline.push_back(p);
    for (const Vec& p : suffix)
        if (out.polyline.back() != p) out.polyline.push_back(p);
    return out;
}

}  // namespace

IrrigationPattern enforce_single_path(const IrrigationPattern& chi) {
    IrrigationPattern cur = chi;
    const int max_rounds = 16 + static_cast<int>(chi.fibres().size() * chi.fibres().size());
    for (int round = 0; round < max_rounds; ++round) {
        bool changed = false;
        const auto& fibres = cur.fibres();
        for (std::size_t i = 0; i < fibres.size() && !changed; ++i)
            for (std::size_t j = i + 1; j < fibres.size() && !changed; ++j) {
                auto v = find_violation(fibres[i], fibres[j]);
                if (!v) continue;
                std::vector<Fibre> updated = fibres;
                updated[j] = reroute(fibres[i], fibres[j], *v);
                IrrigationPattern candidate(cur.dim(), std::move(updated));
                if (!is_loop_free(candidate)) {
                    // Try the symmetric redirection before giving up on the pair.
                    auto v2 = find_violation(fibres[j], fibres[i]);
                    if (!v2) continue;
                    std::vector<Fibre> updated2 = fibres;
                    updated2[i] = reroute(fibres[j], fibres[i], *v2);
                    IrrigationPattern candidate2(cur.dim(), std::move(updated2));
                    if (!is_loop_free(candidate2)) continue;
                    cur = std::move(candidate2);
                } else {
                    cur = std::move(candidate);
                }
                changed = true;
            }
        if (!changed) break;
    }
    return cur;
}

EquivalenceReport verify_equivalence(const DiscreteMeasure& mu_plus,
                                     const DiscreteMeasure& mu_minus, const CostSpec& spec,
                                     const SolveConfig& cfg, double delta) {
    EquivalenceReport report;
    report.delta = delta;

    SolveResult solved = solve_discrete(mu_plus, mu_minus, spec, cfg);
    const FluxGraph& g = solved.graph;
    report.flux_cost = graph_cost(g, spec);

    IrrigationPattern chi = flux_to_pattern(g);
    report.pattern_cost = chi.empty() ? 0.0 : pattern_cost(chi, spec);

    InequalityCheck flux_vs_pattern;
    flux_vs_pattern.name = "flux_cost equals pattern_cost";
    flux_vs_pattern.lhs = std::abs(report.flux_cost - report.pattern_cost);
    flux_vs_pattern.rhs = 0.0;
    flux_vs_pattern.tol = 1e-9;
    flux_vs_pattern.ok = flux_vs_pattern.lhs <= flux_vs_pattern.tol;
    report.inequalities.push_back(flux_vs_pattern);

    if (spec.is_urban()) {
        double mass = mu_plus.total_mass();
        report.tol_delta = 2.0 * (spec.a + 1.0) * delta * mass + 1e-9;

        NetworkSet sigma = chi.empty() ? NetworkSet(mu_plus.dim())
                                       : extract_sigma(chi, spec.eps, spec.a);
        report.sigma_cost = cost_sigma(sigma, mu_plus, mu_minus, spec.eps, spec.a, delta);

        InequalityCheck sigma_bound;
        sigma_bound.name = "cost_sigma(extract_sigma(chi)) <= pattern_cost + tol(delta)";
        sigma_bound.lhs = *report.sigma_cost;
        sigma_bound.rhs = report.pattern_cost;
        sigma_bound.tol = report.tol_delta;
        sigma_bound.ok = sigma_bound.lhs <= sigma_bound.rhs + sigma_bound.tol;
        report.inequalities.push_back(sigma_bound);

        IrrigationPattern single = chi.empty() ? chi : enforce_single_path(chi);
        double single_cost = single.empty() ? 0.0 : pattern_cost(single, spec);
        report.single_path = single.empty() ? true : check_single_path(single);
        report.single_path_cost_change = single_cost - report.pattern_cost;

        InequalityCheck single_ok;
        single_ok.name = "single-path post-pass holds with cost change <= 1e-9";
        single_ok.lhs = std::abs(report.single_path_cost_change);
        single_ok.rhs = 0.0;
        single_ok.tol = 1e-9;
        single_ok.ok = *report.single_path && single_ok.lhs <= single_ok.tol;
        report.inequalities.push_back(single_ok);
    }

    report.pass = std::all_of(report.inequalities.begin(), report.inequalities.end(),
                              [](const InequalityCheck& c) { return c.ok; });
    return report;
}

}  // namespace ramiflow
