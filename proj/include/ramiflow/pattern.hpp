#pragma once

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "ramiflow/cost.hpp"
#include "ramiflow/geometry.hpp"
#include "ramiflow/measure.hpp"

namespace ramiflow {

// Mass-weighted polyline fibre; the polyline is interpreted as the image of
// the particle path under its constant-speed parameterisation.
struct Fibre {
    std::vector<Vec> polyline;
    double mass = 0.0;
};

// Finite irrigation pattern. Construction canonicalises the geometry:
// vertices within 1e-12 are merged onto a common representative, consecutive
// duplicates are dropped, and every segment is split at all pattern vertices
// lying on it, so overlapping fibre portions share identical subsegments.
class IrrigationPattern {
public:
    IrrigationPattern() = default;
    explicit IrrigationPattern(int dim) : dim_(dim) {}
    IrrigationPattern(int dim, std::vector<Fibre> fibres);

    int dim() const { return dim_; }
    const std::vector<Fibre>& fibres() const { return fibres_; }
    bool empty() const { return fibres_.empty(); }
    double total_mass() const;

    // Solidarity mass per canonical segment, keyed by the lexicographically
    // ordered endpoint pair. Each fibre counts once per segment it visits.
    using SegmentKey = std::pair<Vec, Vec>;
    const std::map<SegmentKey, double>& segment_masses() const { return segment_masses_; }

    // Fibres sharing a segment in opposite directions exist (allowed, but
    // noteworthy: the matching flux cancels there while the pattern pays).
    bool has_opposite_overlap() const { return has_opposite_overlap_; }

    static SegmentKey key_of(const Vec& a, const Vec& b) {
        return lex_less(a, b) ? SegmentKey{a, b} : SegmentKey{b, a};
    }

private:
    int dim_ = 0;
    std::vector<Fibre> fibres_;
    std::map<SegmentKey, double> segment_masses_;
    bool has_opposite_overlap_ = false;
};

// Snapping tolerance of the canonical arrangement.
inline constexpr double kPatternSnapTol = 1e-12;

// (first point, mass) and (last point, mass) of every fibre, merged.
std::pair<DiscreteMeasure, DiscreteMeasure> irrigating_measures(const IrrigationPattern& chi);

// Total mass of fibres whose polyline contains x.
double solidarity_mass(const IrrigationPattern& chi, const Vec& x);

// Per-particle cost integral: sum over fibres and their segments of
// mass * s(m) * length with s(m) = c(m)/m evaluated at the segment's
// solidarity mass.
double pattern_cost(const IrrigationPattern& chi, const CostSpec& spec);

// Re-establishes the canonical constant-speed representation (geometry
// unchanged as a point set, cost unchanged).
IrrigationPattern reparameterise_constant_speed(const IrrigationPattern& chi);

// True iff no fibre revisits a point after leaving it.
bool is_loop_free(const IrrigationPattern& chi);

// True iff any two fibres passing through an ordered point pair (x, y) in
// the same order use the same sub-path between x and y. Requires a loop-free
// pattern.
bool check_single_path(const IrrigationPattern& chi);

}  // namespace ramiflow
