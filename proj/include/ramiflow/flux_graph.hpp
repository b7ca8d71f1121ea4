#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "ramiflow/cost.hpp"
#include "ramiflow/geometry.hpp"
#include "ramiflow/measure.hpp"

namespace ramiflow {

struct FluxEdge {
    std::size_t tail = 0;
    std::size_t head = 0;
    double weight = 0.0;
};

// Weighted directed geometric graph, identified with the vector measure that
// puts density w(e) along each straight edge. Construction normalises to a
// canonical form: vertices deduplicated (bitwise) and sorted
// lexicographically, parallel edges merged, antiparallel edges cancelled,
// zero-weight and degenerate edges dropped, isolated vertices dropped.
class FluxGraph {
public:
    FluxGraph() = default;
    explicit FluxGraph(int dim) : dim_(dim) {}
    FluxGraph(int dim, std::vector<Vec> vertices, std::vector<FluxEdge> edges);

    int dim() const { return dim_; }
    const std::vector<Vec>& vertices() const { return vertices_; }
    const std::vector<FluxEdge>& edges() const { return edges_; }
    bool empty() const { return edges_.empty(); }

    double edge_length(std::size_t e) const {
        return distance(vertices_[edges_[e].tail], vertices_[edges_[e].head]);
    }

    std::optional<std::size_t> find_vertex(const Vec& pos) const;

    // Same measure, all orientations flipped (J -> -J).
    FluxGraph reversed() const;

    // Measure-canonical form: collinear overlapping edges of this graph are
    // split at all endpoints and recombined, so distinct edges never overlap.
    FluxGraph canonicalized() const;

    bool operator==(const FluxGraph& other) const;

private:
    int dim_ = 0;
    std::vector<Vec> vertices_;
    std::vector<FluxEdge> edges_;
};

// Net outflow per vertex, split into sources (positive net) and sinks.
std::pair<DiscreteMeasure, DiscreteMeasure> divergence(const FluxGraph& g);

// True iff divergence(g) equals mu_plus - mu_minus as a signed atomic
// measure, position by position, within tol on the masses.
bool check_mass_flux(const FluxGraph& g, const DiscreteMeasure& mu_plus,
                     const DiscreteMeasure& mu_minus, double tol);

// Sum over edges of c(w(e)) * l(e).
double graph_cost(const FluxGraph& g, const CostSpec& spec);

// Sum over edges of w(e) * l(e); the total variation of the vector measure.
double total_variation(const FluxGraph& g);

// Vector-measure addition: collinear overlapping portions are split at all
// endpoints, same-orientation weights add, opposite orientations cancel.
// Non-collinear crossings do not interact.
FluxGraph graph_sum(const FluxGraph& g1, const FluxGraph& g2);

// Total variation norm of J_{g1} - J_{g2}, realised as a graph difference.
double tv_distance(const FluxGraph& g1, const FluxGraph& g2);

// Edge indices with a*w(e) > w(e) + eps, i.e. w(e) > eps/(a-1) strictly.
std::vector<std::size_t> extract_network_subgraph(const FluxGraph& g, double eps, double a);

}  // namespace ramiflow
