#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "ramiflow/flux_graph.hpp"

namespace ramiflow {

// Directed cycle, each vertex visited once. vertices[i] -> vertices[i+1] is
// edges[i]; the last edge closes back to vertices[0].
struct Cycle {
    std::vector<std::size_t> vertices;
    std::vector<std::size_t> edges;
    double weight = 0.0;                  // min edge weight w_G(C)
    std::vector<std::size_t> min_edges;   // edges attaining the minimum
};

// Deterministic: the cycle whose canonical vertex sequence (started at its
// smallest vertex) is lexicographically smallest; nullopt iff acyclic.
std::optional<Cycle> find_cycle(const FluxGraph& g);

// Removes the minimum-weight edges of the cycle and decrements the remaining
// cycle edges by that minimum. Divergence is unchanged.
FluxGraph reduce_cycle(const FluxGraph& g, const Cycle& cycle);

// Repeats cycle reduction until acyclic.
FluxGraph reduce_all_cycles(const FluxGraph& g);

bool is_acyclic(const FluxGraph& g);

struct Path {
    std::vector<Vec> vertices;  // positions, source atom to sink atom
    double weight = 0.0;
};

struct TransportPathMeasure {
    std::vector<Path> paths;

    double total_weight() const {
        double s = 0;
        for (const Path& p : paths) s += p.weight;
        return s;
    }
};

// Greedy flow decomposition of an acyclic flux: repeatedly peels the
// lexicographically smallest source-to-sink walk at min(bottleneck weight,
// remaining source supply). Reconstructs every edge weight exactly and uses
// at most |E| + #sources paths.
TransportPathMeasure path_decompose(const FluxGraph& g);

// Rebuilds the flux containing exactly the given paths.
FluxGraph paths_to_graph(int dim, const TransportPathMeasure& tpm);

// Removes all decomposition paths longer than 2a * diam(spt mu+ u spt mu-)
// and repairs the divergence with straight edges between the deficit sources
// and surplus sinks (nearest pairs first). Iterates until no long path
// remains.
FluxGraph prune_long_paths(const FluxGraph& g, const DiscreteMeasure& mu_plus,
                           const DiscreteMeasure& mu_minus, double a);

}  // namespace ramiflow
