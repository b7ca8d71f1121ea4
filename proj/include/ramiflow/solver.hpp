#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ramiflow/cost.hpp"
#include "ramiflow/flux_graph.hpp"
#include "ramiflow/measure.hpp"

namespace ramiflow {

struct SolveConfig {
    std::uint64_t seed = 0;
    int max_steiner = 6;     // cap on free branch vertices
    int restarts = 4;
    double geom_tol = 1e-9;  // vertex-move convergence
    int max_iters = 400;     // accepted-move budget per restart

    void validate() const;
};

struct TraceEntry {
    int restart = 0;
    double cost = 0;
};

struct SolveResult {
    FluxGraph graph;
    double cost = 0;
    std::vector<TraceEntry> trace;   // cost after init and each accepted move
    bool budget_exhausted = false;   // max_iters hit before convergence
};

// Local minimisation of graph_cost over mass fluxes with the given marginals.
// Initialised from a 1-Wasserstein plan (restarts jitter the plan costs),
// improved by Fermat-point branch insertion, corridor merge/unmerge moves,
// vertex position descent, cycle reduction and long-path pruning.
// Deterministic for a fixed seed.
SolveResult solve_discrete(const DiscreteMeasure& mu_plus, const DiscreteMeasure& mu_minus,
                           const CostSpec& spec, const SolveConfig& cfg);

// Independent oracle for tiny instances: enumerates every labelled tree over
// the terminal atoms plus up to max_steiner free vertices (flows on a tree
// are forced by mass conservation; concavity puts some optimum on a forest),
// optimising free vertex positions by coordinate descent.
FluxGraph brute_force_tiny(const DiscreteMeasure& mu_plus, const DiscreteMeasure& mu_minus,
                           const CostSpec& spec, int max_steiner, double geom_tol = 1e-9);

// Weighted geometric median via damped Weiszfeld iteration.
Vec fermat_point(const std::vector<Vec>& anchors, const std::vector<double>& weights, Vec start,
                 double tol);

}  // namespace ramiflow
