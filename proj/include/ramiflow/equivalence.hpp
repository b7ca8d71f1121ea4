#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ramiflow/flux_graph.hpp"
#include "ramiflow/graph_reduce.hpp"
#include "ramiflow/network.hpp"
#include "ramiflow/pattern.hpp"
#include "ramiflow/solver.hpp"

namespace ramiflow {

// Flux -> pattern: cycles are reduced first, then every decomposition path
// becomes a fibre with the path weight as its mass.
IrrigationPattern flux_to_pattern(const FluxGraph& g);

// Pattern -> flux: signed per-direction mass sums on the canonical segment
// arrangement; opposite directions cancel.
FluxGraph pattern_to_flux(const IrrigationPattern& chi);

// Redirects fibres sharing an ordered point pair onto a common sub-path
// until the single path property holds.
IrrigationPattern enforce_single_path(const IrrigationPattern& chi);

struct InequalityCheck {
    std::string name;
    double lhs = 0, rhs = 0, tol = 0;
    bool ok = false;
};

struct EquivalenceReport {
    double flux_cost = 0;
    double pattern_cost = 0;
    std::optional<double> sigma_cost;        // urban planning only
    std::optional<bool> single_path;         // urban planning only
    double single_path_cost_change = 0;
    double delta = 0;
    double tol_delta = 0;                    // reported sampling allowance
    std::vector<InequalityCheck> inequalities;
    bool pass = false;
};

// Solves the instance, converts between the formulations and checks the
// inequality chain the equivalence proofs rely on.
EquivalenceReport verify_equivalence(const DiscreteMeasure& mu_plus,
                                     const DiscreteMeasure& mu_minus, const CostSpec& spec,
                                     const SolveConfig& cfg, double delta);

}  // namespace ramiflow
