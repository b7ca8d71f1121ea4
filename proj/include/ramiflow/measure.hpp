#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "ramiflow/geometry.hpp"

namespace ramiflow {

struct Atom {
    Vec pos;
    double mass = 0.0;
};

// Finite non-negative atomic measure. Atoms are stored sorted by position
// (lexicographically); bitwise-equal positions are merged on construction.
class DiscreteMeasure {
public:
    DiscreteMeasure() = default;
    explicit DiscreteMeasure(int dim);
    DiscreteMeasure(int dim, std::vector<Atom> atoms);

    int dim() const { return dim_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    bool empty() const { return atoms_.empty(); }

    // Sum of atom masses in storage order (fixed summation order).
    double total_mass() const;

    bool operator==(const DiscreteMeasure& other) const {
        return dim_ == other.dim_ && atoms_.size() == other.atoms_.size() &&
               [&] {
                   for (std::size_t i = 0; i < atoms_.size(); ++i)
                       if (atoms_[i].pos != other.atoms_[i].pos ||
                           atoms_[i].mass != other.atoms_[i].mass)
                           return false;
                   return true;
               }();
    }

private:
    int dim_ = 0;
    std::vector<Atom> atoms_;
};

double total_mass(const DiscreteMeasure& mu);

// Maps every atom onto the lower corner of its half-open grid cell
// h*[i, i+1)^n and merges atoms landing in the same cell.
DiscreteMeasure grid_discretize(const DiscreteMeasure& mu, double h);

struct PlanEntry {
    std::size_t source = 0;  // atom index in the first measure
    std::size_t sink = 0;    // atom index in the second measure
    double mass = 0.0;
};

struct TransportPlan {
    std::vector<PlanEntry> entries;
};

struct TransportResult {
    double value = 0.0;
    TransportPlan plan;
};

// Exact solution of the finite transportation problem on a dense cost matrix
// (transportation simplex with Bland's pivoting rule). Supplies and demands
// must balance up to 1e-9 relative; the residue is absorbed into the last
// demand entry.
TransportResult solve_transport(const std::vector<double>& supplies,
                                const std::vector<double>& demands,
                                const std::vector<std::vector<double>>& cost);

// 1-Wasserstein distance with Euclidean ground cost, plus an optimal plan.
TransportResult wasserstein1(const DiscreteMeasure& mu_plus, const DiscreteMeasure& mu_minus);

}  // namespace ramiflow
