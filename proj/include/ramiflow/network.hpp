#pragma once

#include <cstddef>
#include <vector>

#include "ramiflow/geometry.hpp"
#include "ramiflow/measure.hpp"
#include "ramiflow/pattern.hpp"

namespace ramiflow {

struct Segment {
    Vec a, b;
};

// Finite union of nondegenerate segments; the built transport network.
class NetworkSet {
public:
    NetworkSet() = default;
    explicit NetworkSet(int dim) : dim_(dim) {}
    NetworkSet(int dim, std::vector<Segment> segments);

    int dim() const { return dim_; }
    const std::vector<Segment>& segments() const { return segments_; }
    bool empty() const { return segments_.empty(); }

private:
    int dim_ = 0;
    std::vector<Segment> segments_;
};

// H^1 measure of the union; collinear overlaps counted once.
double h1_length(const NetworkSet& sigma);

// Two-speed path metric: rate 1 along sigma, rate a elsewhere, evaluated on
// the auxiliary graph whose nodes are the query points, segment endpoints and
// samples spaced at most delta apart (sample counts are powers of two, so
// halving delta refines the node set and the value cannot increase). The
// value overestimates the true metric by O(delta).
double d_sigma(const Vec& x, const Vec& y, const NetworkSet& sigma, double a, double delta);

// All-pairs version feeding an exact transport solve.
double wasserstein_dsigma(const DiscreteMeasure& mu_plus, const DiscreteMeasure& mu_minus,
                          const NetworkSet& sigma, double a, double delta);

// W_{d_sigma} + eps * H^1(sigma).
double cost_sigma(const NetworkSet& sigma, const DiscreteMeasure& mu_plus,
                  const DiscreteMeasure& mu_minus, double eps, double a, double delta);

// Canonical segments of the pattern whose solidarity mass strictly exceeds
// eps/(a-1).
NetworkSet extract_sigma(const IrrigationPattern& chi, double eps, double a);

}  // namespace ramiflow
