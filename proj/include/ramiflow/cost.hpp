#pragma once

#include <cmath>
#include <stdexcept>

namespace ramiflow {

// Transport cost per unit length as a function of the moved mass. Two
// families: branched transport w^alpha and urban planning min(a*w, w+eps),
// the latter with the on-network rate normalised to 1.
struct CostSpec {
    enum class Kind { branched_transport, urban_planning };

    Kind kind = Kind::branched_transport;
    double alpha = 0.5;  // branched transport exponent
    double eps = 0.0;    // urban planning maintenance cost per length
    double a = 0.0;      // urban planning off-network rate

    // alpha = 1 is admitted as the degenerate linear member (cost density 1);
    // it reduces edge cost to plain mass times length.
    static CostSpec branched(double alpha) {
        if (!(alpha > 0.0 && alpha <= 1.0))
            throw std::invalid_argument("CostSpec: alpha must lie in (0, 1]");
        CostSpec s;
        s.kind = Kind::branched_transport;
        s.alpha = alpha;
        return s;
    }

    static CostSpec urban(double eps, double a) {
        if (!(eps > 0.0)) throw std::invalid_argument("CostSpec: eps must be positive");
        if (!(a > 1.0)) throw std::invalid_argument("CostSpec: a must exceed 1");
        CostSpec s;
        s.kind = Kind::urban_planning;
        s.eps = eps;
        s.a = a;
        return s;
    }

    bool is_urban() const { return kind == Kind::urban_planning; }
};

// c(w) per unit length; c(0) = 0 in both families.
inline double edge_cost(double w, const CostSpec& spec) {
    if (w < 0.0) throw std::invalid_argument("edge_cost: negative weight");
    if (w == 0.0) return 0.0;
    if (spec.kind == CostSpec::Kind::branched_transport) return std::pow(w, spec.alpha);
    return std::min(spec.a * w, w + spec.eps);
}

}  // namespace ramiflow
