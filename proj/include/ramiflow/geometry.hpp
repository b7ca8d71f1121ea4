#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ramiflow {

// Points and directions are dense coordinate vectors; instances are desk
// scale, so dynamic dimension costs nothing that matters.
using Vec = std::vector<double>;

inline bool is_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline Vec sub(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec add(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec scale(const Vec& a, double s) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * s;
    return r;
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double distance(const Vec& a, const Vec& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

// a + t*(b-a), evaluated so that t=0 and t=1 reproduce the endpoints bitwise.
inline Vec lerp(const Vec& a, const Vec& b, double t) {
    if (t == 0.0) return a;
    if (t == 1.0) return b;
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + t * (b[i] - a[i]);
    return r;
}

inline bool lex_less(const Vec& a, const Vec& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Exact collinearity of three points: every 2x2 minor of (b-a | c-a) vanishes.
// Intentionally exact; merging of overlapping segments is restricted to
// coordinates that are algebraically on a common line.
inline bool collinear(const Vec& a, const Vec& b, const Vec& c) {
    const std::size_t n = a.size();
    Vec u = sub(b, a), v = sub(c, a);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (u[i] * v[j] - u[j] * v[i] != 0.0) return false;
    return true;
}

// Closest parameter t in [0,1] of p onto segment a-b, and the distance.
struct PointSegmentResult {
    double t;
    double dist;
};

inline PointSegmentResult point_segment_closest(const Vec& p, const Vec& a, const Vec& b) {
    Vec ab = sub(b, a);
    double denom = dot(ab, ab);
    double t = 0.0;
    if (denom > 0.0) t = std::clamp(dot(sub(p, a), ab) / denom, 0.0, 1.0);
    return {t, distance(p, lerp(a, b, t))};
}

// Closest pair of parameters between segments p1-q1 and p2-q2 (clamped to
// [0,1]^2) and the distance between the closest points.
struct SegmentSegmentResult {
    double s, t;
    double dist;
};

inline SegmentSegmentResult segment_segment_closest(const Vec& p1, const Vec& q1,
                                                    const Vec& p2, const Vec& q2) {
    Vec d1 = sub(q1, p1), d2 = sub(q2, p2), r = sub(p1, p2);
    double a = dot(d1, d1), e = dot(d2, d2), f = dot(d2, r);
    double s = 0.0, t = 0.0;
    if (a == 0.0 && e == 0.0) {
        // both degenerate
    } else if (a == 0.0) {
        t = std::clamp(f / e, 0.0, 1.0);
    } else {
        double c = dot(d1, r);
        if (e == 0.0) {
            s = std::clamp(-c / a, 0.0, 1.0);
        } else {
            double b = dot(d1, d2);
            double denom = a * e - b * b;
            s = denom != 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
            t = (b * s + f) / e;
            if (t < 0.0) {
                t = 0.0;
                s = std::clamp(-c / a, 0.0, 1.0);
            } else if (t > 1.0) {
                t = 1.0;
                s = std::clamp((b - c) / a, 0.0, 1.0);
            }
        }
    }
    return {s, t, distance(lerp(p1, q1, s), lerp(p2, q2, t))};
}

inline double polyline_length(const std::vector<Vec>& pts) {
    double l = 0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) l += distance(pts[i], pts[i + 1]);
    return l;
}

}  // namespace ramiflow
