#pragma once

#include "overlinkd/core/types.hpp"

#include <algorithm>
#include <cmath>

namespace overlinkd::geometry {

/// Smooth pairwise collision penalty f(d) = 1 / (1 + tanh(αd + β)) + offset,
/// with d the surface-to-surface distance in mm.
struct CollisionModel {
    double alpha = 5.0;
    double beta = 2.0;
    double offset = -0.5;
    double threshold = 0.1;   // E_th
    std::size_t frame_count = 120;

    void validate() const
    {
        require(alpha > 0.0 && std::isfinite(alpha), "CollisionModel: alpha must be positive");
        require(std::isfinite(beta) && std::isfinite(offset), "CollisionModel: beta and offset must be finite");
        require(threshold > 0.0, "CollisionModel: energy threshold must be positive");
        require(frame_count >= 1, "CollisionModel: need at least one frame");
    }

    /// Distance beyond which the decaying part is below 1e-35 and is skipped.
    double cutoff() const { return (40.0 - beta) / alpha; }
};

namespace detail {
// 1 / (1 + tanh x) = (1 + e^{-2x}) / 2, so f = 0.5 e^{-2x} + (offset + 0.5).
// The exponent is capped to stay finite for deep interpenetration.
inline double decay(double x) { return 0.5 * std::exp(std::min(-2.0 * x, 700.0)); }
} // namespace detail

inline double pair_energy(double d, const CollisionModel& m)
{
    return detail::decay(m.alpha * d + m.beta) + (m.offset + 0.5);
}

inline double pair_energy_derivative(double d, const CollisionModel& m)
{
    return -2.0 * m.alpha * detail::decay(m.alpha * d + m.beta);
}

/// Closest points p0 + s (p1 - p0) and q0 + t (q1 - q0) of two segments.
struct SegmentClosest {
    double distance = 0.0;
    double s = 0.0, t = 0.0;
    Vec3 delta = Vec3::Zero();  // closest point on p minus closest point on q
};

inline SegmentClosest segment_closest(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1)
{
    const Vec3 d1 = p1 - p0, d2 = q1 - q0, r = p0 - q0;
    const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
    constexpr double eps = 1e-18;
    double s = 0.0, t = 0.0;
    if (a <= eps && e > eps) {
        t = std::clamp(f / e, 0.0, 1.0);
    } else if (a > eps) {
        const double c = d1.dot(r);
        if (e <= eps) {
            s = std::clamp(-c / a, 0.0, 1.0);
        } else {
            const double b = d1.dot(d2);
            const double den = a * e - b * b;
            s = den > eps * a * e ? std::clamp((b * f - c * e) / den, 0.0, 1.0) : 0.0;
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
    SegmentClosest out;
    out.s = s;
    out.t = t;
    out.delta = p0 + s * d1 - (q0 + t * d2);
    out.distance = out.delta.norm();
    return out;
}

/// Distance between segments [p0, p1] and [q0, q1] (Ericson's closest-point
/// construction, degenerate segments included).
inline double segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1)
{
    return segment_closest(p0, p1, q0, q1).distance;
}

/// Surface distance between two capsules of radii ra and rb.
inline double capsule_clearance(const Vec3& p0, const Vec3& p1, double ra, const Vec3& q0, const Vec3& q1, double rb)
{
    return segment_distance(p0, p1, q0, q1) - ra - rb;
}

} // namespace overlinkd::geometry
