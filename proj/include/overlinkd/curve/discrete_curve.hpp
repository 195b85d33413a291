#pragma once

#include "overlinkd/core/types.hpp"

#include <algorithm>
#include <vector>

namespace overlinkd::curve {

/// Ordered 3D samples of a curve, millimeters. Closed curves do not repeat
/// the first point at the end.
struct DiscreteCurve3 {
    std::vector<Vec3> points;
    bool closed = true;

    std::size_t size() const noexcept { return points.size(); }
    const Vec3& operator[](std::size_t i) const { return points[i]; }

    /// Cyclic access for closed curves.
    const Vec3& at_cyclic(std::ptrdiff_t i) const
    {
        auto n = static_cast<std::ptrdiff_t>(points.size());
        return points[static_cast<std::size_t>(((i % n) + n) % n)];
    }

    std::size_t segment_count() const noexcept
    {
        if (points.size() < 2) {
            return 0;
        }
        return closed ? points.size() : points.size() - 1;
    }

    void validate() const
    {
        require(points.size() >= 4, "curve needs at least 4 points");
        for (const auto& p : points) {
            require(p.allFinite(), "curve contains a non-finite point");
        }
        for (std::size_t i = 0; i < segment_count(); ++i) {
            const Vec3& a = points[i];
            const Vec3& b = points[(i + 1) % points.size()];
            require((b - a).norm() > 1e-9, "curve has coincident consecutive points at index " + std::to_string(i));
        }
    }
};

inline double polyline_length(const DiscreteCurve3& c)
{
    double total = 0.0;
    for (std::size_t i = 0; i < c.segment_count(); ++i) {
        total += (c.points[(i + 1) % c.size()] - c.points[i]).norm();
    }
    return total;
}

struct BoundingBox {
    Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

    void expand(const Vec3& p)
    {
        min = min.cwiseMin(p);
        max = max.cwiseMax(p);
    }
    double diagonal() const { return (max - min).norm(); }
    bool contains(const Vec3& p, double tol = 0.0) const
    {
        return (p.array() >= min.array() - tol).all() && (p.array() <= max.array() + tol).all();
    }
};

inline BoundingBox bounding_box(const std::vector<Vec3>& pts)
{
    BoundingBox box;
    for (const auto& p : pts) {
        box.expand(p);
    }
    return box;
}

/// Resamples to n points equally spaced in arc length along the polyline.
/// Closed curves start at the first input point and do not repeat it.
inline DiscreteCurve3 resample_arclength(const DiscreteCurve3& c, std::size_t n)
{
    require(n >= 4, "resample_arclength: n must be at least 4");
    require(c.size() >= 2, "resample_arclength: curve needs at least 2 points");
    std::size_t segs = c.segment_count();
    std::vector<double> cum(segs + 1, 0.0);
    for (std::size_t i = 0; i < segs; ++i) {
        cum[i + 1] = cum[i] + (c.points[(i + 1) % c.size()] - c.points[i]).norm();
    }
    double total = cum.back();
    if (!(total > 1e-12)) {
        throw ValidationError("resample_arclength: curve has zero length");
    }
    DiscreteCurve3 out;
    out.closed = c.closed;
    out.points.reserve(n);
    double step = c.closed ? total / static_cast<double>(n) : total / static_cast<double>(n - 1);
    std::size_t seg = 0;
    for (std::size_t k = 0; k < n; ++k) {
        double s = step * static_cast<double>(k);
        if (!c.closed && k + 1 == n) {
            out.points.push_back(c.points.back());
            break;
        }
        while (seg + 1 < segs && cum[seg + 1] <= s) {
            ++seg;
        }
        double len = cum[seg + 1] - cum[seg];
        double u = len > 0.0 ? std::clamp((s - cum[seg]) / len, 0.0, 1.0) : 0.0;
        const Vec3& a = c.points[seg];
        const Vec3& b = c.points[(seg + 1) % c.size()];
        out.points.push_back(a + u * (b - a));
    }
    return out;
}

} // namespace overlinkd::curve
