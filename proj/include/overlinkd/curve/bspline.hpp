#pragma once

#include "overlinkd/curve/discrete_curve.hpp"

#include <vector>

namespace overlinkd::curve {

/// B-spline in millimeters. Closed curves repeat their first `degree`
/// control points at the end so that the curve wraps onto itself.
struct BSplineCurve {
    std::vector<Vec3> control_points;
    int degree = 3;
    std::vector<double> knots;
    bool closed = true;

    double domain_begin() const { return knots[static_cast<std::size_t>(degree)]; }
    double domain_end() const { return knots[control_points.size()]; }

    void validate() const
    {
        require(degree >= 1, "bspline: degree must be >= 1");
        require(control_points.size() > static_cast<std::size_t>(degree), "bspline: need more control points than the degree");
        require(knots.size() == control_points.size() + static_cast<std::size_t>(degree) + 1,
                "bspline: knot vector length must equal control points + degree + 1");
        for (std::size_t i = 1; i < knots.size(); ++i) {
            require(knots[i] >= knots[i - 1], "bspline: knots must be non-decreasing");
        }
        require(domain_end() > domain_begin(), "bspline: empty parameter domain");
        if (closed) {
            Vec3 gap = evaluate(domain_begin()) - evaluate(domain_end());
            require(gap.norm() <= 1e-9, "bspline: closed curve endpoints do not coincide");
        }
    }

    /// de Boor evaluation at parameter t within the domain.
    Vec3 evaluate(double t) const
    {
        const auto p = static_cast<std::size_t>(degree);
        const std::size_t n = control_points.size();
        t = std::clamp(t, domain_begin(), domain_end());
        std::size_t k = p;
        while (k + 1 < n && knots[k + 1] <= t) {
            ++k;
        }
        std::vector<Vec3> d(p + 1);
        for (std::size_t j = 0; j <= p; ++j) {
            d[j] = control_points[j + k - p];
        }
        for (std::size_t r = 1; r <= p; ++r) {
            for (std::size_t j = p; j >= r; --j) {
                double left = knots[j + k - p];
                double right = knots[j + 1 + k - r];
                double denom = right - left;
                double alpha = denom > 0.0 ? (t - left) / denom : 0.0;
                d[j] = (1.0 - alpha) * d[j - 1] + alpha * d[j];
            }
        }
        return d[p];
    }
};

/// Uniform periodic B-spline through a closed control polygon (the polygon
/// is given without repetition).
inline BSplineCurve make_closed_bspline(const std::vector<Vec3>& polygon, int degree)
{
    require(polygon.size() >= static_cast<std::size_t>(degree) + 1, "make_closed_bspline: too few control points");
    BSplineCurve c;
    c.degree = degree;
    c.closed = true;
    c.control_points = polygon;
    for (int i = 0; i < degree; ++i) {
        c.control_points.push_back(polygon[static_cast<std::size_t>(i)]);
    }
    std::size_t nk = c.control_points.size() + static_cast<std::size_t>(degree) + 1;
    c.knots.resize(nk);
    for (std::size_t i = 0; i < nk; ++i) {
        c.knots[i] = static_cast<double>(i);
    }
    return c;
}

/// Samples n points at parameters uniform in [0, 1) of the domain.
inline DiscreteCurve3 sample_bspline(const BSplineCurve& c, std::size_t n)
{
    c.validate();
    require(n >= 4, "sample_bspline: n must be at least 4");
    DiscreteCurve3 out;
    out.closed = c.closed;
    out.points.reserve(n);
    double t0 = c.domain_begin(), t1 = c.domain_end();
    for (std::size_t i = 0; i < n; ++i) {
        double u = static_cast<double>(i) / static_cast<double>(n);
        out.points.push_back(c.evaluate(t0 + u * (t1 - t0)));
    }
    return out;
}

} // namespace overlinkd::curve
