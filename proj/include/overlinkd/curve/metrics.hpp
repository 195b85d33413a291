#pragma once

#include "overlinkd/curve/discrete_curve.hpp"

#include <limits>
#include <vector>

namespace overlinkd::curve {

/// Per-sample (turning angle, binormal angle) pair.
struct SignatureEntry {
    double gamma = 0.0;
    double delta = 0.0;
};

using CurvatureSignature = std::vector<SignatureEntry>;

namespace detail {

// Unit binormal of the corner (a, b, c); zero when the corner is degenerate.
inline Vec3 corner_binormal(const Vec3& a, const Vec3& b, const Vec3& c)
{
    Vec3 e0 = b - a, e1 = c - b;
    double scale = e0.norm() * e1.norm();
    Vec3 n = e0.cross(e1);
    double len = n.norm();
    if (scale <= 0.0 || len / scale < 1e-12) {
        return Vec3::Zero();
    }
    return n / len;
}

} // namespace detail

/// Turning angle γ at every sample and angle δ between the osculating planes
/// of consecutive corners. Indices are cyclic. Both angles are unsigned;
/// δ is the angle between planes, so it lies in [0, π/2].
inline CurvatureSignature curvature_signature(const DiscreteCurve3& c)
{
    if (!c.closed) {
        throw ValidationError("curvature_signature: curve must be closed");
    }
    c.validate();
    const auto n = static_cast<std::ptrdiff_t>(c.size());
    std::vector<Vec3> binormal(static_cast<std::size_t>(n));
    CurvatureSignature sig(static_cast<std::size_t>(n));
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const Vec3& prev = c.at_cyclic(i - 1);
        const Vec3& cur = c.at_cyclic(i);
        const Vec3& next = c.at_cyclic(i + 1);
        Vec3 e0 = cur - prev, e1 = next - cur;
        sig[static_cast<std::size_t>(i)].gamma = std::atan2(e0.cross(e1).norm(), e0.dot(e1));
        binormal[static_cast<std::size_t>(i)] = detail::corner_binormal(prev, cur, next);
    }
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const Vec3& b0 = binormal[static_cast<std::size_t>(i)];
        const Vec3& b1 = binormal[static_cast<std::size_t>((i + 1) % n)];
        if (b0.isZero(0.0) || b1.isZero(0.0)) {
            sig[static_cast<std::size_t>(i)].delta = 0.0;
            if (b0.isZero(0.0)) {
                sig[static_cast<std::size_t>(i)].gamma = sig[static_cast<std::size_t>(i)].gamma > kPi / 2 ? kPi : 0.0;
            }
            continue;
        }
        sig[static_cast<std::size_t>(i)].delta = std::atan2(b0.cross(b1).norm(), std::abs(b0.dot(b1)));
    }
    return sig;
}

/// Minimum over cyclic offsets k of Σ_i |γ_A(k+i) − γ_B(i)| + |δ_A(k+i) − δ_B(i)|,
/// normalized by 2πn. Returns the best offset through `best_offset`.
inline double signature_distance(const CurvatureSignature& a, const CurvatureSignature& b,
                                 std::size_t* best_offset = nullptr)
{
    if (a.size() != b.size() || a.empty()) {
        throw Error("signature_distance: signatures differ in length");
    }
    const std::size_t n = a.size();
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t k = 0; k < n; ++k) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n && sum < best; ++i) {
            const auto& ea = a[(k + i) % n];
            const auto& eb = b[i];
            sum += std::abs(ea.gamma - eb.gamma) + std::abs(ea.delta - eb.delta);
        }
        if (sum < best) {
            best = sum;
            arg = k;
        }
    }
    if (best_offset != nullptr) {
        *best_offset = arg;
    }
    return best / (kTwoPi * static_cast<double>(n));
}

/// Curvature-signature similarity of two closed curves, in [0, 1]; 0 for
/// identical shapes. The coarser curve is arc-length resampled to the
/// sample count of the finer one.
inline double similarity(const DiscreteCurve3& a, const DiscreteCurve3& b, std::size_t* best_offset = nullptr)
{
    require(a.closed && b.closed, "similarity: both curves must be closed");
    if (a.size() == b.size()) {
        return signature_distance(curvature_signature(a), curvature_signature(b), best_offset);
    }
    if (a.size() < b.size()) {
        return signature_distance(curvature_signature(resample_arclength(a, b.size())), curvature_signature(b), best_offset);
    }
    return signature_distance(curvature_signature(a), curvature_signature(resample_arclength(b, a.size())), best_offset);
}

inline double directed_hausdorff(const std::vector<Vec3>& from, const std::vector<Vec3>& to)
{
    double worst = 0.0;
    for (const auto& p : from) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : to) {
            best = std::min(best, (p - q).squaredNorm());
            if (best <= worst) {
                break;
            }
        }
        worst = std::max(worst, best);
    }
    return std::sqrt(worst);
}

/// Symmetric point-set Hausdorff distance, mm.
inline double hausdorff(const DiscreteCurve3& a, const DiscreteCurve3& b)
{
    require(!a.points.empty() && !b.points.empty(), "hausdorff: empty curve");
    return std::max(directed_hausdorff(a.points, b.points), directed_hausdorff(b.points, a.points));
}

/// Hausdorff distance divided by the bounding-box diagonal of `a`.
inline double normalized_hausdorff(const DiscreteCurve3& a, const DiscreteCurve3& b)
{
    double h = hausdorff(a, b);
    double diag = bounding_box(a.points).diagonal();
    if (!(diag > 1e-12)) {
        if (h == 0.0) {
            return 0.0;
        }
        throw ValidationError("normalized_hausdorff: reference curve has a degenerate bounding box");
    }
    return h / diag;
}

/// Distance from p to the segment [a, b].
inline double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b)
{
    Vec3 d = b - a;
    double len2 = d.squaredNorm();
    double u = len2 > 0.0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
    return (a + u * d - p).norm();
}

/// Largest distance from a vertex of `from` to the polyline `to`.
inline double directed_polyline_hausdorff(const DiscreteCurve3& from, const DiscreteCurve3& to)
{
    const std::size_t segs = to.segment_count();
    const std::size_t n = to.size();
    std::vector<double> half(segs), d2(n);
    for (std::size_t i = 0; i < segs; ++i) {
        half[i] = 0.5 * (to.points[(i + 1) % n] - to.points[i]).norm();
    }
    double worst = 0.0;
    for (const auto& p : from.points) {
        double best2 = std::numeric_limits<double>::infinity();
        bool dominated = false;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = (to.points[i] - p).squaredNorm();
            best2 = std::min(best2, d2[i]);
            if (d2[i] <= worst * worst) {
                dominated = true; // p cannot raise the maximum
                break;
            }
        }
        if (dominated) {
            continue;
        }
        double best = std::sqrt(best2);
        for (std::size_t i = 0; i < segs && best > worst; ++i) {
            // Every point of a segment lies within half its length of an endpoint.
            double reach = best + half[i];
            if (std::min(d2[i], d2[(i + 1) % n]) < reach * reach) {
                best = std::min(best, point_segment_distance(p, to.points[i], to.points[(i + 1) % n]));
            }
        }
        worst = std::max(worst, best);
    }
    return worst;
}

/// Hausdorff distance measured from the vertices of each curve to the
/// polyline of the other. Unlike the point-set form it does not grow with
/// the sample spacing of unevenly sampled curves.
inline double polyline_hausdorff(const DiscreteCurve3& a, const DiscreteCurve3& b)
{
    require(!a.points.empty() && !b.points.empty(), "polyline_hausdorff: empty curve");
    return std::max(directed_polyline_hausdorff(a, b), directed_polyline_hausdorff(b, a));
}

/// Polyline Hausdorff distance divided by the bounding-box diagonal of `a`.
inline double normalized_polyline_hausdorff(const DiscreteCurve3& a, const DiscreteCurve3& b)
{
    double h = polyline_hausdorff(a, b);
    double diag = bounding_box(a.points).diagonal();
    if (!(diag > 1e-12)) {
        if (h == 0.0) {
            return 0.0;
        }
        throw ValidationError("normalized_polyline_hausdorff: reference curve has a degenerate bounding box");
    }
    return h / diag;
}

} // namespace overlinkd::curve
