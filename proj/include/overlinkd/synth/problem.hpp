#pragma once

#include "overlinkd/curve/metrics.hpp"
#include "overlinkd/dynamics/dynamics.hpp"
#include "overlinkd/synth/cmaes.hpp"

#include <Eigen/SVD>

#include <optional>

namespace overlinkd::synth {

using curve::BoundingBox;
using curve::DiscreteCurve3;
using dynamics::KeyPointSpec;
using dynamics::LoadProfile;
using kinematics::BennettDesign;
using kinematics::BennettKinematics;
using kinematics::BennettParams;

/// Flat design vector: a, b, α, p0 (3), mount translation (3), mount rotation
/// exponential coordinates (3).
inline constexpr std::size_t kParamCount = 12;
inline constexpr std::size_t kShapeParamCount = 6;

struct ParamBounds {
    VecX lower = VecX::Zero(kParamCount);
    VecX upper = VecX::Zero(kParamCount);

    void validate() const
    {
        require(lower.size() == static_cast<Eigen::Index>(kParamCount) && upper.size() == lower.size(),
                "ParamBounds: 12 lower and upper values are required");
        for (Eigen::Index i = 0; i < lower.size(); ++i) {
            require(std::isfinite(lower[i]) && std::isfinite(upper[i]) && lower[i] < upper[i],
                    "ParamBounds: lower < upper is required for parameter " + std::to_string(i));
        }
    }
};

/// Lengths in [40, 200] mm, twist in [0.2, π − 0.2], p0 and the mount
/// translation within 1.5 box diagonals, rotation coordinates in [−π, π].
inline ParamBounds default_bounds(const BoundingBox& box)
{
    ParamBounds b;
    double r = 1.5 * box.diagonal();
    Vec3 c = 0.5 * (box.min + box.max);
    b.lower << 40.0, 40.0, 0.2, -r, -r, -r, c.x() - r, c.y() - r, c.z() - r, -kPi, -kPi, -kPi;
    b.upper << 200.0, 200.0, kPi - 0.2, r, r, r, c.x() + r, c.y() + r, c.z() + r, kPi, kPi, kPi;
    return b;
}

struct Weights {
    double similarity = 10.0;
    double torque = 1.0;
    double energy = 0.1;
};

struct DesignProblem {
    DiscreteCurve3 target;
    KeyPointSpec keypoints;
    LoadProfile load;
    BoundingBox box;
    ParamBounds bounds;
    Weights weights;
    double stall_torque = 3000.0; // N·mm
    double nh_tol = 0.10;
    double sing_tol = 0.01; // mm/rad
    double period = 3.0;    // s
    double penalty = 1e3;   // per squared normalized residual
    std::size_t metric_samples = 50;
    std::size_t dynamics_samples = 120;
    std::size_t path_samples = 400; // dense trace behind the metric and NH
    /// Derive the mount from the target by rigid alignment instead of
    /// searching its six coordinates.
    bool align_mount = true;

    void validate() const
    {
        require(target.closed, "DesignProblem: target curve must be closed");
        target.validate();
        keypoints.validate();
        load.validate();
        bounds.validate();
        require((box.min.array() < box.max.array()).all(), "DesignProblem: box min must be below max");
        require(weights.similarity >= 0.0 && weights.torque >= 0.0 && weights.energy >= 0.0,
                "DesignProblem: weights must be nonnegative");
        require(stall_torque > 0.0, "DesignProblem: stall torque must be positive");
        require(nh_tol > 0.0 && nh_tol <= 1.0, "DesignProblem: nh_tol must lie in (0, 1]");
        require(sing_tol >= 0.0, "DesignProblem: sing_tol must be nonnegative");
        require(period > 0.0, "DesignProblem: period must be positive");
        require(metric_samples >= 8, "DesignProblem: at least 8 metric samples");
        require(dynamics_samples >= 90, "DesignProblem: at least 90 dynamics samples");
    }
};

struct Decoded {
    BennettDesign design;
    bool valid = true;          // a real β exists
    double ratio_excess = 0.0;  // max(0, |b sinα / a| − 1) when invalid
    double bound_violation = 0.0; // Σ squared range-normalized clamp distances
};

inline Decoded decode(const VecX& x, const ParamBounds& bounds)
{
    require(x.size() == static_cast<Eigen::Index>(kParamCount), "decode: expected 12 parameters");
    Decoded out;
    VecX c = x.cwiseMax(bounds.lower).cwiseMin(bounds.upper);
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        double d = (x[i] - c[i]) / (bounds.upper[i] - bounds.lower[i]);
        out.bound_violation += d * d;
    }
    double a = c[0], b = c[1], alpha = c[2];
    auto beta = BennettParams::derive_beta(a, b, alpha);
    if (!beta) {
        out.valid = false;
        out.ratio_excess = std::abs(b * std::sin(alpha) / a) - 1.0;
        out.design.params = {a, b, alpha, alpha};
    } else {
        out.design.params = {a, b, alpha, *beta};
    }
    out.design.p0 = c.segment<3>(3);
    out.design.mount.translation = c.segment<3>(6);
    out.design.mount.rotation = rotation_from_exp(c.segment<3>(9));
    return out;
}

inline VecX encode(const BennettDesign& d)
{
    VecX x(kParamCount);
    x << d.params.a, d.params.b, d.params.alpha, d.p0, d.mount.translation, rotation_log(d.mount.rotation);
    return x;
}

/// Target samples prepared once per problem.
struct TargetCache {
    DiscreteCurve3 metric; // arc-length resampled to metric_samples
    curve::CurvatureSignature signature;
    double diagonal = 0.0;

    explicit TargetCache(const DesignProblem& p)
        : metric(curve::resample_arclength(p.target, p.metric_samples)),
          signature(curve::curvature_signature(metric)),
          diagonal(curve::bounding_box(p.target.points).diagonal())
    {
    }
};

namespace detail {

/// Proper rigid transform minimizing Σ |R src_i + t − dst_i|² about the
/// given pivots (centroids when not supplied).
inline RigidTransform kabsch(const std::vector<Vec3>& src, const std::vector<Vec3>& dst,
                             std::optional<std::pair<Vec3, Vec3>> pivot = std::nullopt)
{
    Vec3 cs = Vec3::Zero(), cd = Vec3::Zero();
    if (pivot) {
        cs = pivot->first;
        cd = pivot->second;
    } else {
        for (std::size_t i = 0; i < src.size(); ++i) {
            cs += src[i];
            cd += dst[i];
        }
        cs /= static_cast<double>(src.size());
        cd /= static_cast<double>(src.size());
    }
    Mat3 h = Mat3::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) {
        h += (src[i] - cs) * (dst[i] - cd).transpose();
    }
    Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 v = svd.matrixV(), u = svd.matrixU();
    double s = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
    Mat3 r = v * Vec3(1.0, 1.0, s).asDiagonal() * u.transpose();
    RigidTransform t;
    t.rotation = r;
    t.translation = cd - r * cs;
    return t;
}

inline std::size_t nearest_index(const std::vector<Vec3>& pts, const Vec3& p)
{
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double d = (pts[i] - p).squaredNorm();
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    return best;
}

/// Closed polyline of the given points starting at index `start`.
inline DiscreteCurve3 rotated_curve(const std::vector<Vec3>& pts, std::size_t start)
{
    DiscreteCurve3 c;
    c.points.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        c.points.push_back(pts[(start + i) % pts.size()]);
    }
    return c;
}

} // namespace detail

/// Mount that rigidly aligns the design's local path with the target and
/// makes the path pass through the key points. Alignment: corresponding
/// arc-length samples (cyclic offset from the curvature signature), a few
/// closest-point refinements, then a key-point snap: a pivoted fit for one
/// key point, damped Gauss-Newton on the mount and the key parameters for
/// more.
inline RigidTransform align_mount(const BennettDesign& design, const DesignProblem& problem, const TargetCache& cache,
                                  std::size_t dense = 240)
{
    BennettDesign local = design;
    local.mount = RigidTransform{};
    BennettKinematics kin(local);
    dynamics::ArcTable table(kin, kin.reference().theta[0], dense);
    std::vector<Vec3> pts(table.points().begin(), table.points().end() - 1);

    DiscreteCurve3 lc = curve::resample_arclength(detail::rotated_curve(pts, 0), problem.metric_samples);
    std::size_t offset = 0;
    curve::signature_distance(curve::curvature_signature(lc), cache.signature, &offset);
    const std::size_t n = lc.size();
    std::vector<Vec3> src(n), dst = cache.metric.points;
    for (std::size_t i = 0; i < n; ++i) {
        src[i] = lc.points[(offset + i) % n];
    }
    RigidTransform m = detail::kabsch(src, dst);
    const std::size_t np = pts.size();
    for (int it = 0; it < 6; ++it) {
        std::vector<Vec3> moved(np);
        for (std::size_t i = 0; i < np; ++i) {
            moved[i] = m.apply(pts[i]);
        }
        // Closest point on the moved path, projected onto the two segments
        // adjacent to the nearest vertex.
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t j = detail::nearest_index(moved, dst[i]);
            Vec3 best = pts[j];
            double bd = (moved[j] - dst[i]).norm();
            for (std::size_t nb : {(j + np - 1) % np, (j + 1) % np}) {
                Vec3 d = moved[nb] - moved[j];
                double u = std::clamp((dst[i] - moved[j]).dot(d) / std::max(d.squaredNorm(), 1e-300), 0.0, 1.0);
                double dd = (moved[j] + u * d - dst[i]).norm();
                if (dd < bd) {
                    bd = dd;
                    best = pts[j] + u * (pts[nb] - pts[j]);
                }
            }
            src[i] = best;
        }
        m = detail::kabsch(src, dst);
    }

    const auto& kp = problem.keypoints.points;
    if (kp.empty()) {
        return m;
    }
    // Closest local parameter for each key point under the current mount.
    std::vector<double> qk(kp.size());
    for (std::size_t k = 0; k < kp.size(); ++k) {
        qk[k] = dynamics::closest_trace_point(kin, table, m.inverse().apply(kp[k].point)).q;
    }
    if (kp.size() == 1) {
        Vec3 c = kin.fk(qk[0]).ee;
        return detail::kabsch(src, dst, std::make_pair(c, kp[0].point));
    }

    // Damped Gauss-Newton on (mount twist, q_k) for ee(q_k) = o_k.
    const auto mk = static_cast<Eigen::Index>(kp.size());
    double lambda = 1e-6;
    auto residual = [&](const RigidTransform& mt, const std::vector<double>& q) {
        VecX r(3 * mk);
        for (Eigen::Index k = 0; k < mk; ++k) {
            r.segment<3>(3 * k) = mt.apply(kin.fk(q[static_cast<std::size_t>(k)]).ee) - kp[static_cast<std::size_t>(k)].point;
        }
        return r;
    };
    VecX r = residual(m, qk);
    for (int it = 0; it < 60 && r.norm() > 1e-10; ++it) {
        MatX j = MatX::Zero(3 * mk, 6 + mk);
        for (Eigen::Index k = 0; k < mk; ++k) {
            double q = qk[static_cast<std::size_t>(k)];
            Vec3 x = m.apply(kin.fk(q).ee);
            Vec3 dx;
            try {
                dx = m.rotation * kin.jacobian(q).linear;
            } catch (const SingularityError&) {
                dx = Vec3::Zero();
            }
            j.block<3, 3>(3 * k, 0) = -skew(x);
            j.block<3, 3>(3 * k, 3) = Mat3::Identity();
            j.block<3, 1>(3 * k, 6 + k) = dx;
        }
        MatX jtj = j.transpose() * j;
        VecX g = j.transpose() * r;
        bool improved = false;
        for (int tries = 0; tries < 20; ++tries) {
            MatX a = jtj;
            a.diagonal() += lambda * (jtj.diagonal().array() + 1e-9).matrix();
            VecX step = -a.ldlt().solve(g);
            RigidTransform dm;
            dm.rotation = rotation_from_exp(step.head<3>());
            dm.translation = step.segment<3>(3);
            RigidTransform mt = dm * m;
            std::vector<double> qt = qk;
            for (Eigen::Index k = 0; k < mk; ++k) {
                qt[static_cast<std::size_t>(k)] += step[6 + k];
            }
            VecX rt = residual(mt, qt);
            if (rt.norm() < r.norm()) {
                m = mt;
                qk = qt;
                r = rt;
                lambda = std::max(lambda * 0.1, 1e-12);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!improved) {
            break;
        }
    }
    return m;
}

struct ObjectiveTerms {
    double similarity = 0.0;
    double torque_ratio = 0.0;
    double energy = 0.0; // J per cycle
};

struct Residuals {
    double singularity = 0.0; // max(0, ξ − min s(q)) / ξ
    double keypoint = 0.0;    // max key-point error, mm
    double box = 0.0;         // max distance of a traced point outside R, mm
    double nh = 0.0;          // normalized Hausdorff distance to the target
    bool ordered = true;      // key points met in order
};

struct Evaluation {
    bool assemblable = false;
    std::string failure;
    ObjectiveTerms terms;
    Residuals residuals;
    double min_measure = 0.0;
    double max_torque = 0.0; // N·mm
    double objective = 0.0;  // weighted sum of the terms
    double penalty = 0.0;
    double penalized = 0.0;
    bool feasible = false;
};

inline constexpr double kKeyPointTol = 1e-3; // mm
inline constexpr double kUnassemblable = 1e6;

/// Objective terms, constraint residuals, and quadratic exterior penalty of a
/// design. Never throws on a non-assemblable design; it is reported with a
/// large finite penalized value instead.
inline Evaluation evaluate(const BennettDesign& design, const DesignProblem& problem, const TargetCache& cache)
{
    Evaluation ev;
    try {
        design.validate();
        BennettKinematics kin(design);

        // Path samples starting at the point nearest the target's first sample.
        dynamics::ArcTable table(kin, kin.reference().theta[0], problem.path_samples);
        std::vector<Vec3> pts(table.points().begin(), table.points().end() - 1);
        DiscreteCurve3 path = detail::rotated_curve(pts, detail::nearest_index(pts, problem.target.points.front()));
        DiscreteCurve3 metric = curve::resample_arclength(path, problem.metric_samples);
        ev.terms.similarity = curve::signature_distance(curve::curvature_signature(metric), cache.signature);
        ev.residuals.nh = curve::normalized_polyline_hausdorff(problem.target, path);

        auto ks = dynamics::keypoint_schedule_lenient(kin, problem.keypoints, problem.period, problem.dynamics_samples,
                                                      720);
        ev.residuals.ordered = ks.ordered;
        auto prof = dynamics::energy_profile(kin, ks.schedule, problem.load);
        ev.terms.energy = prof.energy;
        ev.max_torque = prof.max_torque;
        ev.terms.torque_ratio = prof.max_torque / problem.stall_torque;

        // Key-point errors at their scheduled times.
        for (std::size_t k = 0; k < problem.keypoints.points.size(); ++k) {
            const auto& kp = problem.keypoints.points[k];
            double t = kp.fraction * problem.period;
            for (const auto& s : ks.schedule.samples) {
                if (std::abs(s.t - t) <= 1e-9 * problem.period) {
                    ev.residuals.keypoint = std::max(ev.residuals.keypoint, (kin.fk(s.q).ee - kp.point).norm());
                    break;
                }
            }
        }

        // Singularity measure and box containment over the schedule frames.
        ev.min_measure = std::numeric_limits<double>::infinity();
        double guess = kin.reference().theta[1];
        for (std::size_t i = 0; i < ks.schedule.size(); ++i) {
            const auto& e = prof.samples[i];
            ev.min_measure = std::min(ev.min_measure, e.measure);
            auto s = kin.solve(e.q, guess);
            guess = s.theta[1];
            auto motions = kin.world_link_motions(s);
            const auto& jp = kin.joint_points();
            // Joints 1 and 4 sit on the base; joint 2 rides the crank, joint 3 the coupler.
            std::array<Vec3, 5> world = {design.mount.apply(jp[0]), motions[0].apply(design.mount.apply(jp[1])),
                                         motions[1].apply(design.mount.apply(jp[2])),
                                         design.mount.apply(jp[3]),
                                         design.mount.apply(kin.coupler(s).apply(design.p0))};
            for (const auto& p : world) {
                Vec3 out = (problem.box.min - p).cwiseMax(p - problem.box.max).cwiseMax(0.0);
                ev.residuals.box = std::max(ev.residuals.box, out.norm());
            }
        }
        ev.residuals.singularity =
            problem.sing_tol > 0.0 ? std::max(0.0, problem.sing_tol - ev.min_measure) / problem.sing_tol : 0.0;
        ev.assemblable = true;
    } catch (const Error& e) {
        ev.assemblable = false;
        ev.failure = e.what();
        ev.penalized = kUnassemblable;
        return ev;
    }

    const auto& w = problem.weights;
    ev.objective = w.similarity * ev.terms.similarity + w.torque * ev.terms.torque_ratio + w.energy * ev.terms.energy;
    double rk = std::max(0.0, ev.residuals.keypoint - kKeyPointTol) / (0.01 * cache.diagonal);
    double rb = ev.residuals.box / cache.diagonal;
    double rn = std::max(0.0, ev.residuals.nh - problem.nh_tol) / problem.nh_tol;
    double ro = ev.residuals.ordered ? 0.0 : 1.0;
    ev.penalty = problem.penalty * (ev.residuals.singularity * ev.residuals.singularity + rk * rk + rb * rb + rn * rn + ro);
    ev.penalized = ev.objective + ev.penalty;
    ev.feasible = ev.residuals.singularity == 0.0 && ev.residuals.keypoint <= kKeyPointTol && ev.residuals.box <= 0.0 &&
                  ev.residuals.nh <= problem.nh_tol && ev.residuals.ordered;
    return ev;
}

inline Evaluation evaluate(const BennettDesign& design, const DesignProblem& problem)
{
    return evaluate(design, problem, TargetCache(problem));
}

} // namespace overlinkd::synth
