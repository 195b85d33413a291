#pragma once

#include "overlinkd/geometry/energy.hpp"

#include <sstream>

namespace overlinkd::geometry {

struct GeomConstraintParams {
    double length_slack = 1.3;   // ξ_L
    double curvature_cap = 0.6;  // κ_u
    double axis_tol = 0.01;      // ξ_c, mm

    void validate() const
    {
        require(length_slack >= 1.0, "GeomConstraintParams: length slack must be at least 1");
        require(curvature_cap > 0.0, "GeomConstraintParams: curvature cap must be positive");
        require(axis_tol > 0.0, "GeomConstraintParams: axis tolerance must be positive");
    }
};

/// Acceptance tolerances for the equality constraints.
struct GeomTolerances {
    double joint_distance = 1e-6;  // mm
    double perpendicular = 1e-6;   // |cos| of segment against axis
    double length = 1e-9;          // relative
    double curvature = 1e-9;
};

/// Discrete curvature 2 (a × b) / (|a||b| + a·b) magnitude at the vertex
/// between edges a and b, and its gradients with respect to a and b.
struct VertexCurvature {
    double value = 0.0;
    Vec3 da = Vec3::Zero(), db = Vec3::Zero();
};

inline VertexCurvature vertex_curvature(const Vec3& a, const Vec3& b)
{
    VertexCurvature k;
    Vec3 c = a.cross(b);
    double cn = c.norm();
    double na = a.norm(), nb = b.norm();
    double den = na * nb + a.dot(b);
    if (den <= 1e-300) {
        k.value = std::numeric_limits<double>::infinity();  // full reversal
        return k;
    }
    k.value = 2.0 * cn / den;
    if (cn > 0.0) {
        Vec3 ch = c / cn;
        Vec3 dcn_da = b.cross(ch), dcn_db = ch.cross(a);
        Vec3 dden_da = (nb / na) * a + b, dden_db = (na / nb) * b + a;
        k.da = 2.0 * dcn_da / den - k.value / den * dden_da;
        k.db = 2.0 * dcn_db / den - k.value / den * dden_db;
    }
    return k;
}

/// Per-family worst residuals of a geometry, recomputed from scratch.
struct ConstraintReport {
    double energy = 0.0;
    double energy_threshold = 0.0;
    std::vector<double> length_ratio;      // L_k / L_k0
    double length_violation = 0.0;         // worst relative excursion outside [1, ξ_L]
    double max_curvature = 0.0;
    double axis_distance = 0.0;            // mm
    double joint_distance_error = 0.0;     // mm
    double perpendicularity = 0.0;         // |cos|
    bool energy_ok = false, length_ok = false, curvature_ok = false, axis_ok = false, joint_ok = false,
         perpendicular_ok = false;

    bool feasible() const { return energy_ok && length_ok && curvature_ok && axis_ok && joint_ok && perpendicular_ok; }

    std::string summary() const
    {
        std::ostringstream s;
        s << "energy " << energy << (energy_ok ? "" : " (over)") << ", length " << length_violation
          << (length_ok ? "" : " (over)") << ", curvature " << max_curvature << (curvature_ok ? "" : " (over)")
          << ", axis " << axis_distance << (axis_ok ? "" : " (over)") << ", joint " << joint_distance_error
          << (joint_ok ? "" : " (over)") << ", perpendicular " << perpendicularity
          << (perpendicular_ok ? "" : " (over)");
        return s.str();
    }
};

inline double axis_distance(const AxisLine& axis, const Vec3& p) { return axis.distance(p); }

/// Constraint report with the collision energy supplied by the caller.
inline ConstraintReport check_constraints(const GeometryDesign& g, double energy, const CollisionModel& model,
                                          const GeomConstraintParams& params, const GeomTolerances& tol = {})
{
    g.validate();
    const std::size_t n = g.link_count();
    ConstraintReport r;
    r.energy = energy;
    r.energy_threshold = model.threshold;
    r.energy_ok = r.energy < model.threshold;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& pts = g.chains[k].particles;
        double l0 = g.topology.nominal_length(k);
        double ratio = g.chains[k].length() / l0;
        r.length_ratio.push_back(ratio);
        r.length_violation = std::max({r.length_violation, 1.0 - ratio, ratio - params.length_slack});
        for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
            r.max_curvature = std::max(r.max_curvature, vertex_curvature(pts[i] - pts[i - 1], pts[i + 1] - pts[i]).value);
        }
        const AxisLine& start = g.topology.axes[k];
        const AxisLine& end = g.topology.axes[(k + 1) % n];
        r.axis_distance = std::max({r.axis_distance, start.distance(pts.front()), end.distance(pts.back())});
        Vec3 e0 = (pts[1] - pts[0]).normalized();
        Vec3 e1 = (pts[pts.size() - 1] - pts[pts.size() - 2]).normalized();
        r.perpendicularity =
            std::max({r.perpendicularity, std::abs(e0.dot(start.direction)), std::abs(e1.dot(end.direction))});
    }
    for (std::size_t j = 0; j < n; ++j) {
        r.joint_distance_error =
            std::max(r.joint_distance_error, std::abs((g.joint_end(j) - g.joint_start(j)).norm() - g.joint_distance));
    }
    r.length_ok = r.length_violation <= tol.length;
    r.curvature_ok = r.max_curvature <= params.curvature_cap + tol.curvature;
    r.axis_ok = r.axis_distance < params.axis_tol;
    r.joint_ok = r.joint_distance_error <= tol.joint_distance;
    r.perpendicular_ok = r.perpendicularity <= tol.perpendicular;
    return r;
}

inline ConstraintReport check_constraints(const GeometryDesign& g, const CollisionModel& model,
                                          const GeomConstraintParams& params, const GeomTolerances& tol = {},
                                          double margin = 0.0)
{
    return check_constraints(g, total_energy(g, model, margin), model, params, tol);
}

} // namespace overlinkd::geometry
