#pragma once

#include "overlinkd/core/se3.hpp"

#include <vector>

namespace overlinkd::kinematics {

/// Revolute joint axis: a point on the line and a unit direction.
struct AxisLine {
    Vec3 point = Vec3::Zero();
    Vec3 direction = Vec3::UnitZ();

    AxisLine transformed(const RigidTransform& t) const { return {t.apply(point), t.apply_direction(direction)}; }

    /// Distance from p to the line.
    double distance(const Vec3& p) const { return (p - point).cross(direction).norm(); }

    Vec3 project(const Vec3& p) const { return point + (p - point).dot(direction) * direction; }
};

/// Joint axes and joint centres of a single loop in its reference pose. Link
/// k runs from joint k to joint k+1 (cyclic); the last link is the base.
struct LinkageTopology {
    std::vector<AxisLine> axes;
    std::vector<Vec3> joint_points;

    std::size_t link_count() const noexcept { return axes.size(); }

    /// Straight-line distance between the two joint centres of link k.
    double nominal_length(std::size_t k) const
    {
        return (joint_points[(k + 1) % joint_points.size()] - joint_points[k]).norm();
    }
};

/// Poses of every link, per frame, relative to the reference pose.
using FrameSet = std::vector<std::vector<RigidTransform>>;

} // namespace overlinkd::kinematics
