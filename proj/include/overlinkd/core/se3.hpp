#pragma once

#include "overlinkd/core/types.hpp"

#include <Eigen/Geometry>

namespace overlinkd {

/// Proper rigid motion x -> R x + t. Lengths in millimeters.
struct RigidTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static RigidTransform identity() { return {}; }

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
    Vec3 apply_direction(const Vec3& v) const { return rotation * v; }

    RigidTransform operator*(const RigidTransform& rhs) const
    {
        return {rotation * rhs.rotation, rotation * rhs.translation + translation};
    }

    RigidTransform inverse() const
    {
        Mat3 rt = rotation.transpose();
        return {rt, -(rt * translation)};
    }

    Mat4 matrix() const
    {
        Mat4 m = Mat4::Identity();
        m.topLeftCorner<3, 3>() = rotation;
        m.topRightCorner<3, 1>() = translation;
        return m;
    }

    bool is_valid(double tol = 1e-10) const
    {
        if (!rotation.allFinite() || !translation.allFinite()) {
            return false;
        }
        double orth = (rotation.transpose() * rotation - Mat3::Identity()).norm();
        return orth <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
    }
};

inline Mat3 skew(const Vec3& v)
{
    Mat3 s;
    s << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
    return s;
}

inline RigidTransform rot_x(double angle)
{
    return {Eigen::AngleAxisd(angle, Vec3::UnitX()).toRotationMatrix(), Vec3::Zero()};
}

inline RigidTransform rot_z(double angle)
{
    double c = std::cos(angle), s = std::sin(angle);
    Mat3 r;
    r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
    return {r, Vec3::Zero()};
}

inline RigidTransform trans_x(double d) { return {Mat3::Identity(), Vec3(d, 0.0, 0.0)}; }
inline RigidTransform trans_z(double d) { return {Mat3::Identity(), Vec3(0.0, 0.0, d)}; }

/// Rotation from exponential coordinates (axis * angle).
inline Mat3 rotation_from_exp(const Vec3& w)
{
    double angle = w.norm();
    if (angle < 1e-300) {
        return Mat3::Identity();
    }
    return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

/// Exponential coordinates of a rotation, angle in [0, π].
inline Vec3 rotation_log(const Mat3& r)
{
    Eigen::AngleAxisd aa(r);
    return aa.axis() * aa.angle();
}

/// Unit screw of a revolute joint in (ω, v) order, with v = point × direction.
struct ScrewAxis {
    Vec3 direction = Vec3::UnitZ();
    Vec3 moment = Vec3::Zero();

    static ScrewAxis revolute(const Vec3& point, const Vec3& dir)
    {
        Vec3 d = dir.normalized();
        return {d, point.cross(d)};
    }

    Vec6 twist() const
    {
        Vec6 s;
        s << direction, moment;
        return s;
    }

    /// Point on the axis closest to the origin.
    Vec3 point() const { return direction.cross(moment); }
};

/// exp([S] θ) for a unit revolute screw.
inline RigidTransform screw_exp(const ScrewAxis& s, double theta)
{
    Mat3 r = Eigen::AngleAxisd(theta, s.direction).toRotationMatrix();
    Vec3 q = s.point();
    return {r, (Mat3::Identity() - r) * q};
}

/// Adjoint map acting on (ω, v) twists.
inline Mat6 adjoint(const RigidTransform& t)
{
    Mat6 ad = Mat6::Zero();
    ad.topLeftCorner<3, 3>() = t.rotation;
    ad.bottomRightCorner<3, 3>() = t.rotation;
    ad.bottomLeftCorner<3, 3>() = skew(t.translation) * t.rotation;
    return ad;
}

inline ScrewAxis transform_screw(const RigidTransform& t, const ScrewAxis& s)
{
    Vec6 v = adjoint(t) * s.twist();
    return {v.head<3>(), v.tail<3>()};
}

} // namespace overlinkd
