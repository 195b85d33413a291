#pragma once

#include "overlinkd/kinematics/dh.hpp"
#include "overlinkd/kinematics/line.hpp"
#include "overlinkd/kinematics/bennett.hpp"

#include <optional>
#include <string>
#include <vector>

namespace overlinkd::kinematics {

enum class LoopType { planar, spherical, bennett, goldberg5r };

inline std::string to_string(LoopType t)
{
    switch (t) {
    case LoopType::planar: return "planar";
    case LoopType::spherical: return "spherical";
    case LoopType::bennett: return "bennett";
    case LoopType::goldberg5r: return "goldberg5r";
    }
    return "unknown";
}

inline LoopType loop_type_from_string(const std::string& s)
{
    if (s == "planar") return LoopType::planar;
    if (s == "spherical") return LoopType::spherical;
    if (s == "bennett") return LoopType::bennett;
    if (s == "goldberg5r") return LoopType::goldberg5r;
    throw ValidationError("unknown loop type '" + s + "'");
}

using DHLink = DHParams;

/// Single nR loop. Joint j is actuated if j == 0; link j carries joint j to
/// joint j+1 with the step Rz(θj)·Tz(dj)·Tx(aj)·Rx(αj), and the product over
/// all joints is the identity when the loop is closed. attach[j] is the
/// position of joint centre j along its axis, measured in the frame of joint j.
struct GenericLoop {
    LoopType type = LoopType::planar;
    std::vector<DHLink> links;
    std::vector<double> attach;
    std::vector<double> reference;

    std::size_t size() const noexcept { return links.size(); }

    void validate() const
    {
        require(links.size() >= 4 && links.size() <= 6, "GenericLoop: 4 to 6 joints supported");
        require(attach.size() == links.size() && reference.size() == links.size(),
                "GenericLoop: attach and reference sizes must match the joint count");
    }
};

/// Frame of joint j (before its rotation) at the given joint angles.
inline std::vector<RigidTransform> loop_joint_frames(const GenericLoop& loop, const std::vector<double>& theta)
{
    std::vector<RigidTransform> frames(loop.size() + 1);
    for (std::size_t j = 0; j < loop.size(); ++j) {
        const DHLink& l = loop.links[j];
        frames[j + 1] = frames[j] * joint_step(theta[j], l.length, l.twist, l.offset);
    }
    return frames;
}

inline double loop_residual(const GenericLoop& loop, const std::vector<double>& theta)
{
    return (loop_joint_frames(loop, theta).back().matrix() - Mat4::Identity()).norm();
}

/// Solves the passive joint angles for actuator angle q by damped
/// Gauss-Newton on the twelve entries of (loop product - I), starting from
/// the guess. Throws ConvergenceError when the residual stays above 1e-8.
inline std::vector<double> generic_closure(const GenericLoop& loop, double q, const std::vector<double>& guess)
{
    loop.validate();
    require(guess.size() == loop.size(), "generic_closure: guess size mismatch");
    std::vector<DHParams> links;
    for (const auto& l : loop.links) {
        links.push_back({l.length, l.twist, l.offset});
    }
    std::vector<double> theta = guess;
    theta[0] = q;
    double res = close_dh_loop(links, theta);
    if (!(res <= kClosureTolerance)) {
        throw ConvergenceError("generic_closure: loop did not close at q = " + std::to_string(q), res);
    }
    return theta;
}

/// Joint centres and axes of a loop at given joint angles, in the loop frame.
inline LinkageTopology loop_topology(const GenericLoop& loop, const std::vector<double>& theta)
{
    auto frames = loop_joint_frames(loop, theta);
    LinkageTopology t;
    for (std::size_t j = 0; j < loop.size(); ++j) {
        const RigidTransform& f = frames[j];
        t.axes.push_back({f.translation, f.rotation.col(2)});
        t.joint_points.push_back(f.apply(Vec3(0.0, 0.0, loop.attach[j])));
    }
    return t;
}

/// Link displacements from the reference pose. Link j rides on the frame of
/// joint j after its rotation; the base link (last) stays fixed.
inline std::vector<RigidTransform> loop_link_motions(const GenericLoop& loop, const std::vector<double>& theta)
{
    auto now = loop_joint_frames(loop, theta);
    auto ref = loop_joint_frames(loop, loop.reference);
    std::vector<RigidTransform> out(loop.size());
    for (std::size_t j = 0; j + 1 < loop.size(); ++j) {
        RigidTransform b = now[j] * rot_z(theta[j]);
        RigidTransform b0 = ref[j] * rot_z(loop.reference[j]);
        out[j] = b * b0.inverse();
    }
    out.back() = RigidTransform::identity();
    return out;
}

/// Link displacements at n actuator angles uniform over one turn, warm
/// started from the reference, placed in the world by `mount`.
inline FrameSet loop_periodic_frames(const GenericLoop& loop, std::size_t n, const RigidTransform& mount = {})
{
    FrameSet frames(n);
    std::vector<double> guess = loop.reference;
    RigidTransform minv = mount.inverse();
    // Sub-steps keep the warm start on the branch for coarse frame counts.
    const std::size_t sub = std::max<std::size_t>(1, (64 + n - 1) / n);
    for (std::size_t i = 0; i < n; ++i) {
        double q = loop.reference[0] + kTwoPi * static_cast<double>(i) / static_cast<double>(n);
        if (i > 0) {
            double q_prev = loop.reference[0] + kTwoPi * static_cast<double>(i - 1) / static_cast<double>(n);
            for (std::size_t s = 1; s <= sub; ++s) {
                double qs = q_prev + (q - q_prev) * static_cast<double>(s) / static_cast<double>(sub);
                guess = generic_closure(loop, qs, guess);
            }
        }
        frames[i] = loop_link_motions(loop, guess);
        for (auto& m : frames[i]) {
            m = mount * m * minv;
        }
    }
    return frames;
}

/// Denavit-Hartenberg loop through the given axes. Each link follows the
/// common normal between consecutive axes; for parallel axes the normal is
/// taken through the joint centre. The result is expressed in the frame of
/// joint 0 with x along the base link, so reference angle 0 is the angle from
/// the base link to link 0. Returns the loop and the transform from the
/// input coordinates to the loop frame.
inline std::pair<GenericLoop, RigidTransform> loop_from_axes(LoopType type, std::vector<AxisLine> axes,
                                                             const std::vector<Vec3>& centres)
{
    const std::size_t n = axes.size();
    require(n >= 4 && n <= 6 && centres.size() == n, "loop_from_axes: 4 to 6 axes with one centre each");
    for (auto& a : axes) {
        a.direction.normalize();
    }
    // Foot P_j of link j on axis j, foot Q_{j+1} on axis j+1, and direction x_j.
    std::vector<Vec3> p(n), q(n), x(n);
    for (std::size_t j = 0; j < n; ++j) {
        const AxisLine& u = axes[j];
        const AxisLine& v = axes[(j + 1) % n];
        Vec3 c = u.direction.cross(v.direction);
        double s = c.norm();
        if (s > 1e-9) {
            Vec3 w0 = u.point - v.point;
            double b = u.direction.dot(v.direction);
            double d = u.direction.dot(w0), e = v.direction.dot(w0);
            double den = 1.0 - b * b;
            double sc = (b * e - d) / den;
            double tc = (e - b * d) / den;
            p[j] = u.point + sc * u.direction;
            q[(j + 1) % n] = v.point + tc * v.direction;
            Vec3 dv = q[(j + 1) % n] - p[j];
            x[j] = dv.norm() > 1e-9 ? Vec3(dv.normalized()) : Vec3(c / s);
        } else {
            p[j] = u.project(centres[j]);
            q[(j + 1) % n] = v.project(p[j]);
            Vec3 dv = q[(j + 1) % n] - p[j];
            require(dv.norm() > 1e-9, "loop_from_axes: coincident axes");
            x[j] = dv.normalized();
        }
    }
    RigidTransform frame0;
    frame0.rotation.col(0) = x[n - 1];
    frame0.rotation.col(2) = axes[0].direction;
    frame0.rotation.col(1) = axes[0].direction.cross(x[n - 1]);
    frame0.translation = q[0];
    RigidTransform to_loop = frame0.inverse();

    GenericLoop loop;
    loop.type = type;
    loop.links.resize(n);
    loop.attach.resize(n);
    loop.reference.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const Vec3& z = axes[j].direction;
        const Vec3& zn = axes[(j + 1) % n].direction;
        const Vec3& xin = x[(j + n - 1) % n];
        loop.reference[j] = std::atan2(xin.cross(x[j]).dot(z), xin.dot(x[j]));
        loop.links[j].offset = (p[j] - q[j]).dot(z);
        loop.links[j].length = (q[(j + 1) % n] - p[j]).dot(x[j]);
        loop.links[j].twist = std::atan2(z.cross(zn).dot(x[j]), z.dot(zn));
        loop.attach[j] = (centres[j] - q[j]).dot(z);
    }
    loop.reference = generic_closure(loop, loop.reference[0], loop.reference);
    return {loop, to_loop};
}

/// Planar four-bar: crank (actuated, joint 0 to 1), coupler, rocker, ground.
/// The crank starts at angle q0 from the ground line; `elbow` picks the branch.
inline GenericLoop planar_four_bar(double crank, double coupler, double rocker, double ground,
                                   double q0 = kPi / 2.0, int elbow = 1)
{
    require(crank > 0 && coupler > 0 && rocker > 0 && ground > 0, "planar_four_bar: lengths must be positive");
    Vec3 a = Vec3::Zero(), d(-ground, 0.0, 0.0);
    Vec3 b = a + crank * Vec3(std::cos(q0), std::sin(q0), 0.0);
    Vec3 bd = d - b;
    double l = bd.norm();
    double x = (coupler * coupler - rocker * rocker + l * l) / (2.0 * l);
    double h2 = coupler * coupler - x * x;
    if (h2 < 0.0) {
        throw AssemblyError("planar_four_bar: cannot assemble at the reference crank angle", q0);
    }
    Vec3 e = bd / l;
    Vec3 perp(-e.y(), e.x(), 0.0);
    Vec3 c = b + x * e + static_cast<double>(elbow) * std::sqrt(h2) * perp;
    std::vector<Vec3> centres = {a, b, c, d};
    std::vector<AxisLine> axes;
    for (const auto& pt : centres) {
        axes.push_back({pt, Vec3::UnitZ()});
    }
    return loop_from_axes(LoopType::planar, axes, centres).first;
}

/// Spherical four-bar with all axes through the origin. Arc angles (rad) of
/// crank, coupler, rocker and ground; joint centres sit at distance `radius`
/// from the centre along each axis.
inline GenericLoop spherical_four_bar(double crank, double coupler, double rocker, double ground, double radius,
                                      double q0 = kPi / 2.0, int branch = 1)
{
    Vec3 z0 = Vec3::UnitZ();
    Vec3 z3(-std::sin(ground), 0.0, std::cos(ground));
    Vec3 z1(std::sin(crank) * std::cos(q0), std::sin(crank) * std::sin(q0), std::cos(crank));
    // z2 satisfies z2·z1 = cos(coupler), z2·z3 = cos(rocker), |z2| = 1.
    Vec3 n = z1.cross(z3);
    double g = z1.dot(z3);
    double c1 = std::cos(coupler), c3 = std::cos(rocker);
    double den = 1.0 - g * g;
    require(den > 1e-12, "spherical_four_bar: crank and ground axes coincide at the reference");
    double u = (c1 - g * c3) / den, v = (c3 - g * c1) / den;
    Vec3 base = u * z1 + v * z3;
    double rest = 1.0 - base.squaredNorm();
    if (rest < 0.0) {
        throw AssemblyError("spherical_four_bar: cannot assemble at the reference crank angle", q0);
    }
    Vec3 z2 = base + static_cast<double>(branch) * std::sqrt(rest) * n.normalized();
    std::vector<Vec3> dirs = {z0, z1, z2, z3};
    std::vector<AxisLine> axes;
    std::vector<Vec3> centres;
    for (const auto& dir : dirs) {
        axes.push_back({Vec3::Zero(), dir});
        centres.push_back(radius * dir);
    }
    return loop_from_axes(LoopType::spherical, axes, centres).first;
}

/// Bennett loop written as a generic loop (same joint numbering).
inline GenericLoop bennett_loop(const BennettParams& p, double theta1)
{
    LoopAngles s = solve_bennett_closure(p, theta1);
    GenericLoop loop;
    loop.type = LoopType::bennett;
    loop.links = {{p.a, p.alpha, 0.0}, {p.b, p.beta, 0.0}, {p.a, p.alpha, 0.0}, {p.b, p.beta, 0.0}};
    loop.attach = {0.0, 0.0, 0.0, 0.0};
    loop.reference.assign(s.theta.begin(), s.theta.end());
    return loop;
}

/// Goldberg 5R from two Bennett loops sharing the base link (b, β): loop A
/// with (a, α) and loop B with (c, γ), both at the same θ1. The shared base is
/// removed and the two links on joint 1 are fused, leaving joints
/// 2, 3, 4, Y, X of which joint 2 is actuated.
inline GenericLoop goldberg_5r(double a, double b, double alpha, double c, double theta1 = kPi / 2.0)
{
    BennettParams pa = BennettParams::from_lengths(a, b, alpha);
    auto gamma = BennettParams::derive_beta(b, c, pa.beta);
    if (!gamma) {
        throw ValidationError("goldberg_5r: no Bennett loop with the shared base for length c");
    }
    BennettParams pb{c, b, *gamma, pa.beta};
    LoopAngles sa = solve_bennett_closure(pa, theta1);
    LoopAngles sb = solve_bennett_closure(pb, theta1);
    auto chain_axes = [](const BennettParams& p, const LoopAngles& s) {
        RigidTransform f2 = joint_step(s.theta[0], p.a, p.alpha);
        RigidTransform f3 = f2 * joint_step(s.theta[1], p.b, p.beta);
        return std::pair<AxisLine, AxisLine>{{f2.translation, f2.rotation.col(2)}, {f3.translation, f3.rotation.col(2)}};
    };
    auto [a2, a3] = chain_axes(pa, sa);
    auto [bx, by] = chain_axes(pb, sb);
    RigidTransform g4 = detail::bennett_base_frame(pa);
    AxisLine a4{g4.translation, g4.rotation.col(2)};
    std::vector<AxisLine> axes = {a2, a3, a4, by, bx};
    std::vector<Vec3> centres = {a2.point, a3.point, a4.point, by.point, bx.point};
    return loop_from_axes(LoopType::goldberg5r, axes, centres).first;
}

} // namespace overlinkd::kinematics
