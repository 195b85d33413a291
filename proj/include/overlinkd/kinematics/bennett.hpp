#pragma once

#include "overlinkd/kinematics/dh.hpp"

#include <array>
#include <optional>
#include <vector>

namespace overlinkd::kinematics {

/// Bennett 4R loop: links L12 and L34 have length a and twist α, links L23 and
/// L41 have length b and twist β, with sin α / a = sin β / b and zero offsets.
struct BennettParams {
    double a = 100.0;
    double b = 80.0;
    double alpha = kPi / 3.0;
    double beta = 0.0;

    /// β solving b·sin α / a = sin β on the same side of π/2 as α.
    static std::optional<double> derive_beta(double a, double b, double alpha)
    {
        if (!(a > 0.0) || !(b > 0.0)) {
            return std::nullopt;
        }
        double s = b * std::sin(alpha) / a;
        if (!(std::abs(s) <= 1.0)) {
            return std::nullopt;
        }
        double beta = std::asin(s);
        double folded = std::abs(wrap_pi(alpha));
        if (folded > kPi / 2.0) {
            beta = (alpha > 0.0 ? kPi : -kPi) - beta;
        }
        return beta;
    }

    static BennettParams from_lengths(double a, double b, double alpha)
    {
        auto beta = derive_beta(a, b, alpha);
        if (!beta) {
            throw ValidationError("BennettParams: no real twist β for the given a, b, α");
        }
        return {a, b, alpha, *beta};
    }

    double ratio() const { return std::sin(alpha) / a; }

    void validate() const
    {
        require(a > 0.0 && b > 0.0, "BennettParams: link lengths must be positive");
        require(std::isfinite(alpha) && std::isfinite(beta), "BennettParams: twists must be finite");
        require(std::abs(std::sin(alpha) / a - std::sin(beta) / b) <= 1e-9,
                "BennettParams: sin(alpha)/a must equal sin(beta)/b");
    }
};

/// Joint angles of the four revolute joints (DH convention) and the Frobenius
/// closure residual of the assembled loop.
struct LoopAngles {
    std::array<double, 4> theta{};
    double residual = 0.0;
};

namespace detail {

inline RigidTransform bennett_base_frame(const BennettParams& p)
{
    return link_transform(p.b, p.beta).inverse();
}

// Completes θ3, θ4 for a candidate (θ1, θ2) and measures loop closure.
inline LoopAngles complete_loop(const BennettParams& p, double theta1, double theta2)
{
    RigidTransform g4 = bennett_base_frame(p);
    RigidTransform b3 = joint_step(theta1, p.a, p.alpha) * joint_step(theta2, p.b, p.beta);
    Vec3 d = b3.rotation.transpose() * (g4.translation - b3.translation);
    double theta3 = std::atan2(d.y(), d.x());
    RigidTransform b4 = b3 * joint_step(theta3, p.a, p.alpha);
    Mat3 m = b4.rotation.transpose() * g4.rotation;
    double theta4 = std::atan2(m(1, 0), m(0, 0));
    RigidTransform loop = b4 * joint_step(theta4, p.b, p.beta);
    LoopAngles out;
    out.theta = {theta1, theta2, theta3, theta4};
    out.residual = (loop.matrix() - Mat4::Identity()).norm();
    return out;
}

// Closure condition c0 + cc·cos θ2 + cs·sin θ2 = 0.
struct Harmonic {
    double c0, cc, cs;
    double operator()(double t) const { return c0 + cc * std::cos(t) + cs * std::sin(t); }
    double amplitude() const { return std::hypot(cc, cs); }
};

// Joint 3 must lie at distance a from joint 4.
inline Harmonic distance_condition(const BennettParams& p, double theta1)
{
    RigidTransform b2 = joint_step(theta1, p.a, p.alpha);
    Vec3 o4 = bennett_base_frame(p).translation;
    Vec3 w = b2.translation - o4;
    Vec3 x2 = b2.rotation.col(0), y2 = b2.rotation.col(1);
    return {w.squaredNorm() + p.b * p.b - p.a * p.a, 2.0 * p.b * w.dot(x2), 2.0 * p.b * w.dot(y2)};
}

// Axis 3 must make the twist angle α with axis 4.
inline Harmonic angle_condition(const BennettParams& p, double theta1)
{
    RigidTransform b2 = joint_step(theta1, p.a, p.alpha);
    Vec3 z4 = bennett_base_frame(p).rotation.col(2);
    double sb = std::sin(p.beta);
    return {std::cos(p.beta) * b2.rotation.col(2).dot(z4) - std::cos(p.alpha), -sb * b2.rotation.col(1).dot(z4),
            sb * b2.rotation.col(0).dot(z4)};
}

} // namespace detail

/// Solves the loop at actuator angle θ1. Both the distance and the axis
/// angle between joints 3 and 4 are harmonic in θ2; the assembled θ2 is their
/// common root, found as the linear solve for (cos θ2, sin θ2). Where the two
/// conditions become tangent together (the assembly modes meet) the double
/// root is taken directly. The result is accepted only if the whole loop
/// closes. With a guess, θ2 is returned unwrapped next to it.
inline LoopAngles solve_bennett_closure(const BennettParams& p, double theta1, std::optional<double> guess = std::nullopt)
{
    if (!std::isfinite(theta1)) {
        throw AssemblyError("Bennett loop: non-finite actuator angle", theta1);
    }
    detail::Harmonic g1 = detail::distance_condition(p, theta1);
    detail::Harmonic g2 = detail::angle_condition(p, theta1);
    double r1 = g1.amplitude(), r2 = g2.amplitude();
    double det = g1.cc * g2.cs - g1.cs * g2.cc;
    double c = 0.0, s = 0.0;
    if (r1 > 0.0 && r2 > 0.0 && std::abs(det) > 1e-7 * r1 * r2) {
        c = (-g1.c0 * g2.cs + g2.c0 * g1.cs) / det;
        s = (-g1.cc * g2.c0 + g2.cc * g1.c0) / det;
    } else if (r1 > 0.0) {
        c = -g1.c0 * g1.cc / (r1 * r1);
        s = -g1.c0 * g1.cs / (r1 * r1);
    }
    double theta2 = std::atan2(s, c);
    LoopAngles best = detail::complete_loop(p, theta1, theta2);
    if (std::abs(std::hypot(c, s) - 1.0) <= 1e-3 && best.residual > 1e-13 && best.residual < 1e-1) {
        // Near the meeting point of the assembly modes the harmonic solve
        // loses digits; the full loop equations are still regular there.
        std::vector<DHParams> links = {{p.a, p.alpha, 0.0}, {p.b, p.beta, 0.0}, {p.a, p.alpha, 0.0}, {p.b, p.beta, 0.0}};
        std::vector<double> th(best.theta.begin(), best.theta.end());
        best.residual = close_dh_loop(links, th, 20);
        std::copy(th.begin(), th.end(), best.theta.begin());
        theta2 = best.theta[1];
    }
    if (!(best.residual <= kClosureTolerance)) {
        throw AssemblyError("Bennett loop cannot be assembled at theta1 = " + std::to_string(theta1), theta1);
    }
    if (guess) {
        best.theta[1] = *guess + wrap_pi(theta2 - *guess);
    }
    return best;
}

/// θ2 = K(θ1) on the branch selected by the guess.
inline double closure_map(const BennettParams& p, double theta1, std::optional<double> guess = std::nullopt)
{
    return solve_bennett_closure(p, theta1, guess).theta[1];
}

/// Closed-form input-output relation tan(θ1/2)·tan(θ2/2) = sin((β+α)/2) / sin((β−α)/2),
/// with θ3 = −θ1 and θ4 = −θ2. Used to cross-check the numeric closure.
inline double bennett_closed_form_theta2(const BennettParams& p, double theta1)
{
    double den = std::sin((p.beta - p.alpha) / 2.0);
    double num = std::sin((p.beta + p.alpha) / 2.0);
    if (std::abs(den) < 1e-15) {
        return kPi;
    }
    return 2.0 * std::atan2(num / den * std::cos(theta1 / 2.0), std::sin(theta1 / 2.0));
}

/// Frobenius closure residual of a full set of joint angles.
inline double bennett_loop_residual(const BennettParams& p, const std::array<double, 4>& th)
{
    RigidTransform loop = joint_step(th[0], p.a, p.alpha) * joint_step(th[1], p.b, p.beta) *
                          joint_step(th[2], p.a, p.alpha) * joint_step(th[3], p.b, p.beta);
    return (loop.matrix() - Mat4::Identity()).norm();
}

} // namespace overlinkd::kinematics
