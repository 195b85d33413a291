#pragma once

#include "overlinkd/core/schedule.hpp"
#include "overlinkd/kinematics/bennett.hpp"
#include "overlinkd/kinematics/line.hpp"

#include <array>
#include <optional>
#include <vector>

namespace overlinkd::kinematics {

/// Actuator angle θ1 of the reference (assembly) configuration.
inline constexpr double kReferenceTheta1 = kPi / 2.0;

/// Kinematic design: Bennett parameters, end-effector point p0 on the coupler
/// (local frame, reference pose) and the mount carrying local coordinates to
/// world coordinates.
struct BennettDesign {
    BennettParams params;
    Vec3 p0 = Vec3::Zero();
    RigidTransform mount;

    void validate() const
    {
        params.validate();
        require(p0.allFinite(), "BennettDesign: p0 must be finite");
        require(mount.is_valid(), "BennettDesign: mount must be a proper rigid transform");
    }
};

/// Link numbering: 0 = L12 (crank), 1 = L23 (coupler), 2 = L34, 3 = L41 (base).
inline constexpr std::size_t kCrankLink = 0;
inline constexpr std::size_t kCouplerLink = 1;
inline constexpr std::size_t kBaseLink = 3;

struct FkResult {
    LoopAngles angles;
    RigidTransform coupler; // local displacement of L23 from the reference pose
    Vec3 ee = Vec3::Zero(); // world
};

struct JacobianResult {
    Vec6 twist = Vec6::Zero(); // world-frame coupler twist per unit q̇, (ω, v)
    Vec3 linear = Vec3::Zero(); // world-frame ee velocity per unit q̇, mm/rad
    double dtheta2 = 0.0;
};

/// Per-frame kinematic state over one actuation cycle. Link poses are world
/// displacements from the reference pose, ordered as the link numbering.
struct MotionTrace {
    std::vector<double> times;
    std::vector<double> q;
    std::vector<double> theta2;
    std::vector<std::array<RigidTransform, 4>> link_poses;
    std::vector<Vec3> ee_points;
    std::vector<double> closure_residuals;

    std::size_t size() const noexcept { return q.size(); }
};

/// Reference configuration and screw axes of a design. Construction solves
/// the loop at θ1 = kReferenceTheta1, which fixes the assembly branch.
class BennettKinematics {
public:
    explicit BennettKinematics(BennettDesign design)
        : design_(std::move(design))
    {
        design_.validate();
        const BennettParams& p = design_.params;
        reference_ = solve_bennett_closure(p, kReferenceTheta1);
        RigidTransform b2 = joint_step(reference_.theta[0], p.a, p.alpha);
        RigidTransform b3 = b2 * joint_step(reference_.theta[1], p.b, p.beta);
        RigidTransform g4 = detail::bennett_base_frame(p);
        joint_points_ = {Vec3::Zero(), b2.translation, b3.translation, g4.translation};
        std::array<Vec3, 4> dirs = {Vec3::UnitZ(), b2.rotation.col(2), b3.rotation.col(2), g4.rotation.col(2)};
        for (std::size_t j = 0; j < 4; ++j) {
            screws_[j] = ScrewAxis::revolute(joint_points_[j], dirs[j]);
        }
    }

    const BennettDesign& design() const noexcept { return design_; }
    const LoopAngles& reference() const noexcept { return reference_; }
    /// Joint screws at the reference pose, local frame; index j is joint j+1.
    const std::array<ScrewAxis, 4>& screws() const noexcept { return screws_; }
    const std::array<Vec3, 4>& joint_points() const noexcept { return joint_points_; }

    LoopAngles solve(double q, std::optional<double> guess = std::nullopt) const
    {
        return solve_bennett_closure(design_.params, q, guess.value_or(reference_.theta[1]));
    }

    /// Coupler displacement along the chain R1 -> R2.
    RigidTransform coupler(const LoopAngles& s) const
    {
        return screw_exp(screws_[0], s.theta[0] - reference_.theta[0]) *
               screw_exp(screws_[1], s.theta[1] - reference_.theta[1]);
    }

    /// Coupler displacement along the chain R4 -> R3 through the base.
    RigidTransform coupler_via_base(const LoopAngles& s) const
    {
        return screw_exp(screws_[3], -wrap_pi(s.theta[3] - reference_.theta[3])) *
               screw_exp(screws_[2], -wrap_pi(s.theta[2] - reference_.theta[2]));
    }

    /// Local displacements of the four links.
    std::array<RigidTransform, 4> link_motions(const LoopAngles& s) const
    {
        return {screw_exp(screws_[0], s.theta[0] - reference_.theta[0]), coupler(s),
                screw_exp(screws_[3], -wrap_pi(s.theta[3] - reference_.theta[3])), RigidTransform::identity()};
    }

    /// World displacements of the four links (mount · local · mount⁻¹).
    std::array<RigidTransform, 4> world_link_motions(const LoopAngles& s) const
    {
        auto local = link_motions(s);
        RigidTransform minv = design_.mount.inverse();
        for (auto& m : local) {
            m = design_.mount * m * minv;
        }
        return local;
    }

    FkResult fk(double q, std::optional<double> guess = std::nullopt) const
    {
        FkResult r;
        r.angles = solve(q, guess);
        r.coupler = coupler(r.angles);
        r.ee = design_.mount.apply(r.coupler.apply(design_.p0));
        return r;
    }

    /// dθ2/dq by a central difference at h, refined with a step-halved
    /// estimate; inconsistent estimates indicate a branch singularity.
    double dtheta2(double q, double theta2) const
    {
        auto central = [&](double h) {
            double up = solve_bennett_closure(design_.params, q + h, theta2).theta[1];
            double dn = solve_bennett_closure(design_.params, q - h, theta2).theta[1];
            return (up - dn) / (2.0 * h);
        };
        constexpr double h = 1e-6;
        double d1 = central(h);
        double d2 = central(h / 2.0);
        if (!std::isfinite(d1) || !std::isfinite(d2) || std::abs(d1 - d2) > 1e-5 * std::max(1.0, std::abs(d2)) ||
            std::abs(d2) > 1e8) {
            throw SingularityError("closure map is not differentiable at q = " + std::to_string(q));
        }
        return (4.0 * d2 - d1) / 3.0;
    }

    JacobianResult jacobian(double q, std::optional<double> guess = std::nullopt) const
    {
        LoopAngles s = solve(q, guess);
        JacobianResult j;
        j.dtheta2 = dtheta2(q, s.theta[1]);
        RigidTransform e1 = screw_exp(screws_[0], s.theta[0] - reference_.theta[0]);
        Vec6 local = screws_[0].twist() + adjoint(e1) * screws_[1].twist() * j.dtheta2;
        j.twist = adjoint(design_.mount) * local;
        Vec3 p_local = coupler(s).apply(design_.p0);
        Vec3 w = local.head<3>(), v = local.tail<3>();
        j.linear = design_.mount.rotation * (w.cross(p_local) + v);
        return j;
    }

    /// ‖J_a‖ in mm/rad; zero at branch singularities.
    double singularity_measure(double q, std::optional<double> guess = std::nullopt) const
    {
        try {
            return jacobian(q, guess).linear.norm();
        } catch (const SingularityError&) {
            return 0.0;
        }
    }

    /// Joint axes and joint centres in world coordinates at the reference pose.
    LinkageTopology topology() const
    {
        LinkageTopology t;
        for (std::size_t j = 0; j < 4; ++j) {
            t.axes.push_back(AxisLine{joint_points_[j], screws_[j].direction}.transformed(design_.mount));
            t.joint_points.push_back(design_.mount.apply(joint_points_[j]));
        }
        return t;
    }

    /// World link displacements at n actuator angles uniform over one turn,
    /// starting at the reference and without repeating it.
    FrameSet periodic_frames(std::size_t n) const
    {
        require(n >= 1, "periodic_frames: need at least one frame");
        FrameSet frames(n);
        double guess = reference_.theta[1];
        for (std::size_t i = 0; i < n; ++i) {
            double q = reference_.theta[0] + kTwoPi * static_cast<double>(i) / static_cast<double>(n);
            LoopAngles s = solve(q, guess);
            guess = s.theta[1];
            auto m = world_link_motions(s);
            frames[i].assign(m.begin(), m.end());
        }
        return frames;
    }

    /// Trace over a schedule with warm starts carried from frame to frame.
    MotionTrace trace(const ActuationSchedule& schedule) const
    {
        require(!schedule.samples.empty(), "trace: empty schedule");
        MotionTrace out;
        double guess = reference_.theta[1];
        const std::size_t n = schedule.samples.size();
        out.times.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& smp = schedule.samples[i];
            LoopAngles s;
            try {
                s = solve(smp.q, guess);
            } catch (const AssemblyError& e) {
                throw AssemblyError("trace: frame " + std::to_string(i) + ": " + e.what(), e.angle());
            }
            guess = s.theta[1];
            out.times.push_back(smp.t);
            out.q.push_back(smp.q);
            out.theta2.push_back(s.theta[1]);
            out.link_poses.push_back(world_link_motions(s));
            out.ee_points.push_back(design_.mount.apply(coupler(s).apply(design_.p0)));
            out.closure_residuals.push_back(s.residual);
        }
        return out;
    }

    /// ee points at n actuator angles uniform over one turn (closed curve
    /// samples, no repeated endpoint).
    std::vector<Vec3> cycle_points(std::size_t n) const
    {
        std::vector<Vec3> pts;
        pts.reserve(n);
        double guess = reference_.theta[1];
        for (std::size_t i = 0; i < n; ++i) {
            double q = reference_.theta[0] + kTwoPi * static_cast<double>(i) / static_cast<double>(n);
            LoopAngles s = solve(q, guess);
            guess = s.theta[1];
            pts.push_back(design_.mount.apply(coupler(s).apply(design_.p0)));
        }
        return pts;
    }

private:
    BennettDesign design_;
    LoopAngles reference_;
    std::array<ScrewAxis, 4> screws_;
    std::array<Vec3, 4> joint_points_;
};

inline FkResult fk(const BennettDesign& d, double q) { return BennettKinematics(d).fk(q); }

inline MotionTrace trace(const BennettDesign& d, const ActuationSchedule& s) { return BennettKinematics(d).trace(s); }

inline JacobianResult jacobian(const BennettDesign& d, double q) { return BennettKinematics(d).jacobian(q); }

inline double singularity_measure(const BennettDesign& d, double q) { return BennettKinematics(d).singularity_measure(q); }

} // namespace overlinkd::kinematics
