#pragma once

#include "overlinkd/kinematics/loop.hpp"
#include "overlinkd/kinematics/motion.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace overlinkd::geometry {

using kinematics::AxisLine;
using kinematics::FrameSet;
using kinematics::LinkageTopology;

inline constexpr std::size_t kJointParticles = 5;
inline constexpr std::size_t kDefaultChainParticles = 20;

/// Particles along one link, from its joint axis k to joint axis k+1.
struct ParticleChain {
    std::vector<Vec3> particles;
    double radius = 3.0;

    std::size_t size() const noexcept { return particles.size(); }

    double length() const
    {
        double s = 0.0;
        for (std::size_t i = 1; i < particles.size(); ++i) {
            s += (particles[i] - particles[i - 1]).norm();
        }
        return s;
    }
};

/// Axes at the reference pose plus a generator of per-frame link motions
/// over one actuator turn.
struct MechanismMotion {
    LinkageTopology topology;
    std::function<FrameSet(std::size_t)> frames;
    std::string name;
};

inline MechanismMotion bennett_motion(const kinematics::BennettDesign& design)
{
    auto kin = std::make_shared<kinematics::BennettKinematics>(design);
    return {kin->topology(), [kin](std::size_t n) { return kin->periodic_frames(n); }, "bennett"};
}

inline MechanismMotion loop_motion(const kinematics::GenericLoop& loop, const RigidTransform& mount = {})
{
    loop.validate();
    LinkageTopology t = kinematics::loop_topology(loop, loop.reference);
    for (auto& a : t.axes) {
        a = a.transformed(mount);
    }
    for (auto& p : t.joint_points) {
        p = mount.apply(p);
    }
    return {t, [loop, mount](std::size_t n) { return kinematics::loop_periodic_frames(loop, n, mount); },
            kinematics::to_string(loop.type)};
}

/// Link chains in reference-pose world coordinates together with the frames
/// they are checked on. Joint j couples the end of link j-1 to the start of
/// link j; its rigid segment is implied by those two particles.
struct GeometryDesign {
    LinkageTopology topology;
    std::vector<ParticleChain> chains;
    double joint_distance = 10.0;  // D_j, shared by all joints
    FrameSet frames;

    std::size_t link_count() const noexcept { return chains.size(); }

    void validate() const
    {
        const std::size_t n = chains.size();
        require(n >= 3 && topology.link_count() == n, "GeometryDesign: one chain per link of the loop");
        require(joint_distance > 0.0, "GeometryDesign: joint distance must be positive");
        for (const auto& c : chains) {
            require(c.size() >= 3, "GeometryDesign: chains need at least three particles");
            require(c.size() == chains.front().size(), "GeometryDesign: all chains need the same particle count");
            require(c.radius > 0.0, "GeometryDesign: particle radius must be positive");
            for (std::size_t i = 1; i < c.size(); ++i) {
                require((c.particles[i] - c.particles[i - 1]).norm() > 0.0,
                        "GeometryDesign: consecutive particles coincide");
            }
        }
        for (const auto& f : frames) {
            require(f.size() == n, "GeometryDesign: every frame needs one transform per link");
        }
    }

    const Vec3& joint_start(std::size_t j) const { return chains[(j + link_count() - 1) % link_count()].particles.back(); }
    const Vec3& joint_end(std::size_t j) const { return chains[j].particles.front(); }

    /// Five evenly spaced particles of the rigid segment of joint j.
    std::vector<Vec3> joint_segment(std::size_t j) const
    {
        std::vector<Vec3> out(kJointParticles);
        for (std::size_t q = 0; q < kJointParticles; ++q) {
            double u = static_cast<double>(q) / static_cast<double>(kJointParticles - 1);
            out[q] = (1.0 - u) * joint_start(j) + u * joint_end(j);
        }
        return out;
    }
};

/// Flat numbering of every particle. Links are bodies 0..n-1, joints are
/// bodies n..2n-1; joint j rides on link j (its points lie on axis j, which
/// both neighbouring links carry).
struct ParticleLayout {
    std::size_t links = 0, per_link = 0;

    std::size_t count() const { return links * (per_link + kJointParticles); }
    std::size_t body(std::size_t i) const
    {
        return i < links * per_link ? i / per_link : links + (i - links * per_link) / kJointParticles;
    }
    std::size_t index_in_body(std::size_t i) const
    {
        return i < links * per_link ? i % per_link : (i - links * per_link) % kJointParticles;
    }
    bool is_joint(std::size_t body_id) const { return body_id >= links; }
    std::size_t motion_link(std::size_t body_id) const { return is_joint(body_id) ? body_id - links : body_id; }
};

inline ParticleLayout layout_of(const GeometryDesign& g) { return {g.link_count(), g.chains.front().size()}; }

/// Every particle position in layout order.
inline std::vector<Vec3> flatten(const GeometryDesign& g)
{
    std::vector<Vec3> out;
    out.reserve(layout_of(g).count());
    for (const auto& c : g.chains) {
        out.insert(out.end(), c.particles.begin(), c.particles.end());
    }
    for (std::size_t j = 0; j < g.link_count(); ++j) {
        auto s = g.joint_segment(j);
        out.insert(out.end(), s.begin(), s.end());
    }
    return out;
}

/// Links a and b share joint j when b = a + 1 (j = b) or a = b + 1 (j = a).
/// Returns npos when they are not neighbours.
inline std::size_t shared_joint(std::size_t a, std::size_t b, std::size_t n)
{
    if ((a + 1) % n == b) {
        return b;
    }
    if ((b + 1) % n == a) {
        return a;
    }
    return static_cast<std::size_t>(-1);
}

/// Whether a particle (or, with `span`, a capsule covering particles
/// [i, i + span]) of link `link` lies within `reach` particles of joint j.
inline bool near_joint(std::size_t link, std::size_t i, std::size_t span, std::size_t j, std::size_t per_link,
                       std::size_t n, std::size_t reach)
{
    if (j == link) {
        return i < reach;  // link starts at its own joint
    }
    if (j == (link + 1) % n) {
        return i + span + reach >= per_link;  // link ends at joint link+1
    }
    return false;
}

/// Pair exclusion shared by the energy and the clearance check: same body,
/// joints against the two links they connect, and the neighbourhood of a
/// joint on its two adjacent links.
inline bool excluded_pair(std::size_t body_a, std::size_t ia, std::size_t body_b, std::size_t ib, std::size_t span,
                          const ParticleLayout& L, std::size_t reach = 3)
{
    if (body_a == body_b) {
        return true;
    }
    const std::size_t n = L.links;
    auto joint_touches = [&](std::size_t joint_body, std::size_t other) {
        std::size_t j = joint_body - n;
        return !L.is_joint(other) && (other == j || other == (j + n - 1) % n);
    };
    if (L.is_joint(body_a) || L.is_joint(body_b)) {
        if (L.is_joint(body_a) && joint_touches(body_a, body_b)) {
            return true;
        }
        return L.is_joint(body_b) && joint_touches(body_b, body_a);
    }
    std::size_t j = shared_joint(body_a, body_b, n);
    if (j == static_cast<std::size_t>(-1)) {
        return false;
    }
    return near_joint(body_a, ia, span, j, L.per_link, n, reach) && near_joint(body_b, ib, span, j, L.per_link, n, reach);
}

} // namespace overlinkd::geometry
