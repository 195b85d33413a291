#pragma once

#include "overlinkd/synth/problem.hpp"

#include <random>

namespace overlinkd::synth {

/// Random Bennett design with a well-conditioned twist ratio and distinct
/// link lengths.
inline BennettDesign random_bennett_design(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> len(50, 180), tw(0.3, kPi - 0.3), u(-1, 1);
    for (;;) {
        double a = len(rng), b = len(rng), al = tw(rng);
        double s = b * std::sin(al) / a;
        if (std::abs(s) > 0.95 || std::abs(a - b) < 10) {
            continue;
        }
        BennettDesign d;
        d.params = BennettParams::from_lengths(a, b, al);
        d.p0 = Vec3(u(rng), u(rng), u(rng)) * 100;
        d.mount.rotation = rotation_from_exp(Vec3(u(rng), u(rng), u(rng)) * 2);
        d.mount.translation = Vec3(u(rng), u(rng), u(rng)) * 50;
        return d;
    }
}

/// Problem around a closed target: one key point at its first sample, the
/// box grown by `margin` mm on every side, default bounds, no load.
inline DesignProblem open_problem(const DiscreteCurve3& target, double margin)
{
    DesignProblem p;
    p.target = target;
    p.keypoints.points = {{target.points.front(), 1.0}};
    auto bb = curve::bounding_box(target.points);
    p.box = bb;
    p.box.min -= Vec3::Constant(margin);
    p.box.max += Vec3::Constant(margin);
    p.bounds = default_bounds(bb);
    return p;
}

/// Path of a hidden random design (400 samples starting 0.37 rad past the
/// reference crank angle), similarity-only weights.
inline DesignProblem recovery_problem(std::uint64_t hidden_seed, BennettDesign* hidden = nullptr)
{
    std::mt19937_64 rng(hidden_seed);
    BennettDesign d = random_bennett_design(rng);
    if (hidden != nullptr) {
        *hidden = d;
    }
    BennettKinematics kin(d);
    auto tr = kin.trace(constant_speed_schedule(1.0, 401, kin.reference().theta[0] + 0.37));
    tr.ee_points.pop_back();
    DesignProblem p = open_problem({tr.ee_points, true}, 500.0);
    p.weights = {10.0, 0.0, 0.0};
    return p;
}

/// Ellipse with semi-axes a along x and b along z, warped by w·sin 2t along y
/// and skewed vertically by 0.3·b·cos 2t; 400 samples.
inline DiscreteCurve3 warped_ellipse(double a = 60.0, double b = 35.0, double w = 12.0)
{
    DiscreteCurve3 c;
    for (int i = 0; i < 400; ++i) {
        double t = kTwoPi * i / 400.0;
        c.points.emplace_back(a * std::cos(t), w * std::sin(2 * t), b * std::sin(t) + 0.3 * b * std::cos(2 * t));
    }
    return c;
}

/// Warped ellipse under a constant 5 N downward end-effector force.
inline DesignProblem warped_ellipse_problem(bool baseline)
{
    DesignProblem p = open_problem(warped_ellipse(), 300.0);
    p.load = dynamics::LoadProfile::constant(Vec3(0, 0, -5.0));
    if (baseline) {
        p.weights.torque = 0.0;
        p.weights.energy = 0.0;
    }
    return p;
}

} // namespace overlinkd::synth
