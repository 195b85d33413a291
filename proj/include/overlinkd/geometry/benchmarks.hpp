#pragma once

#include "overlinkd/geometry/design.hpp"
#include "overlinkd/kinematics/loop.hpp"

namespace overlinkd::geometry {

/// Reference mechanisms for the geometry stage, in mm.
inline MechanismMotion bennett_benchmark()
{
    kinematics::BennettDesign d;
    d.params = kinematics::BennettParams::from_lengths(100.0, 80.0, 1.0);
    return bennett_motion(d);
}

/// Grashof crank-rocker: crank 40, coupler 100, rocker 80, ground 90.
inline MechanismMotion planar_benchmark() { return loop_motion(kinematics::planar_four_bar(40.0, 100.0, 80.0, 90.0)); }

/// Spherical crank-rocker on a 100 mm sphere; arc lengths in radians.
inline MechanismMotion spherical_benchmark()
{
    return loop_motion(kinematics::spherical_four_bar(kPi / 6.0, 7.0 * kPi / 18.0, kPi / 3.0, 4.0 * kPi / 9.0, 100.0));
}

inline std::vector<MechanismMotion> benchmark_motions()
{
    auto b = bennett_benchmark(), p = planar_benchmark(), s = spherical_benchmark();
    b.name = "bennett";
    p.name = "planar";
    s.name = "spherical";
    return {b, p, s};
}

} // namespace overlinkd::geometry
