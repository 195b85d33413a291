// Regenerates the sample inputs under data/. Usage: make_fixtures <dir>

#include "overlinkd/overlinkd.hpp"

#include <iostream>

using namespace overlinkd;
using io::Json;

int main(int argc, char** argv)
{
    if (argc != 2) {
        std::cerr << "usage: make_fixtures <dir>\n";
        return 2;
    }
    const std::filesystem::path dir = argv[1];

    kinematics::BennettDesign bennett;
    bennett.params = kinematics::BennettParams::from_lengths(100.0, 80.0, 1.0);
    io::write_json(dir / "bennett_benchmark.json", io::design_to_json(bennett));
    io::MechanismSpec planar{"planar", {}, {40.0, 100.0, 80.0, 90.0}, 100.0};
    Json pj = io::mechanism_to_json(planar);
    pj["units"] = io::geometry_units();
    io::write_json(dir / "planar_benchmark.json", pj);
    io::MechanismSpec spherical{"spherical", {}, {kPi / 6.0, 7.0 * kPi / 18.0, kPi / 3.0, 4.0 * kPi / 9.0}, 100.0};
    Json sj = io::mechanism_to_json(spherical);
    sj["units"] = io::geometry_units();
    io::write_json(dir / "spherical_benchmark.json", sj);

    kinematics::BennettDesign sample = bennett;
    sample.p0 = Vec3(40.0, 90.0, 30.0);
    io::write_json(dir / "sample_design.json", io::design_to_json(sample));

    // Rectangle with a 321.6 mm diagonal and the same rectangle with one
    // corner lifted 22.5 mm.
    curve::DiscreteCurve3 rect{{Vec3(0, 0, 0), Vec3(192.96, 0, 0), Vec3(192.96, 257.28, 0), Vec3(0, 257.28, 0)}, true};
    curve::DiscreteCurve3 lifted = rect;
    lifted.points[2].z() += 22.5;
    io::write_json(dir / "nh_target.json", io::curve_to_json(rect));
    io::write_json(dir / "nh_captured.json", io::curve_to_json(lifted));

    io::write_json(dir / "zero_load.json", io::load_to_json(dynamics::LoadProfile::none()));
    io::write_json(dir / "load_5N.json", io::load_to_json(dynamics::LoadProfile::constant(Vec3(0, 0, -5.0))));
    dynamics::LoadProfile stance;
    stance.phases.push_back({0.0, 0.66, {Vec3(0, 0, -5.0), Vec3::Zero()}});
    io::write_json(dir / "stance_load.json", io::load_to_json(stance));

    io::write_json(dir / "recovery_problem.json", io::problem_to_json(synth::recovery_problem(7)));

    io::write_json(dir / "warped_ellipse_problem.json", io::problem_to_json(synth::warped_ellipse_problem(false)));
    io::write_json(dir / "warped_ellipse_baseline.json", io::problem_to_json(synth::warped_ellipse_problem(true)));
    return 0;
}
