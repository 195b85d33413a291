// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance            run everything
//   acceptance AC1 AC6    run a subset
//
// The exit status is non-zero when any selected criterion fails.

#include "overlinkd/overlinkd.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace overlinkd;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

RigidTransform random_rigid(std::mt19937_64& rng, double spread)
{
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
    q.normalize();
    return {q.toRotationMatrix(), Vec3(n(rng), n(rng), n(rng)) * spread};
}

// Smooth closed space curve with random low-order harmonics.
curve::DiscreteCurve3 random_closed_curve(std::mt19937_64& rng, std::size_t n)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::array<double, 7> k{};
    for (auto& v : k) {
        v = u(rng);
    }
    curve::DiscreteCurve3 c;
    for (std::size_t i = 0; i < n; ++i) {
        double t = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
        c.points.emplace_back(3.0 * std::cos(t) + k[0] * std::cos(2 * t) + k[1] * std::sin(3 * t),
                              2.0 * std::sin(t) + k[2] * std::sin(2 * t) + k[3] * std::cos(3 * t),
                              k[4] * std::cos(t) + k[5] * std::sin(2 * t) + k[6]);
    }
    return c;
}

// ----------------------------------------------------------------------- AC1

Outcome ac1()
{
    curve::DiscreteCurve3 a{{Vec3(0, 0, 0), Vec3(192.96, 0, 0), Vec3(192.96, 257.28, 0), Vec3(0, 257.28, 0)}, true};
    curve::DiscreteCurve3 b = a;
    b.points[2].z() += 22.5;
    const double nh = curve::normalized_hausdorff(a, b);
    const bool fixture = std::abs(nh - 22.5 / 321.6) <= 1e-12 && std::floor(nh * 1000.0) / 10.0 == 6.9;

    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> scale(0.2, 5.0);
    std::uniform_int_distribution<int> shift(0, 63);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        auto c = random_closed_curve(rng, 64);
        RigidTransform t = random_rigid(rng, 100.0);
        double sc = scale(rng);
        auto sh = static_cast<std::size_t>(shift(rng));
        curve::DiscreteCurve3 d;
        for (std::size_t i = 0; i < c.size(); ++i) {
            d.points.push_back(sc * t.apply(c[(i + sh) % c.size()]));
        }
        worst = std::max({worst, curve::similarity(c, d), curve::similarity(d, c)});
    }
    return {fixture && worst <= 1e-9, "nh=" + fmt("%.6f", nh) + " worst_invariance=" + fmt("%.3g", worst)};
}

// ----------------------------------------------------------------------- AC2

Outcome ac2()
{
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> qd(0.0, kTwoPi);
    std::vector<kinematics::BennettDesign> designs;
    for (int k = 0; k < 25; ++k) {
        designs.push_back(synth::random_bennett_design(rng));
    }

    double closure = 0.0;
    for (const auto& d : designs) {
        kinematics::BennettKinematics kin(d);
        for (int i = 0; i < 64; ++i) {
            auto s = kin.solve(kTwoPi * i / 64.0);
            closure = std::max(closure, kinematics::bennett_loop_residual(d.params, s.theta));
        }
    }

    double chain = 0.0;
    for (int k = 0; k < 256; ++k) {
        const auto& d = designs[static_cast<std::size_t>(k) % designs.size()];
        kinematics::BennettKinematics kin(d);
        auto s = kin.solve(qd(rng));
        chain = std::max(chain, (kin.coupler(s).apply(d.p0) - kin.coupler_via_base(s).apply(d.p0)).norm());
    }

    double jac = 0.0;
    for (int k = 0; k < 100; ++k) {
        const auto& d = designs[static_cast<std::size_t>(k) % designs.size()];
        kinematics::BennettKinematics kin(d);
        double q = qd(rng);
        auto j = kin.jacobian(q);
        const double h = 1e-5;
        double g = kin.solve(q).theta[1];
        Vec3 fd = (kin.fk(q + h, g).ee - kin.fk(q - h, g).ee) / (2.0 * h);
        jac = std::max(jac, (j.linear - fd).norm() / std::max(fd.norm(), 1e-9));
    }
    return {closure <= 1e-8 && chain <= 1e-8 && jac <= 1e-5,
            "closure=" + fmt("%.3g", closure) + " chain=" + fmt("%.3g", chain) + " jacobian_rel=" + fmt("%.3g", jac)};
}

// ----------------------------------------------------------------------- AC3

Outcome ac3()
{
    geometry::CollisionModel m;
    // 1 / (1 + tanh(5 d + 2)) - 0.5 evaluated in long double.
    auto oracle = [](long double d) { return 1.0L / (1.0L + std::tanh(5.0L * d + 2.0L)) - 0.5L; };
    double table = 0.0;
    for (double d = -1.0; d <= 2.0 + 1e-12; d += 0.125) {
        auto ref = static_cast<double>(oracle(d));
        table = std::max(table, std::abs(geometry::pair_energy(d, m) - ref) / std::max(1.0, std::abs(ref)));
    }
    const bool anchors = std::abs(geometry::pair_energy(-0.4, m) - 0.5) <= 1e-12 &&
                         std::abs(geometry::pair_energy(0.0, m) - 0.00916) <= 5e-6;

    double grad = 0.0;
    const double h = 1e-6;
    for (double d = -1.0; d <= 2.0 + 1e-12; d += 0.01) {
        double fd = (geometry::pair_energy(d + h, m) - geometry::pair_energy(d - h, m)) / (2.0 * h);
        grad = std::max(grad, std::abs(geometry::pair_energy_derivative(d, m) - fd) / std::max(1.0, std::abs(fd)));
    }

    // Directional derivative of the total energy of an inflated Bennett candidate.
    geometry::MechanismMotion motion = geometry::bennett_benchmark();
    geometry::HermiteOptions ho;
    ho.candidates = 8;
    geometry::GeometryDesign g = geometry::hermite_init(motion, 10.0, 3, m, ho).best();
    const double margin = 2.5;
    auto [e, gr] = geometry::energy_gradient(g, m, margin);
    const std::size_t per = g.chains.front().size();
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    double total = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Vec3> v(gr.size());
        double dir = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = Vec3(n(rng), n(rng), n(rng));
            dir += gr[i].dot(v[i]);
        }
        auto shifted = [&](double s) {
            geometry::GeometryDesign t = g;
            for (std::size_t i = 0; i < v.size(); ++i) {
                t.chains[i / per].particles[i % per] += s * v[i];
            }
            return geometry::total_energy(t, m, margin);
        };
        double fd = (shifted(h) - shifted(-h)) / (2.0 * h);
        total = std::max(total, std::abs(dir - fd) / std::max(std::abs(fd), 1e-6));
    }
    return {table <= 1e-9 && anchors && grad <= 1e-6 && e > 1e-3 && total <= 1e-4,
            "table=" + fmt("%.3g", table) + " derivative=" + fmt("%.3g", grad) + " total_gradient_rel=" +
                fmt("%.3g", total)};
}

// ----------------------------------------------------------------------- AC4

Outcome ac4()
{
    const synth::DesignProblem p = synth::recovery_problem(7);
    int good = 0;
    std::ostringstream os;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto r = synth::optimize(p, seed, 200);
        bool ok = r.feasible && r.objective_terms.similarity <= 0.02 && r.nh <= 0.10;
        good += ok ? 1 : 0;
        os << (seed > 1 ? " " : "") << "s" << seed << "=" << fmt("%.4f", r.objective_terms.similarity) << "/"
           << fmt("%.3f", r.nh);
    }
    os << " recovered=" << good << "/5";
    return {good >= 4, os.str()};
}

// ----------------------------------------------------------------------- AC5

Outcome ac5()
{
    const synth::DesignProblem full = synth::warped_ellipse_problem(false);
    const synth::DesignProblem base = synth::warped_ellipse_problem(true);
    std::vector<double> reductions;
    std::ostringstream os;
    bool feasible = true;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto rb = synth::optimize(base, seed, 200);
        auto rf = synth::optimize(full, seed, 200);
        feasible = feasible && rb.feasible && rf.feasible;
        double red = 1.0 - rf.objective_terms.energy / rb.objective_terms.energy;
        reductions.push_back(red);
        os << "s" << seed << "=" << fmt("%.1f%%", 100.0 * red) << " ";
    }
    std::vector<double> sorted = reductions;
    std::sort(sorted.begin(), sorted.end());
    double median = sorted[2];
    os << "median=" << fmt("%.1f%%", 100.0 * median);
    return {feasible && median >= 0.10, os.str()};
}

// ----------------------------------------------------------------------- AC6

Outcome ac6()
{
    bool all = true;
    std::ostringstream os;
    for (const auto& motion : geometry::benchmark_motions()) {
        geometry::GeomoptOptions opt;
        auto r = geometry::geomopt(motion, opt);
        auto dense = geometry::brute_force_clearance(r.geometry, motion, 10 * opt.model.frame_count);
        bool ok = r.verified && r.report.feasible() && r.iterations <= 1500 && dense.min_clearance >= -0.01;
        all = all && ok;
        os << motion.name << "=" << (ok ? "ok" : "fail") << "(clear " << fmt("%.2f", dense.min_clearance) << ", it "
           << r.iterations << ") ";
    }
    return {all, os.str()};
}

// ----------------------------------------------------------------------- AC7

Outcome ac7()
{
    const double cot = dynamics::cost_of_transport(65.99, 2.3, 0.9);
    const double direct = 65.99 / (2.3 * 9.81 * 0.9);

    // Simulated energy under a constant downward force against force times
    // the total variation of the end-effector height.
    kinematics::BennettDesign d;
    d.params = kinematics::BennettParams::from_lengths(100.0, 80.0, 1.0);
    d.p0 = Vec3(40.0, 90.0, 30.0);
    kinematics::BennettKinematics kin(d);
    auto pts = kin.cycle_points(20000);
    double tv = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        tv += std::abs(pts[(i + 1) % pts.size()].z() - pts[i].z());
    }
    double expected = 5.0 * tv * 1e-3;
    double e = dynamics::cycle_energy(kin, constant_speed_schedule(3.0, 720, kin.reference().theta[0]),
                                      dynamics::LoadProfile::constant(Vec3(0, 0, -5.0)));
    double sim_cot = dynamics::cost_of_transport(e, 2.3, 0.9);
    bool ok = std::abs(cot - 3.25) <= 0.01 && std::abs(cot - direct) <= 1e-12 &&
              std::abs(e - expected) <= 5e-3 * expected &&
              std::abs(sim_cot - e / (2.3 * 9.81 * 0.9)) <= 1e-12;
    return {ok, "cot=" + fmt("%.4f", cot) + " energy=" + fmt("%.5f", e) + "J expected=" + fmt("%.5f", expected) + "J"};
}

// ----------------------------------------------------------------------- AC8

Outcome ac8()
{
    const synth::DesignProblem p = synth::recovery_problem(7);
    synth::OptimizeOptions one, two;
    one.threads = 1;
    two.threads = 2;
    auto a = synth::optimize(p, 11, 12, one);
    auto b = synth::optimize(p, 11, 12, two);
    bool synth_same = a.parameters == b.parameters && a.history == b.history && a.evaluations == b.evaluations;
    std::string ja = io::dump(io::synth_result_to_json(a)), jb = io::dump(io::synth_result_to_json(b));
    synth_same = synth_same && ja == jb;

    geometry::GeomoptOptions g1, g2;
    g1.threads = 1;
    g2.threads = 2;
    g1.candidates = g2.candidates = 64;
    auto motion = geometry::spherical_benchmark();
    auto ga = geometry::geomopt(motion, g1);
    auto gb = geometry::geomopt(motion, g2);
    bool geo_same = ga.candidate == gb.candidate && ga.iterations == gb.iterations;
    for (std::size_t k = 0; geo_same && k < ga.geometry.link_count(); ++k) {
        geo_same = ga.geometry.chains[k].particles == gb.geometry.chains[k].particles;
    }
    io::MechanismSpec spec{"spherical", {}, {kPi / 6.0, 7.0 * kPi / 18.0, kPi / 3.0, 4.0 * kPi / 9.0}, 100.0};
    geo_same = geo_same && io::dump(io::geometry_to_json(spec, ga.geometry)) ==
                               io::dump(io::geometry_to_json(spec, gb.geometry));
    return {synth_same && geo_same,
            std::string("synth=") + (synth_same ? "identical" : "differs") + " geomopt=" +
                (geo_same ? "identical" : "differs")};
}

} // namespace

int main(int argc, char** argv)
{
    std::setvbuf(stdout, nullptr, _IOLBF, 0);
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4},
        {"AC5", ac5}, {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8},
    };
    std::set<std::string> only(argv + 1, argv + argc);
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        if (!only.empty() && only.count(name) == 0) {
            continue;
        }
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %s %s [%.1fs]\n", name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str(), dt);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
