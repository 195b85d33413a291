// Command-line front end: stage-1 synthesis, stage-2 geometry optimization,
// metrics, dynamics simulation, mesh export and clearance checks.

#include "overlinkd/overlinkd.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

using namespace overlinkd;
using io::Json;

namespace {

constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kFailure = 1, kInputError = 2, kInfeasible = 3 };

Json provenance(const std::string& command, std::optional<std::uint64_t> seed, Json config)
{
    Json j{{"command", command}, {"version", kVersion}};
    j["seed"] = seed ? Json(*seed) : Json(nullptr);
    j["config"] = std::move(config);
    return j;
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

void emit(const Json& j, const std::string& path)
{
    if (path.empty() || path == "-") {
        std::cout << io::dump(j);
    } else {
        io::write_json(path, j);
    }
}

// ----------------------------------------------------------------- synth

struct SynthArgs {
    std::string problem;
    std::uint64_t seed = 1;
    std::size_t budget = 200;
    std::size_t population = 16;
    std::size_t stall = 40;
    std::string out = "result.json";
    std::string trace = "trace.csv";
};

int run_synth(const SynthArgs& a, std::size_t threads)
{
    synth::DesignProblem problem = io::read_problem(a.problem);
    synth::OptimizeOptions opt;
    opt.population = a.population;
    opt.stall_generations = a.stall;
    opt.threads = threads;
    synth::SynthResult r = synth::optimize(problem, a.seed, a.budget, opt);

    Json config{{"problem", a.problem},
                {"budget", a.budget},
                {"population", a.population},
                {"stall_generations", a.stall},
                {"max_population_factor", opt.max_population_factor},
                {"sigma0", opt.sigma0},
                {"trace", a.trace}};
    Json out{{"units", io::dynamics_units()}, {"overlinkd", provenance("synth", a.seed, config)}};
    const Json body = io::synth_result_to_json(r);
    for (auto& [k, v] : body.items()) {
        out[k] = v;
    }

    if (r.found) {
        kinematics::BennettKinematics kin(r.design);
        auto ks = dynamics::keypoint_schedule_lenient(kin, problem.keypoints, problem.period, problem.dynamics_samples);
        io::write_text(a.trace, io::trace_csv(kin.trace(ks.schedule)));
    }
    if (!r.feasible) {
        Json diag{{"error", "infeasible"},
                  {"found", r.found},
                  {"failure", r.evaluation.failure},
                  {"residuals", io::evaluation_to_json(r.evaluation).at("residuals")},
                  {"penalty", r.evaluation.penalty}};
        out["diagnostic"] = diag;
        emit(out, a.out);
        std::cerr << io::dump(diag);
        return kInfeasible;
    }
    emit(out, a.out);
    std::cout << io::dump(Json{{"similarity", r.objective_terms.similarity},
                               {"nh", r.nh},
                               {"energy", r.objective_terms.energy},
                               {"torque_ratio", r.objective_terms.torque_ratio},
                               {"generations", r.generations}});
    return kOk;
}

// --------------------------------------------------------------- geomopt

struct GeomoptArgs {
    std::string design;
    double dj = 10.0;
    std::size_t frames = 120;
    std::size_t candidates = 512;
    std::size_t attempts = 4;
    std::size_t dense_factor = 10;
    std::size_t max_iterations = 1500;
    std::uint64_t seed = 1;
    std::string out = "geometry.json";
    std::string report = "report.json";
};

Json check_report(const io::GeometryFile& f, const geometry::ConstraintReport& rep,
                  const geometry::ClearanceReport& clr, const geometry::GeomConstraintParams& params,
                  double tolerance)
{
    bool clear = clr.min_clearance >= -tolerance;
    std::string worst = io::worst_residual(rep, params);
    if (worst.empty() && !clear) {
        worst = "clearance";
    }
    return Json{{"mechanism", f.mechanism.kind},
                {"feasible", rep.feasible()},
                {"clear", clear},
                {"verified", rep.feasible() && clear},
                {"worst_residual", worst},
                {"min_clearance", finite_or_null(clr.min_clearance)},
                {"clearance_tolerance", tolerance},
                {"clearance", [&] {
                     Json c = io::clearance_to_json(clr, f.geometry.link_count());
                     c["min_clearance"] = finite_or_null(clr.min_clearance);
                     return c;
                 }()},
                {"residuals", io::constraint_report_to_json(rep, params)}};
}

int run_geomopt(const GeomoptArgs& a, std::size_t threads)
{
    io::MechanismSpec spec = io::mechanism_from_json(io::read_json(a.design), a.design);
    require(a.frames >= 1, "--frames must be at least 1");
    geometry::MechanismMotion motion = spec.motion();

    geometry::GeomoptOptions opt;
    opt.joint_distance = a.dj;
    opt.candidates = a.candidates;
    opt.attempts = a.attempts;
    opt.dense_factor = a.dense_factor;
    opt.seed = a.seed;
    opt.model.frame_count = a.frames;
    opt.solver.max_iterations = a.max_iterations;
    opt.threads = threads;
    geometry::GeomoptResult r = geometry::geomopt(motion, opt);

    Json config{{"design", a.design},
                {"D_j", a.dj},
                {"frames", a.frames},
                {"candidates", a.candidates},
                {"attempts", a.attempts},
                {"margins", opt.margins},
                {"dense_factor", a.dense_factor},
                {"max_iterations", a.max_iterations},
                {"collision", {{"alpha", opt.model.alpha}, {"beta", opt.model.beta}, {"offset", opt.model.offset},
                               {"threshold", opt.model.threshold}}},
                {"constraints", {{"length_slack", opt.params.length_slack}, {"curvature_cap", opt.params.curvature_cap},
                                 {"axis_tol", opt.params.axis_tol}}}};
    Json prov = provenance("geomopt", a.seed, config);

    Json geom = io::geometry_to_json(spec, r.geometry);
    geom["overlinkd"] = prov;
    io::write_json(a.out, geom);

    io::GeometryFile f{spec, r.geometry, a.frames};
    geometry::ClearanceReport clr = r.clearance;
    if (clr.frames_checked == 0) {
        // The solver stopped before the dense check; run it for the report.
        clr = geometry::brute_force_clearance(r.geometry, motion, a.dense_factor * a.frames, threads);
    }
    Json rep{{"units", io::geometry_units()}, {"overlinkd", prov}};
    const Json body = check_report(f, r.report, clr, opt.params, opt.clearance_tolerance);
    for (auto& [k, v] : body.items()) {
        rep[k] = v;
    }
    rep["status"] = r.status;
    rep["solver"] = Json{{"iterations", r.iterations},
                         {"total_iterations", r.total_iterations},
                         {"solves", r.solves},
                         {"candidate", r.candidate},
                         {"candidate_energy", r.candidate_energy},
                         {"margin", r.margin}};
    io::write_json(a.report, rep);
    Json brief{{"verified", r.verified},
               {"min_clearance", finite_or_null(clr.min_clearance)},
               {"worst_residual", rep.at("worst_residual")},
               {"iterations", r.iterations}};
    if (!r.verified) {
        std::cerr << io::dump(brief);
        return kInfeasible;
    }
    std::cout << io::dump(brief);
    return kOk;
}

// ----------------------------------------------------------------- check

struct CheckArgs {
    std::string geometry;
    std::string design;
    std::size_t dense_factor = 10;
    std::size_t frames = 0;
    double tolerance = 0.01;
    std::string report;
};

int run_check(const CheckArgs& a, std::size_t threads)
{
    std::optional<io::MechanismSpec> fallback;
    if (!a.design.empty()) {
        fallback = io::mechanism_from_json(io::read_json(a.design), a.design);
    }
    io::GeometryFile f = io::read_geometry(a.geometry, fallback ? &*fallback : nullptr);
    const std::size_t dense = a.frames != 0 ? a.frames : a.dense_factor * f.frames;
    require(dense >= 1, "check: need at least one verification frame");
    geometry::CollisionModel model;
    model.frame_count = f.frames;
    geometry::GeomConstraintParams params;
    geometry::ConstraintReport rep = geometry::check_constraints(f.geometry, model, params);
    geometry::ClearanceReport clr = geometry::brute_force_clearance(f.geometry, f.mechanism.motion(), dense, threads);

    Json config{{"geometry", a.geometry}, {"frames", f.frames}, {"dense_frames", dense}};
    Json out{{"units", io::geometry_units()}, {"overlinkd", provenance("check", std::nullopt, config)}};
    const Json body = check_report(f, rep, clr, params, a.tolerance);
    for (auto& [k, v] : body.items()) {
        out[k] = v;
    }
    if (!a.report.empty()) {
        io::write_json(a.report, out);
    }
    std::cout << io::dump(out);
    return out.at("verified").get<bool>() ? kOk : kInfeasible;
}

// ---------------------------------------------------------------- metric

int run_metric(const std::string& pa, const std::string& pb, const std::string& out)
{
    curve::DiscreteCurve3 a = io::read_curve(pa), b = io::read_curve(pb);
    if (!a.closed || !b.closed) {
        throw io::InputError("metric: both curves must be closed");
    }
    double h = curve::hausdorff(a, b);
    double nh = curve::normalized_hausdorff(a, b);
    Json j{{"units", io::geometry_units()},
           {"overlinkd", provenance("metric", std::nullopt, Json{{"curve_a", pa}, {"curve_b", pb}})},
           {"similarity", curve::similarity(a, b)},
           {"hausdorff", h},
           {"nh", nh},
           {"diagonal", curve::bounding_box(a.points).diagonal()}};
    emit(j, out);
    return kOk;
}

// -------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string design;
    std::string load;
    double period = 3.0;
    std::size_t samples = 120;
    std::string keypoints;
    std::optional<double> mass, distance, energy;
    std::size_t cycles = 1;
    std::string out = "dynamics.csv";
    std::string summary;
};

int run_simulate(const SimulateArgs& a)
{
    io::MechanismSpec spec = io::mechanism_from_json(io::read_json(a.design), a.design);
    if (spec.kind != "bennett") {
        throw io::InputError(a.design + ": simulate needs a Bennett design");
    }
    dynamics::LoadProfile load = io::load_from_json(io::read_json(a.load), a.load);
    if (!(a.period > 0.0) || a.samples < 2) {
        throw io::InputError("simulate: --period must be positive and --samples at least 2");
    }
    kinematics::BennettKinematics kin(spec.bennett);
    ActuationSchedule schedule;
    std::string mode = "constant_speed";
    if (!a.keypoints.empty()) {
        auto kp = io::keypoints_from_json(io::read_json(a.keypoints), a.keypoints);
        schedule = dynamics::keypoint_schedule_lenient(kin, kp, a.period, a.samples).schedule;
        mode = "keypoints";
    } else {
        schedule = constant_speed_schedule(a.period, a.samples, kin.reference().theta[0]);
    }
    dynamics::EnergyProfile prof = dynamics::energy_profile(kin, schedule, load);
    io::write_text(a.out, io::dynamics_csv(prof));

    Json config{{"design", a.design}, {"load", a.load},   {"period", a.period}, {"samples", a.samples},
                {"schedule", mode},    {"cycles", a.cycles}, {"csv", a.out}};
    if (!a.keypoints.empty()) {
        config["keypoints"] = a.keypoints;
    }
    Json s{{"units", io::dynamics_units()},
           {"overlinkd", provenance("simulate", std::nullopt, config)},
           {"cycle_energy", prof.energy},
           {"max_torque", prof.max_torque},
           {"singular_frames", prof.singular_frames},
           {"warnings", prof.singular_frames}};
    if (a.mass || a.distance || a.energy) {
        if (!a.mass || !a.distance) {
            throw io::InputError("simulate: the cost of transport needs both --mass and --distance");
        }
        double e = a.energy ? *a.energy : prof.energy * static_cast<double>(a.cycles);
        s["cot"] = Json{{"energy", e},
                        {"energy_source", a.energy ? "given" : "simulated"},
                        {"mass", *a.mass},
                        {"distance", *a.distance},
                        {"gravity", dynamics::kGravity},
                        {"value", dynamics::cost_of_transport(e, *a.mass, *a.distance)}};
    }
    if (prof.singular_frames > 0) {
        std::cerr << "warning: " << prof.singular_frames << " singular frame(s) flagged in " << a.out << "\n";
    }
    emit(s, a.summary);
    if (!a.summary.empty()) {
        std::cout << io::dump(s);
    }
    return kOk;
}

// ---------------------------------------------------------------- export

struct ExportArgs {
    std::string geometry;
    std::string trace;
    std::string obj = "geometry.obj";
    std::string path;
    std::string design;
};

int run_export(const ExportArgs& a)
{
    std::optional<io::MechanismSpec> fallback;
    if (!a.design.empty()) {
        fallback = io::mechanism_from_json(io::read_json(a.design), a.design);
    }
    io::GeometryFile f = io::read_geometry(a.geometry, fallback ? &*fallback : nullptr);
    io::TriMesh mesh = io::geometry_mesh(f.geometry);
    io::write_text(a.obj, io::obj_text(mesh));
    Json j{{"units", io::geometry_units()},
           {"overlinkd", provenance("export", std::nullopt, Json{{"geometry", a.geometry}, {"obj", a.obj}})},
           {"obj", a.obj},
           {"vertices", mesh.vertices.size()},
           {"faces", mesh.faces.size()},
           {"groups", mesh.groups.size()},
           {"sides", io::kTubeSides}};
    if (!a.trace.empty()) {
        auto pts = io::trace_points(io::read_csv(a.trace));
        if (pts.empty()) {
            throw io::InputError(a.trace + ": trace has no rows");
        }
        std::string path = a.path;
        if (path.empty()) {
            std::filesystem::path p(a.obj);
            path = (p.parent_path() / (p.stem().string() + "_path.obj")).string();
        }
        io::write_text(path, io::obj_polyline(pts, "ee_path", false));
        j["overlinkd"]["config"]["trace"] = a.trace;
        j["path_obj"] = path;
        j["path_points"] = pts.size();
    }
    std::cout << io::dump(j);
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"overlinkd: linkage synthesis and fabrication geometry"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();
    std::size_t threads = 0;
    app.add_option("--threads", threads, "Worker threads (0: all cores; OVERLINKD_THREADS caps it)");

    SynthArgs sa;
    auto* synth_cmd = app.add_subcommand("synth", "Stage 1: optimize a Bennett design for a problem file");
    synth_cmd->add_option("problem", sa.problem, "Problem JSON")->required();
    synth_cmd->add_option("--seed", sa.seed, "Random seed")->capture_default_str();
    synth_cmd->add_option("--budget", sa.budget, "Generation budget across restarts")->capture_default_str();
    synth_cmd->add_option("--population", sa.population, "CMA-ES population")->capture_default_str();
    synth_cmd->add_option("--stall", sa.stall, "Generations without improvement before a restart")->capture_default_str();
    synth_cmd->add_option("-o,--out", sa.out, "Result JSON")->capture_default_str();
    synth_cmd->add_option("--trace", sa.trace, "Traced curve CSV")->capture_default_str();

    GeomoptArgs ga;
    auto* geo_cmd = app.add_subcommand("geomopt", "Stage 2: collision-free link geometry for a design");
    geo_cmd->add_option("design", ga.design, "Design JSON, synth result, or four-bar description")->required();
    geo_cmd->add_option("--dj", ga.dj, "Joint centre distance D_j, mm")->capture_default_str();
    geo_cmd->add_option("--frames", ga.frames, "Enforcement frames per cycle")->capture_default_str();
    geo_cmd->add_option("--candidates", ga.candidates, "Hermite candidates")->capture_default_str();
    geo_cmd->add_option("--attempts", ga.attempts, "Lowest-energy candidates solved per margin")->capture_default_str();
    geo_cmd->add_option("--dense-factor", ga.dense_factor, "Verification frames per enforcement frame")
        ->capture_default_str();
    geo_cmd->add_option("--max-iterations", ga.max_iterations, "Solver iteration cap per solve")->capture_default_str();
    geo_cmd->add_option("--seed", ga.seed, "Random seed")->capture_default_str();
    geo_cmd->add_option("-o,--out", ga.out, "Geometry JSON")->capture_default_str();
    geo_cmd->add_option("--report", ga.report, "Verification report JSON")->capture_default_str();

    std::string ma, mb, mout;
    auto* metric_cmd = app.add_subcommand("metric", "Similarity, Hausdorff distance and NH of two closed curves");
    metric_cmd->add_option("curve_a", ma, "Reference (target) curve JSON")->required();
    metric_cmd->add_option("curve_b", mb, "Compared curve JSON")->required();
    metric_cmd->add_option("-o,--out", mout, "Write the JSON here instead of stdout");

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Quasi-static torque, power and energy over one cycle");
    sim_cmd->add_option("design", sim.design, "Design JSON or synth result")->required();
    sim_cmd->add_option("load", sim.load, "Load JSON")->required();
    sim_cmd->add_option("--period", sim.period, "Cycle period T, s")->capture_default_str();
    sim_cmd->add_option("--samples", sim.samples, "Schedule samples")->capture_default_str();
    sim_cmd->add_option("--keypoints", sim.keypoints, "Key point JSON; default is constant actuator speed");
    sim_cmd->add_option("--mass", sim.mass, "Robot mass for the cost of transport, kg");
    sim_cmd->add_option("--distance", sim.distance, "Distance travelled for the cost of transport, m");
    sim_cmd->add_option("--energy", sim.energy, "Measured energy, J, used instead of the simulated one");
    sim_cmd->add_option("--cycles", sim.cycles, "Cycles covering the distance")->capture_default_str();
    sim_cmd->add_option("-o,--out", sim.out, "Dynamics CSV")->capture_default_str();
    sim_cmd->add_option("--summary", sim.summary, "Summary JSON (also printed)");

    ExportArgs ea;
    auto* exp_cmd = app.add_subcommand("export", "Tube mesh of a geometry as OBJ");
    exp_cmd->add_option("geometry", ea.geometry, "Geometry JSON")->required();
    exp_cmd->add_option("trace", ea.trace, "Trace CSV; its end-effector path is written as a polyline OBJ");
    exp_cmd->add_option("--obj", ea.obj, "Mesh output")->capture_default_str();
    exp_cmd->add_option("--path", ea.path, "Polyline output for the trace (default <obj>_path.obj)");
    exp_cmd->add_option("--design", ea.design, "Mechanism for geometry files that lack one");

    CheckArgs ca;
    auto* check_cmd = app.add_subcommand("check", "Brute-force clearance and constraint check of a geometry");
    check_cmd->add_option("geometry", ca.geometry, "Geometry JSON")->required();
    check_cmd->add_option("--design", ca.design, "Mechanism for geometry files that lack one");
    check_cmd->add_option("--dense-factor", ca.dense_factor, "Verification frames per stored frame")
        ->capture_default_str();
    check_cmd->add_option("--frames", ca.frames, "Verification frames (overrides --dense-factor)");
    check_cmd->add_option("--tolerance", ca.tolerance, "Accepted overlap, mm")->capture_default_str();
    check_cmd->add_option("--report", ca.report, "Also write the report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (*synth_cmd) return run_synth(sa, threads);
        if (*geo_cmd) return run_geomopt(ga, threads);
        if (*metric_cmd) return run_metric(ma, mb, mout);
        if (*sim_cmd) return run_simulate(sim);
        if (*exp_cmd) return run_export(ea);
        if (*check_cmd) return run_check(ca, threads);
    } catch (const io::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kFailure;
}
