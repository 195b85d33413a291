#pragma once

#include "overlinkd/curve/bspline.hpp"
#include "overlinkd/geometry/pipeline.hpp"
#include "overlinkd/io/json.hpp"
#include "overlinkd/synth/optimize.hpp"

namespace overlinkd::io {

inline constexpr std::size_t kDefaultBSplineSamples = 200;

// ----------------------------------------------------------------- curves

/// Polyline form {"points", "closed"} or B-spline form {"bspline": {...}}.
/// A B-spline is sampled at `samples` points (field of the bspline object).
inline curve::DiscreteCurve3 curve_from_json(const Json& j, const std::string& what = "curve")
{
    check_units(j, what);
    curve::DiscreteCurve3 c;
    try {
        if (j.contains("bspline")) {
            const Json& b = j.at("bspline");
            curve::BSplineCurve s;
            s.control_points = vec3_list(field(b, "control_points", what + ".bspline"), what + ".bspline.control_points");
            s.degree = static_cast<int>(count_or(b, "degree", 3, what + ".bspline"));
            s.knots = number_list(field(b, "knots", what + ".bspline"), what + ".bspline.knots");
            s.closed = bool_or(b, "closed", bool_or(j, "closed", true, what), what + ".bspline");
            c = curve::sample_bspline(s, count_or(b, "samples", kDefaultBSplineSamples, what + ".bspline"));
        } else {
            c.points = vec3_list(field(j, "points", what), what + ".points");
            c.closed = bool_or(j, "closed", true, what);
        }
        c.validate();
    } catch (const InputError&) {
        throw;
    } catch (const Error& e) {
        throw InputError(what + ": " + e.what());
    }
    return c;
}

inline Json curve_to_json(const curve::DiscreteCurve3& c)
{
    return Json{{"units", geometry_units()}, {"points", to_json(c.points)}, {"closed", c.closed}};
}

inline curve::DiscreteCurve3 read_curve(const std::filesystem::path& p) { return curve_from_json(read_json(p), p.string()); }

// --------------------------------------------------------------- designs

inline Json design_to_json(const kinematics::BennettDesign& d)
{
    return Json{{"units", geometry_units()},
                {"mechanism", "bennett"},
                {"a", d.params.a},
                {"b", d.params.b},
                {"alpha", d.params.alpha},
                {"beta", d.params.beta},
                {"p0", to_json(d.p0)},
                {"mount", to_json(d.mount)}};
}

/// β may be omitted, in which case it is derived from a, b and α.
inline kinematics::BennettDesign design_from_json(const Json& j, const std::string& what = "design")
{
    check_units(j, what);
    kinematics::BennettDesign d;
    double a = number_field(j, "a", what), b = number_field(j, "b", what), alpha = number_field(j, "alpha", what);
    if (j.contains("beta")) {
        d.params = {a, b, alpha, number(j.at("beta"), what + ".beta")};
        // Printed twists carry finite digits; snap β onto the Bennett
        // condition when it is consistent to 1e-9.
        auto derived = kinematics::BennettParams::derive_beta(a, b, alpha);
        if (derived && std::abs(*derived - d.params.beta) <= 1e-9) {
            d.params.beta = *derived;
        }
    } else {
        auto beta = kinematics::BennettParams::derive_beta(a, b, alpha);
        if (!beta) {
            throw InputError(what + ": no real twist beta exists for the given a, b, alpha");
        }
        d.params = {a, b, alpha, *beta};
    }
    d.p0 = j.contains("p0") ? vec3(j.at("p0"), what + ".p0") : Vec3::Zero();
    if (j.contains("mount")) {
        d.mount = rigid_transform(j.at("mount"), what + ".mount");
    }
    try {
        d.validate();
    } catch (const Error& e) {
        throw InputError(what + ": " + e.what());
    }
    return d;
}

/// Linkage handed to the geometry stage: a Bennett design, or a planar or
/// spherical four-bar given by its four lengths (arc angles in rad for the
/// spherical case, on a sphere of `radius` mm).
struct MechanismSpec {
    std::string kind = "bennett";
    kinematics::BennettDesign bennett;
    std::array<double, 4> lengths{};  // crank, coupler, rocker, ground
    double radius = 100.0;

    geometry::MechanismMotion motion() const
    {
        geometry::MechanismMotion m;
        if (kind == "bennett") {
            m = geometry::bennett_motion(bennett);
        } else if (kind == "planar") {
            m = geometry::loop_motion(kinematics::planar_four_bar(lengths[0], lengths[1], lengths[2], lengths[3]));
        } else {
            m = geometry::loop_motion(
                kinematics::spherical_four_bar(lengths[0], lengths[1], lengths[2], lengths[3], radius));
        }
        m.name = kind;
        return m;
    }
};

inline Json mechanism_to_json(const MechanismSpec& s)
{
    if (s.kind == "bennett") {
        Json j = design_to_json(s.bennett);
        j.erase("units");
        return j;
    }
    Json j{{"mechanism", s.kind},
           {"crank", s.lengths[0]},
           {"coupler", s.lengths[1]},
           {"rocker", s.lengths[2]},
           {"ground", s.lengths[3]}};
    if (s.kind == "spherical") {
        j["radius"] = s.radius;
    }
    return j;
}

/// Accepts a design file, a synth result (its "design" member) or a
/// four-bar description.
inline MechanismSpec mechanism_from_json(const Json& j, const std::string& what = "design")
{
    check_units(j, what);
    if (j.is_object() && j.contains("design") && j.at("design").is_object()) {
        return mechanism_from_json(j.at("design"), what + ".design");
    }
    MechanismSpec s;
    s.kind = j.is_object() && j.contains("mechanism") && j.at("mechanism").is_string()
                 ? j.at("mechanism").get<std::string>()
                 : "bennett";
    if (s.kind == "bennett") {
        s.bennett = design_from_json(j, what);
        return s;
    }
    if (s.kind != "planar" && s.kind != "spherical") {
        throw InputError(what + ": unknown mechanism '" + s.kind + "' (bennett, planar or spherical)");
    }
    const char* names[4] = {"crank", "coupler", "rocker", "ground"};
    for (std::size_t i = 0; i < 4; ++i) {
        s.lengths[i] = number_field(j, names[i], what);
        if (!(s.lengths[i] > 0.0)) {
            throw InputError(what + "." + names[i] + ": must be positive");
        }
    }
    if (s.kind == "spherical") {
        s.radius = number_or(j, "radius", 100.0, what);
    }
    try {
        (void)s.motion();
    } catch (const Error& e) {
        throw InputError(what + ": " + e.what());
    }
    return s;
}

// ----------------------------------------------------------------- loads

inline Json load_to_json(const dynamics::LoadProfile& l)
{
    Json phases = Json::array();
    for (const auto& p : l.phases) {
        phases.push_back(
            Json{{"t0", p.t0}, {"t1", p.t1}, {"force", to_json(p.wrench.force)}, {"moment", to_json(p.wrench.moment)}});
    }
    return Json{{"units", dynamics_units()}, {"phases", phases}};
}

inline dynamics::LoadProfile load_from_json(const Json& j, const std::string& what = "load")
{
    check_units(j, what);
    dynamics::LoadProfile l;
    const Json& ph = field(j, "phases", what);
    if (!ph.is_array()) {
        throw InputError(what + ".phases: expected an array");
    }
    for (std::size_t i = 0; i < ph.size(); ++i) {
        std::string w = what + ".phases[" + std::to_string(i) + "]";
        dynamics::LoadPhase p;
        p.t0 = number_field(ph[i], "t0", w);
        p.t1 = number_field(ph[i], "t1", w);
        p.wrench.force = ph[i].contains("force") ? vec3(ph[i].at("force"), w + ".force") : Vec3::Zero();
        p.wrench.moment = ph[i].contains("moment") ? vec3(ph[i].at("moment"), w + ".moment") : Vec3::Zero();
        l.phases.push_back(p);
    }
    try {
        l.validate();
    } catch (const Error& e) {
        throw InputError(what + ": " + e.what());
    }
    return l;
}

inline Json keypoints_to_json(const dynamics::KeyPointSpec& k)
{
    Json a = Json::array();
    for (const auto& p : k.points) {
        a.push_back(Json{{"point", to_json(p.point)}, {"fraction", p.fraction}});
    }
    return a;
}

/// Array of {"point", "fraction"}, or an object holding it under "keypoints".
inline dynamics::KeyPointSpec keypoints_from_json(const Json& j, const std::string& what = "keypoints")
{
    const Json& a = j.is_object() ? field(j, "keypoints", what) : j;
    if (!a.is_array()) {
        throw InputError(what + ": expected an array of key points");
    }
    dynamics::KeyPointSpec k;
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::string w = what + "[" + std::to_string(i) + "]";
        k.points.push_back({vec3(field(a[i], "point", w), w + ".point"), number_field(a[i], "fraction", w)});
    }
    try {
        k.validate();
    } catch (const Error& e) {
        throw InputError(what + ": " + e.what());
    }
    return k;
}

// -------------------------------------------------------------- problems

inline Json bounds_to_json(const synth::ParamBounds& b)
{
    return Json{{"lower", std::vector<double>(b.lower.data(), b.lower.data() + b.lower.size())},
                {"upper", std::vector<double>(b.upper.data(), b.upper.data() + b.upper.size())}};
}

inline Json problem_to_json(const synth::DesignProblem& p)
{
    return Json{{"units", dynamics_units()},
                {"curve", Json{{"points", to_json(p.target.points)}, {"closed", p.target.closed}}},
                {"keypoints", keypoints_to_json(p.keypoints)},
                {"load", Json{{"phases", load_to_json(p.load).at("phases")}}},
                {"box", Json{{"min", to_json(p.box.min)}, {"max", to_json(p.box.max)}}},
                {"bounds", bounds_to_json(p.bounds)},
                {"weights", Json{{"similarity", p.weights.similarity}, {"torque", p.weights.torque}, {"energy", p.weights.energy}}},
                {"stall_torque", p.stall_torque},
                {"period", p.period},
                {"nh_tol", p.nh_tol},
                {"sing_tol", p.sing_tol},
                {"penalty", p.penalty},
                {"metric_samples", p.metric_samples},
                {"dynamics_samples", p.dynamics_samples},
                {"path_samples", p.path_samples},
                {"align_mount", p.align_mount}};
}

inline synth::DesignProblem problem_from_json(const Json& j, const std::string& what = "problem")
{
    check_units(j, what);
    synth::DesignProblem p;
    p.target = curve_from_json(field(j, "curve", what), what + ".curve");
    p.keypoints = keypoints_from_json(field(j, "keypoints", what), what + ".keypoints");
    p.load = j.contains("load") ? load_from_json(j.at("load"), what + ".load") : dynamics::LoadProfile::none();
    const Json& box = field(j, "box", what);
    p.box.min = vec3(field(box, "min", what + ".box"), what + ".box.min");
    p.box.max = vec3(field(box, "max", what + ".box"), what + ".box.max");
    p.bounds = synth::default_bounds(p.box);
    if (j.contains("bounds")) {
        const Json& b = j.at("bounds");
        auto lo = number_list(field(b, "lower", what + ".bounds"), what + ".bounds.lower");
        auto hi = number_list(field(b, "upper", what + ".bounds"), what + ".bounds.upper");
        if (lo.size() != synth::kParamCount || hi.size() != synth::kParamCount) {
            throw InputError(what + ".bounds: 12 lower and 12 upper values are required");
        }
        p.bounds.lower = Eigen::Map<const Eigen::VectorXd>(lo.data(), 12);
        p.bounds.upper = Eigen::Map<const Eigen::VectorXd>(hi.data(), 12);
    }
    if (j.contains("weights")) {
        const Json& w = j.at("weights");
        p.weights.similarity = number_or(w, "similarity", p.weights.similarity, what + ".weights");
        p.weights.torque = number_or(w, "torque", p.weights.torque, what + ".weights");
        p.weights.energy = number_or(w, "energy", p.weights.energy, what + ".weights");
    }
    p.stall_torque = number_or(j, "stall_torque", p.stall_torque, what);
    p.period = number_or(j, "period", p.period, what);
    p.nh_tol = number_or(j, "nh_tol", p.nh_tol, what);
    p.sing_tol = number_or(j, "sing_tol", p.sing_tol, what);
    p.penalty = number_or(j, "penalty", p.penalty, what);
    p.metric_samples = count_or(j, "metric_samples", p.metric_samples, what);
    p.dynamics_samples = count_or(j, "dynamics_samples", p.dynamics_samples, what);
    p.path_samples = count_or(j, "path_samples", p.path_samples, what);
    p.align_mount = bool_or(j, "align_mount", p.align_mount, what);
    try {
        p.validate();
    } catch (const Error& e) {
        throw InputError(what + ": " + e.what());
    }
    return p;
}

inline synth::DesignProblem read_problem(const std::filesystem::path& path)
{
    return problem_from_json(read_json(path), path.string());
}

// ------------------------------------------------------------ synth results

inline Json evaluation_to_json(const synth::Evaluation& e)
{
    return Json{{"assemblable", e.assemblable},
                {"failure", e.failure},
                {"residuals",
                 Json{{"singularity", e.residuals.singularity},
                      {"keypoint", e.residuals.keypoint},
                      {"box", e.residuals.box},
                      {"nh", e.residuals.nh},
                      {"ordered", e.residuals.ordered}}},
                {"min_measure", e.min_measure},
                {"max_torque", e.max_torque},
                {"objective", e.objective},
                {"penalty", e.penalty},
                {"penalized", e.penalized},
                {"feasible", e.feasible}};
}

inline Json synth_result_to_json(const synth::SynthResult& r)
{
    return Json{{"design", design_to_json(r.design)},
                {"parameters", std::vector<double>(r.parameters.data(), r.parameters.data() + r.parameters.size())},
                {"objective_terms",
                 Json{{"similarity", r.objective_terms.similarity},
                      {"torque_ratio", r.objective_terms.torque_ratio},
                      {"energy", r.objective_terms.energy}}},
                {"similarity", r.objective_terms.similarity},
                {"nh", r.nh},
                {"feasible", r.feasible},
                {"found", r.found},
                {"generations", r.generations},
                {"evaluations", r.evaluations},
                {"restarts", r.restarts},
                {"evaluation", evaluation_to_json(r.evaluation)},
                {"history", r.history}};
}

// --------------------------------------------------------------- geometry

struct GeometryFile {
    MechanismSpec mechanism;
    geometry::GeometryDesign geometry;
    std::size_t frames = 120;
};

inline Json geometry_to_json(const MechanismSpec& mech, const geometry::GeometryDesign& g)
{
    Json links = Json::array();
    for (const auto& c : g.chains) {
        links.push_back(Json{{"particles", to_json(c.particles)}, {"radius", c.radius}});
    }
    return Json{{"units", geometry_units()},
                {"mechanism", mechanism_to_json(mech)},
                {"frames", g.frames.size()},
                {"D_j", g.joint_distance},
                {"links", links}};
}

/// Rebuilds the topology and the frames from the embedded mechanism. The
/// mechanism may also be supplied separately when the file lacks one.
inline GeometryFile geometry_from_json(const Json& j, const std::string& what = "geometry",
                                       const MechanismSpec* fallback = nullptr)
{
    check_units(j, what);
    GeometryFile f;
    if (j.contains("mechanism")) {
        f.mechanism = mechanism_from_json(j.at("mechanism"), what + ".mechanism");
    } else if (fallback != nullptr) {
        f.mechanism = *fallback;
    } else {
        throw InputError(what + ": missing field \"mechanism\"");
    }
    f.frames = count_or(j, "frames", 120, what);
    if (f.frames < 1) {
        throw InputError(what + ".frames: must be at least 1");
    }
    geometry::MechanismMotion motion = f.mechanism.motion();
    geometry::GeometryDesign& g = f.geometry;
    g.topology = motion.topology;
    g.frames = motion.frames(f.frames);
    g.joint_distance = number_field(j, "D_j", what);
    const Json& links = field(j, "links", what);
    if (!links.is_array()) {
        throw InputError(what + ".links: expected an array");
    }
    for (std::size_t k = 0; k < links.size(); ++k) {
        std::string w = what + ".links[" + std::to_string(k) + "]";
        geometry::ParticleChain c;
        c.particles = vec3_list(field(links[k], "particles", w), w + ".particles");
        c.radius = number_or(links[k], "radius", 3.0, w);
        g.chains.push_back(std::move(c));
    }
    try {
        g.validate();
    } catch (const Error& e) {
        throw InputError(what + ": " + e.what());
    }
    return f;
}

inline GeometryFile read_geometry(const std::filesystem::path& path, const MechanismSpec* fallback = nullptr)
{
    return geometry_from_json(read_json(path), path.string(), fallback);
}

/// Family names in report order.
inline const char* const kConstraintFamilies[6] = {"energy", "length", "curvature", "axis", "joint", "perpendicular"};

/// Residual of each family scaled by its tolerance; values above 1 violate.
inline std::array<double, 6> normalized_residuals(const geometry::ConstraintReport& r,
                                                  const geometry::GeomConstraintParams& params,
                                                  const geometry::GeomTolerances& tol = {})
{
    return {r.energy / r.energy_threshold,
            r.length_violation <= 0.0 ? 0.0 : r.length_violation / tol.length,
            r.max_curvature / (params.curvature_cap + tol.curvature),
            r.axis_distance / params.axis_tol,
            r.joint_distance_error / tol.joint_distance,
            r.perpendicularity / tol.perpendicular};
}

/// Worst violated family, or an empty string when every family holds.
inline std::string worst_residual(const geometry::ConstraintReport& r, const geometry::GeomConstraintParams& params)
{
    const bool ok[6] = {r.energy_ok, r.length_ok, r.curvature_ok, r.axis_ok, r.joint_ok, r.perpendicular_ok};
    auto v = normalized_residuals(r, params);
    int worst = -1;
    for (int i = 0; i < 6; ++i) {
        if (!ok[i] && (worst < 0 || v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(worst)])) {
            worst = i;
        }
    }
    return worst < 0 ? std::string() : std::string(kConstraintFamilies[worst]);
}

inline Json constraint_report_to_json(const geometry::ConstraintReport& r, const geometry::GeomConstraintParams& params,
                                      const geometry::GeomTolerances& tol = {})
{
    auto entry = [](double value, double limit, bool ok) { return Json{{"value", value}, {"limit", limit}, {"ok", ok}}; };
    return Json{{"energy", entry(r.energy, r.energy_threshold, r.energy_ok)},
                {"length", entry(r.length_violation, tol.length, r.length_ok)},
                {"length_ratio", r.length_ratio},
                {"length_slack", params.length_slack},
                {"curvature", entry(r.max_curvature, params.curvature_cap, r.curvature_ok)},
                {"axis", entry(r.axis_distance, params.axis_tol, r.axis_ok)},
                {"joint", entry(r.joint_distance_error, tol.joint_distance, r.joint_ok)},
                {"perpendicular", entry(r.perpendicularity, tol.perpendicular, r.perpendicular_ok)}};
}

inline Json clearance_to_json(const geometry::ClearanceReport& c, std::size_t links)
{
    auto body = [links](std::size_t b) {
        return b < links ? "link " + std::to_string(b) : "joint " + std::to_string(b - links);
    };
    return Json{{"min_clearance", c.min_clearance},
                {"frame", c.frame},
                {"frames_checked", c.frames_checked},
                {"body_a", body(c.body_a)},
                {"body_b", body(c.body_b)},
                {"segment_a", c.segment_a},
                {"segment_b", c.segment_b}};
}

} // namespace overlinkd::io
