#pragma once

#include "overlinkd/geometry/solver.hpp"

#include <numeric>

namespace overlinkd::geometry {

struct GeomoptOptions {
    double joint_distance = 10.0;          // D_j, mm
    std::size_t candidates = 512;          // Hermite candidates drawn
    std::size_t attempts = 4;              // lowest-energy candidates solved per margin
    std::vector<double> margins{0.5, 1.0};  // radius inflation schedule, mm
    std::size_t dense_factor = 10;          // verification frames per enforcement frame
    double clearance_tolerance = 0.01;      // mm of accepted overlap at the verification frames
    std::uint64_t seed = 1;
    CollisionModel model;
    GeomConstraintParams params;
    HermiteOptions hermite;                 // `candidates` above overrides hermite.candidates
    SolverOptions solver;                   // margin is taken from the schedule
    std::size_t threads = 1;

    void validate() const
    {
        model.validate();
        params.validate();
        require(joint_distance > 0.0, "geomopt: joint distance must be positive");
        require(candidates >= 1 && attempts >= 1, "geomopt: need at least one candidate and one attempt");
        require(!margins.empty(), "geomopt: margin schedule is empty");
        require(dense_factor >= 1, "geomopt: dense factor must be at least 1");
    }
};

struct GeomoptResult {
    GeometryDesign geometry;
    ConstraintReport report;
    ClearanceReport clearance;
    bool feasible = false;   // every constraint family holds
    bool verified = false;   // feasible and clear at the dense frames
    std::size_t iterations = 0;        // solver iterations of the returned solve
    std::size_t total_iterations = 0;  // over every attempt
    std::size_t solves = 0;
    std::size_t candidate = 0;
    double candidate_energy = 0.0;
    double margin = 0.0;
    std::string status;
};

namespace detail {

/// Solve, then verify at the dense frames.
inline GeomoptResult solve_and_verify(const GeometryDesign& start, const MechanismMotion& motion, double margin,
                                      const GeomoptOptions& opt)
{
    SolverOptions so = opt.solver;
    so.margin = margin;
    so.threads = opt.threads;
    GeometrySolveResult r = optimize_geometry(start, opt.model, opt.params, so);
    GeomoptResult out;
    out.geometry = std::move(r.geometry);
    out.report = r.report;
    out.feasible = r.feasible;
    out.iterations = r.iterations;
    out.total_iterations = r.iterations;
    out.solves = 1;
    out.margin = margin;
    out.status = r.status;
    if (r.feasible) {
        const std::size_t dense = opt.dense_factor * out.geometry.frames.size();
        out.clearance = brute_force_clearance(out.geometry, motion, dense, opt.threads);
        out.verified = out.clearance.min_clearance >= -opt.clearance_tolerance;
        if (!out.verified) {
            out.status = "dense verification failed: clearance " + std::to_string(out.clearance.min_clearance) + " mm";
        }
    }
    return out;
}

} // namespace detail

/// Hermite candidates, then feasibility solves from the lowest-energy ones
/// with an escalating radius margin until one passes the dense clearance
/// check. Solves within one batch run concurrently; the first verified
/// candidate in energy order wins, so the result does not depend on the
/// thread count.
inline GeomoptResult geomopt(const MechanismMotion& motion, const GeomoptOptions& opt = {})
{
    opt.validate();
    HermiteOptions ho = opt.hermite;
    ho.candidates = opt.candidates;
    ho.threads = opt.threads;
    HermiteCandidates h = hermite_init(motion, opt.joint_distance, opt.seed, opt.model, ho);
    std::vector<std::size_t> order(h.candidates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return h.energies[a] < h.energies[b]; });
    const std::size_t tries = std::min(opt.attempts, order.size());

    GeomoptResult best;
    bool have = false;
    std::size_t total = 0, solves = 0;
    const std::size_t batch = std::max<std::size_t>(1, worker_count(opt.threads));
    for (double margin : opt.margins) {
        for (std::size_t first = 0; first < tries; first += batch) {
            const std::size_t count = std::min(batch, tries - first);
            std::vector<GeomoptResult> runs(count);
            GeomoptOptions inner = opt;
            inner.threads = count > 1 ? 1 : opt.threads;
            parallel_for(count, count, [&](std::size_t i) {
                runs[i] = detail::solve_and_verify(h.candidates[order[first + i]], motion, margin, inner);
            });
            for (std::size_t i = 0; i < count; ++i) {
                GeomoptResult& r = runs[i];
                total += r.total_iterations;
                ++solves;
                r.candidate = order[first + i];
                r.candidate_energy = h.energies[r.candidate];
                if (r.verified) {
                    r.total_iterations = total;
                    r.solves = solves;
                    return r;
                }
                // Keep the most informative failure: feasible beats infeasible.
                if (!have || (r.feasible && !best.feasible)) {
                    best = std::move(r);
                    have = true;
                }
            }
        }
    }
    best.total_iterations = total;
    best.solves = solves;
    return best;
}

/// Re-solve from an earlier geometry after changing the joint distance.
inline GeomoptResult warm_start(const GeometryDesign& previous, const MechanismMotion& motion, double joint_distance,
                                const GeomoptOptions& opt = {})
{
    opt.validate();
    GeometryDesign start = with_joint_distance(previous, joint_distance);
    GeomoptResult best;
    std::size_t total = 0;
    for (double margin : opt.margins) {
        GeomoptResult r = detail::solve_and_verify(start, motion, margin, opt);
        total += r.iterations;
        r.total_iterations = total;
        if (r.verified) {
            return r;
        }
        best = std::move(r);
    }
    best.total_iterations = total;
    return best;
}

} // namespace overlinkd::geometry
