#pragma once

#include "overlinkd/core/parallel.hpp"
#include "overlinkd/synth/problem.hpp"

#include <functional>

namespace overlinkd::synth {

struct OptimizeOptions {
    std::size_t population = 16;
    double sigma0 = 0.2;         // fraction of each bound range
    std::size_t stall_generations = 40;
    std::size_t max_population_factor = 4; // restarts double λ up to this multiple
    std::size_t threads = 0;     // 0: hardware concurrency, capped by OVERLINKD_THREADS
    /// Called after every generation with (generation, incumbent penalized value).
    std::function<void(std::size_t, double)> progress;
};

struct SynthResult {
    BennettDesign design;
    VecX parameters = VecX::Zero(kParamCount);
    Evaluation evaluation;
    ObjectiveTerms objective_terms;
    double nh = 0.0;
    bool feasible = false;
    bool found = false;  // at least one assemblable candidate
    std::size_t generations = 0;
    std::size_t evaluations = 0;
    std::size_t restarts = 0;
    std::uint64_t rng_seed = 0;
    std::vector<double> history; // incumbent penalized value after each generation
};

/// Penalized fitness of one full parameter vector, with the mount replaced by
/// the rigid alignment when the problem asks for it.
struct Candidate {
    VecX x;
    BennettDesign design;
    Evaluation evaluation;
    double fitness = kUnassemblable;
};

inline Candidate evaluate_vector(const VecX& x, const DesignProblem& problem, const TargetCache& cache)
{
    Candidate c;
    c.x = x.cwiseMax(problem.bounds.lower).cwiseMin(problem.bounds.upper);
    Decoded d = decode(x, problem.bounds);
    c.design = d.design;
    double bound_pen = problem.penalty * d.bound_violation;
    if (!d.valid) {
        c.evaluation.failure = "no real twist angle for these lengths";
        c.fitness = kUnassemblable * (1.0 + d.ratio_excess) + bound_pen;
        return c;
    }
    if (problem.align_mount) {
        try {
            c.design.mount = align_mount(c.design, problem, cache);
            c.x = encode(c.design);
        } catch (const Error& e) {
            c.evaluation.failure = e.what();
            c.fitness = kUnassemblable + bound_pen;
            return c;
        }
    }
    c.evaluation = evaluate(c.design, problem, cache);
    c.fitness = c.evaluation.penalized + bound_pen;
    return c;
}

/// CMA-ES over the design vector in range-normalized coordinates, with
/// restarts at doubled population after stagnation. The generation budget
/// counts across restarts. Deterministic for a fixed seed.
inline SynthResult optimize(const DesignProblem& problem, std::uint64_t seed, std::size_t budget,
                            const OptimizeOptions& options = {})
{
    problem.validate();
    require(budget >= 1, "optimize: budget must be at least one generation");
    const TargetCache cache(problem);
    const std::size_t dim = problem.align_mount ? kShapeParamCount : kParamCount;
    const VecX& lo = problem.bounds.lower;
    const VecX range = problem.bounds.upper - problem.bounds.lower;
    const std::size_t workers = worker_count(options.threads);

    std::mt19937_64 master(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto random_mean = [&] {
        VecX z(static_cast<Eigen::Index>(dim));
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            z[i] = 0.15 + 0.7 * unit(master);
        }
        return z;
    };
    VecX full_template = 0.5 * (problem.bounds.lower + problem.bounds.upper);
    full_template.tail<3>().setZero();
    auto to_full = [&](const VecX& z) {
        VecX x = full_template;
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            x[i] = lo[i] + z[i] * range[i];
        }
        return x;
    };

    SynthResult result;
    result.rng_seed = seed;
    Candidate incumbent, best_feasible;
    incumbent.fitness = std::numeric_limits<double>::infinity();
    bool have_feasible = false;
    std::size_t lambda = std::max<std::size_t>(options.population, 4);
    std::size_t gen = 0;

    while (gen < budget) {
        CmaEs es(random_mean(), options.sigma0, lambda, master());
        double run_best = std::numeric_limits<double>::infinity();
        std::size_t since_improvement = 0;
        while (gen < budget) {
            std::vector<VecX> pop = es.ask();
            std::vector<Candidate> cands(pop.size());
            parallel_for(pop.size(), workers, [&](std::size_t i) { cands[i] = evaluate_vector(to_full(pop[i]), problem, cache); });
            std::vector<double> fit(pop.size());
            for (std::size_t i = 0; i < pop.size(); ++i) {
                fit[i] = cands[i].fitness;
                ++result.evaluations;
                if (cands[i].evaluation.assemblable) {
                    result.found = true;
                }
                if (cands[i].fitness < incumbent.fitness) {
                    incumbent = cands[i];
                }
                if (cands[i].evaluation.feasible && (!have_feasible || cands[i].fitness < best_feasible.fitness)) {
                    best_feasible = cands[i];
                    have_feasible = true;
                }
            }
            es.tell(fit);
            ++gen;
            result.history.push_back(incumbent.fitness);
            if (options.progress) {
                options.progress(gen, incumbent.fitness);
            }
            double gen_best = *std::min_element(fit.begin(), fit.end());
            if (gen_best < run_best - 1e-9 * std::max(1.0, std::abs(run_best))) {
                run_best = gen_best;
                since_improvement = 0;
            } else {
                ++since_improvement;
            }
            if (since_improvement >= options.stall_generations || es.sigma() < 1e-10 || es.axis_ratio() > 1e7) {
                break;
            }
        }
        if (gen < budget) {
            ++result.restarts;
            lambda = std::min(2 * lambda, options.max_population_factor * std::max<std::size_t>(options.population, 4));
        }
    }

    const Candidate& chosen = have_feasible ? best_feasible : incumbent;
    result.generations = gen;
    result.design = chosen.design;
    result.parameters = chosen.x;
    result.evaluation = chosen.evaluation;
    result.objective_terms = chosen.evaluation.terms;
    result.nh = chosen.evaluation.residuals.nh;
    result.feasible = have_feasible;
    return result;
}

} // namespace overlinkd::synth
