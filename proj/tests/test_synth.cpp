#include "overlinkd/synth/optimize.hpp"

#include <gtest/gtest.h>

using namespace overlinkd;
using namespace overlinkd::kinematics;
using namespace overlinkd::synth;

namespace {

BennettDesign known_design()
{
    BennettDesign d;
    d.params = BennettParams::from_lengths(100.0, 80.0, 1.0);
    d.p0 = Vec3(40.0, 90.0, 30.0);
    d.mount.rotation = rotation_from_exp(Vec3(0.4, -0.2, 0.9));
    d.mount.translation = Vec3(15.0, -30.0, 60.0);
    return d;
}

// Problem whose target is the dense path of `d`, with one key point on it.
DesignProblem problem_for(const BennettDesign& d, std::size_t keypoints = 1)
{
    BennettKinematics kin(d);
    DesignProblem p;
    p.target.points = kin.cycle_points(p.path_samples);
    for (std::size_t k = 0; k < keypoints; ++k) {
        double q = kin.reference().theta[0] + kTwoPi * static_cast<double>(k + 1) / static_cast<double>(keypoints);
        p.keypoints.points.push_back({kin.fk(q).ee, static_cast<double>(k + 1) / static_cast<double>(keypoints)});
    }
    auto bb = curve::bounding_box(p.target.points);
    p.box = bb;
    p.box.min -= Vec3::Constant(400.0);
    p.box.max += Vec3::Constant(400.0);
    p.bounds = default_bounds(bb);
    p.load = LoadProfile::constant(Vec3(0.0, 0.0, -5.0));
    return p;
}

double sphere(const VecX& x) { return (x.array() - 0.3).square().sum(); }

} // namespace

TEST(CmaEs, MinimizesSphere)
{
    CmaEs es(VecX::Constant(5, 2.0), 0.5, default_population(5), 42);
    EXPECT_EQ(es.population(), 8u);
    double best = 1e300;
    for (int g = 0; g < 400; ++g) {
        auto pop = es.ask();
        std::vector<double> f;
        for (const auto& x : pop) {
            f.push_back(sphere(x));
            best = std::min(best, f.back());
        }
        es.tell(f);
    }
    EXPECT_LT(best, 1e-12);
    EXPECT_LT((es.mean().array() - 0.3).abs().maxCoeff(), 1e-5);
}

TEST(CmaEs, DeterministicForSeed)
{
    auto run = [] {
        CmaEs es(VecX::Constant(4, 1.0), 0.3, 10, 7);
        for (int g = 0; g < 20; ++g) {
            auto pop = es.ask();
            std::vector<double> f;
            for (const auto& x : pop) {
                f.push_back(sphere(x));
            }
            es.tell(f);
        }
        return es.mean();
    };
    VecX a = run(), b = run();
    EXPECT_EQ(a, b);
}

TEST(Decode, IdentityRotationAndSymmetricBranch)
{
    BoundingBox box;
    box.expand(Vec3(-50, -50, -50));
    box.expand(Vec3(50, 50, 50));
    ParamBounds bounds = default_bounds(box);
    VecX x(kParamCount);
    x << 90.0, 90.0, 1.2, 10.0, 20.0, 30.0, 1.0, 2.0, 3.0, 0.0, 0.0, 0.0;
    Decoded d = decode(x, bounds);
    EXPECT_TRUE(d.valid);
    EXPECT_TRUE(d.design.mount.rotation.isApprox(Mat3::Identity(), 0.0));
    EXPECT_NEAR(d.design.params.beta, 1.2, 1e-15);
    EXPECT_EQ(d.bound_violation, 0.0);
}

TEST(Decode, RoundTripAndClamping)
{
    BoundingBox box;
    box.expand(Vec3(-80, -40, -60));
    box.expand(Vec3(70, 90, 50));
    ParamBounds bounds = default_bounds(box);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        VecX x(kParamCount);
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            x[i] = bounds.lower[i] + u(rng) * (bounds.upper[i] - bounds.lower[i]);
        }
        x.tail<3>() *= 0.9; // keep rotation coordinates inside the principal ball
        if (std::abs(x[1] * std::sin(x[2]) / x[0]) > 1.0) {
            continue;
        }
        Decoded d1 = decode(x, bounds);
        Decoded d2 = decode(encode(d1.design), bounds);
        EXPECT_LE((encode(d2.design) - encode(d1.design)).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_NEAR(d2.design.params.beta, d1.design.params.beta, 1e-12);
    }
    VecX out = 0.5 * (bounds.lower + bounds.upper);
    out[0] = 1000.0;
    Decoded c = decode(out, bounds);
    EXPECT_EQ(c.design.params.a, 200.0);
    EXPECT_GT(c.bound_violation, 0.0);
}

TEST(Decode, MissingTwistIsMarkedNotThrown)
{
    BoundingBox box;
    box.expand(Vec3(-50, -50, -50));
    box.expand(Vec3(50, 50, 50));
    ParamBounds bounds = default_bounds(box);
    VecX x = 0.5 * (bounds.lower + bounds.upper);
    x[0] = 40.0;
    x[1] = 200.0;
    x[2] = kPi / 2.0;
    Decoded d;
    EXPECT_NO_THROW(d = decode(x, bounds));
    EXPECT_FALSE(d.valid);
    EXPECT_NEAR(d.ratio_excess, 4.0, 1e-12);

    DesignProblem p = problem_for(known_design());
    TargetCache cache(p);
    Candidate c = evaluate_vector(x, p, cache);
    EXPECT_TRUE(std::isfinite(c.fitness));
    EXPECT_GE(c.fitness, kUnassemblable);
}

TEST(Evaluate, SelfConsistentTarget)
{
    BennettDesign d = known_design();
    DesignProblem p = problem_for(d, 3);
    Evaluation e = evaluate(d, p);
    ASSERT_TRUE(e.assemblable) << e.failure;
    EXPECT_LE(e.terms.similarity, 1e-6);
    EXPECT_LE(e.residuals.nh, 1e-9);
    EXPECT_LE(e.residuals.keypoint, kKeyPointTol);
    EXPECT_EQ(e.residuals.box, 0.0);
    EXPECT_EQ(e.residuals.singularity, 0.0);
    EXPECT_TRUE(e.feasible);
    EXPECT_EQ(e.penalty, 0.0);
    EXPECT_GT(e.terms.energy, 0.0);
}

TEST(Evaluate, TermDecompositionAndWeights)
{
    BennettDesign d = known_design();
    DesignProblem p = problem_for(d);
    // A neighbouring design so every term is nonzero.
    d.p0 += Vec3(5.0, -3.0, 2.0);
    Evaluation full = evaluate(d, p);
    const auto& w = p.weights;
    EXPECT_NEAR(full.objective,
                w.similarity * full.terms.similarity + w.torque * full.terms.torque_ratio + w.energy * full.terms.energy,
                1e-12);
    EXPECT_NEAR(full.penalized, full.objective + full.penalty, 1e-12);

    DesignProblem base = p;
    base.weights.torque = 0.0;
    base.weights.energy = 0.0;
    Evaluation b = evaluate(d, base);
    EXPECT_EQ(b.terms.similarity, full.terms.similarity);
    EXPECT_EQ(b.objective, w.similarity * b.terms.similarity);

    DesignProblem idle = p;
    idle.load = LoadProfile::none();
    Evaluation z = evaluate(d, idle);
    EXPECT_EQ(z.terms.torque_ratio, 0.0);
    EXPECT_EQ(z.terms.energy, 0.0);
    EXPECT_EQ(z.objective, w.similarity * z.terms.similarity);
}

TEST(Evaluate, ResidualsDetectViolations)
{
    BennettDesign d = known_design();
    DesignProblem p = problem_for(d);
    p.box = curve::bounding_box(p.target.points); // joints lie outside the path's own box
    Evaluation e = evaluate(d, p);
    EXPECT_GT(e.residuals.box, 0.0);
    EXPECT_FALSE(e.feasible);
    EXPECT_GT(e.penalty, 0.0);

    DesignProblem q = problem_for(d);
    BennettDesign moved = d;
    moved.mount.translation += Vec3(30.0, 0.0, 0.0);
    Evaluation f = evaluate(moved, q);
    EXPECT_GT(f.residuals.keypoint, 1.0);
    EXPECT_GT(f.residuals.nh, 0.0);
    EXPECT_FALSE(f.feasible);
}

TEST(AlignMount, RecoversPoseAndSnapsKeyPoints)
{
    BennettDesign d = known_design();
    for (std::size_t m : {1u, 2u, 3u}) {
        DesignProblem p = problem_for(d, m);
        TargetCache cache(p);
        BennettDesign guess = d;
        guess.mount = RigidTransform{};
        guess.mount = align_mount(guess, p, cache);
        Evaluation e = evaluate(guess, p, cache);
        EXPECT_LE(e.residuals.keypoint, 1e-8) << m;
        EXPECT_LE(e.residuals.nh, 1e-3) << m;
        EXPECT_LE((guess.mount.translation - d.mount.translation).norm(), 0.5) << m;
    }
}

TEST(Optimize, DeterministicAndMonotone)
{
    DesignProblem p = problem_for(known_design());
    OptimizeOptions opt;
    opt.population = 8;
    SynthResult a = optimize(p, 11, 6, opt);
    SynthResult b = optimize(p, 11, 6, opt);
    EXPECT_EQ(a.generations, 6u);
    EXPECT_EQ(a.history.size(), 6u);
    EXPECT_TRUE(a.found);
    EXPECT_EQ(a.parameters, b.parameters);
    EXPECT_EQ(a.history, b.history);
    EXPECT_EQ(a.evaluation.penalized, b.evaluation.penalized);
    for (std::size_t i = 1; i < a.history.size(); ++i) {
        EXPECT_LE(a.history[i], a.history[i - 1]);
    }
    SynthResult c = optimize(p, 12, 6, opt);
    EXPECT_NE(a.parameters, c.parameters);
}

TEST(Optimize, RejectsEmptyBudget)
{
    DesignProblem p = problem_for(known_design());
    EXPECT_THROW(optimize(p, 1, 0), ValidationError);
}
