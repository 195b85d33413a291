#include "overlinkd/curve/bspline.hpp"
#include "overlinkd/curve/metrics.hpp"
#include "overlinkd/core/se3.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace overlinkd;
using namespace overlinkd::curve;

namespace {

DiscreteCurve3 unit_square()
{
    return {{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)}, true};
}

DiscreteCurve3 helix(std::size_t n, double radius, double pitch, double turns, bool closed = false)
{
    DiscreteCurve3 c;
    c.closed = closed;
    for (std::size_t i = 0; i < n; ++i) {
        double t = turns * kTwoPi * static_cast<double>(i) / static_cast<double>(n);
        c.points.emplace_back(radius * std::cos(t), radius * std::sin(t), pitch * t / kTwoPi);
    }
    return c;
}

// Closed non-planar test curve with n samples.
DiscreteCurve3 random_closed_curve(std::mt19937_64& rng, std::size_t n)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::array<double, 9> k{};
    for (auto& v : k) {
        v = u(rng);
    }
    DiscreteCurve3 c;
    for (std::size_t i = 0; i < n; ++i) {
        double t = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
        c.points.emplace_back(3.0 * std::cos(t) + k[0] * std::cos(2 * t) + k[1] * std::sin(3 * t),
                              2.0 * std::sin(t) + k[2] * std::sin(2 * t) + k[3] * std::cos(3 * t),
                              k[4] * std::cos(t) + k[5] * std::sin(2 * t) + k[6]);
    }
    return c;
}

RigidTransform random_rotation(std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
    q.normalize();
    return {q.toRotationMatrix(), Vec3(g(rng), g(rng), g(rng)) * 10.0};
}

} // namespace

TEST(BSpline, LinearSplineIsItsControlPolygon)
{
    auto c = make_closed_bspline(unit_square().points, 1);
    auto s = sample_bspline(c, 12);
    ASSERT_EQ(s.size(), 12u);
    EXPECT_TRUE(s.closed);
    for (const auto& p : s.points) {
        bool on_edge = std::abs(p.x()) < 1e-12 || std::abs(p.x() - 1) < 1e-12 || std::abs(p.y()) < 1e-12 ||
                       std::abs(p.y() - 1) < 1e-12;
        EXPECT_TRUE(on_edge);
        EXPECT_GE(p.x(), -1e-12);
        EXPECT_LE(p.x(), 1 + 1e-12);
    }
    EXPECT_NEAR((s[0] - Vec3(0, 0, 0)).norm(), 0.0, 1e-12);
    EXPECT_NEAR((s[3] - Vec3(1, 0, 0)).norm(), 0.0, 1e-12);
}

TEST(BSpline, CubicCircleWithinOnePercent)
{
    const double radius = 50.0;
    const int m = 16;
    // Scale the control polygon so that the curve passes through radius at knots.
    double h = kTwoPi / m;
    double rho = radius * 3.0 / (2.0 + std::cos(h));
    std::vector<Vec3> poly;
    for (int i = 0; i < m; ++i) {
        poly.emplace_back(rho * std::cos(i * h), rho * std::sin(i * h), 0.0);
    }
    auto s = sample_bspline(make_closed_bspline(poly, 3), 64);
    double worst = 0.0;
    for (const auto& p : s.points) {
        worst = std::max(worst, std::abs(p.norm() - radius));
    }
    EXPECT_LT(worst, 0.01 * radius);
}

TEST(BSpline, FourSamplesAreDistinct)
{
    auto s = sample_bspline(make_closed_bspline(unit_square().points, 2), 4);
    ASSERT_EQ(s.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = i + 1; j < 4; ++j) {
            EXPECT_GT((s[i] - s[j]).norm(), 1e-6);
        }
    }
}

TEST(BSpline, MalformedKnotsRejected)
{
    auto c = make_closed_bspline(unit_square().points, 3);
    c.knots.pop_back();
    EXPECT_THROW(sample_bspline(c, 8), ValidationError);
    auto d = make_closed_bspline(unit_square().points, 3);
    std::swap(d.knots[2], d.knots[5]);
    EXPECT_THROW(sample_bspline(d, 8), ValidationError);
}

TEST(Resample, UnitSquareHalfEdges)
{
    auto r = resample_arclength(unit_square(), 8);
    std::vector<Vec3> expect = {{0, 0, 0}, {0.5, 0, 0}, {1, 0, 0}, {1, 0.5, 0},
                                {1, 1, 0}, {0.5, 1, 0}, {0, 1, 0}, {0, 0.5, 0}};
    ASSERT_EQ(r.size(), 8u);
    for (std::size_t i = 0; i < 8; ++i) {
        EXPECT_NEAR((r[i] - expect[i]).norm(), 0.0, 1e-12);
        EXPECT_NEAR((r.at_cyclic(static_cast<std::ptrdiff_t>(i + 1)) - r[i]).norm(), 0.5, 1e-12);
    }
}

TEST(Resample, UniformCurveIsFixedPoint)
{
    DiscreteCurve3 c;
    for (int i = 0; i < 6; ++i) {
        c.points.emplace_back(std::cos(i * kPi / 3), std::sin(i * kPi / 3), 0.0);
    }
    auto r = resample_arclength(c, 6);
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_NEAR((r[i] - c[i]).norm(), 0.0, 1e-9);
    }
}

TEST(Resample, HelixSpacingUniform)
{
    auto c = helix(100, 20.0, 15.0, 2.0);
    auto r = resample_arclength(c, 40);
    ASSERT_EQ(r.size(), 40u);
    std::vector<double> gaps;
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
        gaps.push_back((r[i + 1] - r[i]).norm());
    }
    double mean = 0.0;
    for (double g : gaps) {
        mean += g;
    }
    mean /= static_cast<double>(gaps.size());
    for (double g : gaps) {
        EXPECT_LE(std::abs(g - mean), 0.005 * mean);
    }
    EXPECT_NEAR(polyline_length(r), polyline_length(c), 0.01 * polyline_length(c));
}

TEST(Resample, ZeroLengthRejected)
{
    DiscreteCurve3 c{{Vec3::Ones(), Vec3::Ones(), Vec3::Ones(), Vec3::Ones()}, true};
    EXPECT_THROW(resample_arclength(c, 8), ValidationError);
}

TEST(Signature, PlanarHexagon)
{
    DiscreteCurve3 c;
    for (int i = 0; i < 6; ++i) {
        c.points.emplace_back(std::cos(i * kPi / 3), std::sin(i * kPi / 3), 0.0);
    }
    for (const auto& e : curvature_signature(c)) {
        EXPECT_NEAR(e.gamma, kPi / 3, 1e-12);
        EXPECT_NEAR(e.delta, 0.0, 1e-12);
    }
}

TEST(Signature, CollinearTripleConvention)
{
    DiscreteCurve3 c{{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(2, 1, 0.5), Vec3(0, 1, 0)}, true};
    auto sig = curvature_signature(c);
    EXPECT_EQ(sig[1].gamma, 0.0);
    EXPECT_EQ(sig[1].delta, 0.0);
    EXPECT_EQ(sig[0].delta, 0.0);
}

TEST(Signature, HelixIsConstant)
{
    auto c = helix(48, 10.0, 4.0, 1.0, true);
    // A closed sampling of one helix turn is not periodic in z, so inspect interior samples.
    auto sig = curvature_signature(c);
    for (std::size_t i = 2; i + 3 < sig.size(); ++i) {
        EXPECT_NEAR(sig[i].gamma, sig[2].gamma, 1e-6);
        EXPECT_NEAR(sig[i].delta, sig[2].delta, 1e-6);
    }
    EXPECT_GT(sig[2].delta, 1e-4);
}

TEST(Signature, OpenCurveRejected)
{
    auto c = helix(20, 1.0, 1.0, 1.0, false);
    EXPECT_THROW(curvature_signature(c), ValidationError);
}

TEST(Signature, PlanarCurveHasZeroDelta)
{
    std::mt19937_64 rng(5);
    auto c = random_closed_curve(rng, 50);
    for (auto& p : c.points) {
        p.z() = 0.0;
    }
    for (const auto& e : curvature_signature(c)) {
        EXPECT_NEAR(e.delta, 0.0, 1e-12);
        EXPECT_GE(e.gamma, 0.0);
        EXPECT_LT(e.gamma, kTwoPi);
    }
}

TEST(Similarity, IdentityIsZero)
{
    std::mt19937_64 rng(1);
    auto c = random_closed_curve(rng, 50);
    EXPECT_EQ(similarity(c, c), 0.0);
}

TEST(Similarity, RigidScaleShiftInvariance)
{
    std::mt19937_64 rng(2);
    auto a = random_closed_curve(rng, 50);
    RigidTransform t{Eigen::AngleAxisd(37.0 * kPi / 180.0, Vec3(1, 2, 3).normalized()).toRotationMatrix(),
                     Vec3(4, -5, 6)};
    DiscreteCurve3 b;
    for (std::size_t i = 0; i < a.size(); ++i) {
        b.points.push_back(2.5 * t.apply(a[(i + 7) % a.size()]));
    }
    std::size_t off = 0;
    EXPECT_LE(similarity(a, b, &off), 1e-9);
    EXPECT_EQ(off, 7u);
}

TEST(Similarity, SymmetricAndBounded)
{
    std::mt19937_64 rng(3);
    for (int k = 0; k < 20; ++k) {
        auto a = random_closed_curve(rng, 40);
        auto b = random_closed_curve(rng, 40);
        double ab = similarity(a, b), ba = similarity(b, a);
        EXPECT_NEAR(ab, ba, 1e-12);
        EXPECT_GE(ab, 0.0);
        EXPECT_LE(ab, 1.0);
    }
}

TEST(Similarity, CoarserCurveIsResampled)
{
    std::mt19937_64 rng(4);
    auto a = random_closed_curve(rng, 60);
    auto b = resample_arclength(a, 30);
    double expect = signature_distance(curvature_signature(a), curvature_signature(resample_arclength(b, 60)));
    EXPECT_EQ(similarity(a, b), expect);
    EXPECT_EQ(similarity(b, a), signature_distance(curvature_signature(resample_arclength(b, 60)), curvature_signature(a)));
}

TEST(Hausdorff, IdentityAndCubeShift)
{
    DiscreteCurve3 cube;
    for (int i = 0; i < 8; ++i) {
        cube.points.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
    }
    EXPECT_EQ(hausdorff(cube, cube), 0.0);
    EXPECT_EQ(normalized_hausdorff(cube, cube), 0.0);
    DiscreteCurve3 shifted = cube;
    for (auto& p : shifted.points) {
        p.x() += 0.1;
    }
    EXPECT_NEAR(hausdorff(cube, shifted), 0.1, 1e-12);
    EXPECT_NEAR(normalized_hausdorff(cube, shifted), 0.1 / std::sqrt(3.0), 1e-12);
}

TEST(Hausdorff, LiftedRectangleRatioFixture)
{
    // Rectangle with diagonal 321.6 mm; one vertex lifted 22.5 mm off its plane.
    DiscreteCurve3 a{{Vec3(0, 0, 0), Vec3(192.96, 0, 0), Vec3(192.96, 257.28, 0), Vec3(0, 257.28, 0)}, true};
    DiscreteCurve3 b = a;
    b.points[2].z() += 22.5;
    EXPECT_NEAR(hausdorff(a, b), 22.5, 1e-12);
    double nh = normalized_hausdorff(a, b);
    EXPECT_NEAR(nh, 22.5 / 321.6, 1e-15);
    EXPECT_EQ(std::floor(nh * 1000.0) / 10.0, 6.9);
}

TEST(Hausdorff, TriangleInequality)
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int k = 0; k < 50; ++k) {
        std::array<DiscreteCurve3, 3> s;
        for (auto& c : s) {
            for (int i = 0; i < 12; ++i) {
                c.points.emplace_back(u(rng), u(rng), u(rng));
            }
        }
        EXPECT_LE(hausdorff(s[0], s[2]), hausdorff(s[0], s[1]) + hausdorff(s[1], s[2]) + 1e-12);
    }
}

TEST(Hausdorff, DegenerateBoxGuarded)
{
    DiscreteCurve3 a{{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()}, true};
    DiscreteCurve3 b{{Vec3::Ones(), Vec3::Ones(), Vec3::Ones(), Vec3::Ones()}, true};
    EXPECT_THROW(normalized_hausdorff(a, b), ValidationError);
    EXPECT_EQ(normalized_hausdorff(a, a), 0.0);
}

TEST(Similarity, InvarianceOverRandomCurves)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> scale(0.2, 5.0);
    std::uniform_int_distribution<int> shift(0, 49);
    for (int k = 0; k < 100; ++k) {
        auto a = random_closed_curve(rng, 50);
        RigidTransform t = random_rotation(rng);
        double sc = scale(rng);
        int sh = shift(rng);
        DiscreteCurve3 b;
        for (std::size_t i = 0; i < a.size(); ++i) {
            b.points.push_back(sc * t.apply(a[(i + static_cast<std::size_t>(sh)) % a.size()]));
        }
        ASSERT_LE(similarity(a, b), 1e-9);
        ASSERT_LE(similarity(b, a), 1e-9);
    }
}
