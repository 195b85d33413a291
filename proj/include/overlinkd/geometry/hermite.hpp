#pragma once

#include "overlinkd/geometry/energy.hpp"

#include <array>
#include <limits>
#include <random>

namespace overlinkd::geometry {

struct HermiteOptions {
    std::size_t candidates = 512;
    std::size_t particles = kDefaultChainParticles;
    double radius = 3.0;
    double offset_range = 0.35;  // hinge offsets along each axis, as a fraction of the mean link length
    std::size_t max_draws = 200;  // per candidate, redrawn until every link length is inside the window
    std::array<double, 2> length_window{1.02, 1.26};  // accepted link length over nominal length
    std::size_t threads = 1;
};

struct HermiteCandidates {
    std::vector<GeometryDesign> candidates;
    std::vector<double> energies;
    std::size_t selected = 0;

    const GeometryDesign& best() const { return candidates[selected]; }
};

namespace detail {

inline Vec3 any_perpendicular(const Vec3& z)
{
    Vec3 t = std::abs(z.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    return (t - t.dot(z) * z).normalized();
}

/// Tangent at an end point: the chord projected onto the plane normal to the
/// axis, scaled to the chord length.
inline Vec3 end_tangent(const Vec3& chord, const Vec3& axis)
{
    Vec3 t = chord - chord.dot(axis) * axis;
    double len = chord.norm();
    if (t.norm() < 1e-9 * std::max(len, 1.0)) {
        t = any_perpendicular(axis);
    }
    return len * t.normalized();
}

/// Cubic Hermite curve from a to b with end tangents ta, tb, sampled at m
/// points equally spaced in arc length.
inline std::vector<Vec3> hermite_chain(const Vec3& a, const Vec3& ta, const Vec3& b, const Vec3& tb, std::size_t m)
{
    auto eval = [&](double s) {
        double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * a + (s3 - 2 * s2 + s) * ta + (-2 * s3 + 3 * s2) * b + (s3 - s2) * tb;
    };
    constexpr std::size_t dense = 512;
    std::vector<Vec3> pts(dense + 1);
    std::vector<double> arc(dense + 1, 0.0);
    for (std::size_t i = 0; i <= dense; ++i) {
        pts[i] = eval(static_cast<double>(i) / dense);
        if (i > 0) {
            arc[i] = arc[i - 1] + (pts[i] - pts[i - 1]).norm();
        }
    }
    std::vector<Vec3> out(m);
    out.front() = a;
    out.back() = b;
    std::size_t seg = 1;
    for (std::size_t i = 1; i + 1 < m; ++i) {
        double target = arc.back() * static_cast<double>(i) / static_cast<double>(m - 1);
        while (seg < dense && arc[seg] < target) {
            ++seg;
        }
        double span = arc[seg] - arc[seg - 1];
        double u = span > 0.0 ? (target - arc[seg - 1]) / span : 0.0;
        double s = (static_cast<double>(seg - 1) + u) / dense;
        out[i] = eval(s);
    }
    return out;
}

inline double mean_link_length(const LinkageTopology& t)
{
    double s = 0.0;
    for (std::size_t k = 0; k < t.link_count(); ++k) {
        s += t.nominal_length(k);
    }
    return s / static_cast<double>(t.link_count());
}

/// Geometry from hinge offsets h_j along each axis and stacking sides σ_j.
inline GeometryDesign geometry_from_hinges(const LinkageTopology& topo, const FrameSet& frames, double dj,
                                           const std::vector<double>& offsets, const std::vector<int>& sides,
                                           std::size_t m, double radius, bool straight)
{
    const std::size_t n = topo.link_count();
    std::vector<Vec3> start(n), end(n);
    for (std::size_t j = 0; j < n; ++j) {
        const AxisLine& ax = topo.axes[j];
        Vec3 c = ax.project(topo.joint_points[j]) + offsets[j] * ax.direction;
        end[(j + n - 1) % n] = c - 0.5 * sides[j] * dj * ax.direction;
        start[j] = c + 0.5 * sides[j] * dj * ax.direction;
    }
    GeometryDesign g;
    g.topology = topo;
    g.joint_distance = dj;
    g.frames = frames;
    for (std::size_t k = 0; k < n; ++k) {
        ParticleChain chain;
        chain.radius = radius;
        Vec3 chord = end[k] - start[k];
        if (straight) {
            for (std::size_t i = 0; i < m; ++i) {
                chain.particles.push_back(start[k] + chord * (static_cast<double>(i) / static_cast<double>(m - 1)));
            }
        } else {
            Vec3 ta = end_tangent(chord, topo.axes[k].direction);
            Vec3 tb = end_tangent(chord, topo.axes[(k + 1) % n].direction);
            chain.particles = hermite_chain(start[k], ta, end[k], tb, m);
            // Pull the second and second-to-last particles into the planes
            // normal to the axes so the end segments are exactly perpendicular.
            auto flatten_onto = [](Vec3& p, const Vec3& origin, const Vec3& axis) { p -= (p - origin).dot(axis) * axis; };
            flatten_onto(chain.particles[1], start[k], topo.axes[k].direction);
            flatten_onto(chain.particles[m - 2], end[k], topo.axes[(k + 1) % n].direction);
        }
        g.chains.push_back(std::move(chain));
    }
    return g;
}

} // namespace detail

/// Straight bars between the joint centres, with each hinge split by D_j
/// along its axis.
inline GeometryDesign straight_bar_geometry(const LinkageTopology& topo, const FrameSet& frames, double dj,
                                            std::size_t m = kDefaultChainParticles, double radius = 3.0)
{
    const std::size_t n = topo.link_count();
    return detail::geometry_from_hinges(topo, frames, dj, std::vector<double>(n, 0.0), std::vector<int>(n, 1), m,
                                        radius, true);
}

/// Random hinge placements along the axes, one cubic Hermite curve per link
/// with end tangents normal to the axes, scored by collision energy.
inline HermiteCandidates hermite_init(const MechanismMotion& motion, double dj, std::uint64_t seed,
                                      const CollisionModel& model = {}, const HermiteOptions& opt = {})
{
    model.validate();
    require(dj > 0.0, "hermite_init: joint distance must be positive");
    require(opt.candidates >= 1 && opt.particles >= 3, "hermite_init: need candidates and at least 3 particles");
    const LinkageTopology& topo = motion.topology;
    const std::size_t n = topo.link_count();
    FrameSet frames = motion.frames(model.frame_count);
    const double range = opt.offset_range * detail::mean_link_length(topo);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    HermiteCandidates out;
    for (std::size_t c = 0; c < opt.candidates; ++c) {
        std::vector<double> offsets(n);
        std::vector<int> sides(n);
        GeometryDesign best_geometry;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t draw = 0; draw < opt.max_draws; ++draw) {
            for (std::size_t j = 0; j < n; ++j) {
                offsets[j] = range * u(rng);
                sides[j] = u(rng) < 0.0 ? -1 : 1;
            }
            double score = std::numeric_limits<double>::infinity();
            GeometryDesign g =
                detail::geometry_from_hinges(topo, frames, dj, offsets, sides, opt.particles, opt.radius, false);
            for (std::size_t k = 0; k < n; ++k) {
                double l0 = topo.nominal_length(k), len = g.chains[k].length();
                score = std::min({score, len - opt.length_window[0] * l0, opt.length_window[1] * l0 - len});
            }
            if (score > best) {
                best = score;
                best_geometry = std::move(g);
            }
            if (best >= 0.0) {
                break;
            }
        }
        out.candidates.push_back(std::move(best_geometry));
    }
    out.energies.resize(out.candidates.size());
    PairTable table(layout_of(out.candidates.front()));
    parallel_for(out.candidates.size(), worker_count(opt.threads), [&](std::size_t c) {
        out.energies[c] = collision_terms(out.candidates[c], table, model).total;
    });
    out.selected = static_cast<std::size_t>(
        std::min_element(out.energies.begin(), out.energies.end()) - out.energies.begin());
    return out;
}

} // namespace overlinkd::geometry
