#pragma once

#include "overlinkd/core/parallel.hpp"
#include "overlinkd/geometry/collision.hpp"
#include "overlinkd/geometry/design.hpp"

#include <limits>

namespace overlinkd::geometry {

struct ClearanceReport {
    double min_clearance = std::numeric_limits<double>::infinity();
    std::size_t frame = 0;
    std::size_t body_a = 0, body_b = 0;     // links are 0..n-1, joints n..2n-1
    std::size_t segment_a = 0, segment_b = 0;
    std::size_t frames_checked = 0;
};

/// Exact minimum capsule-to-capsule distance over the given frames. Link k
/// contributes one capsule per pair of consecutive particles, joint j one
/// capsule between its two end particles; pairs are skipped by the same
/// exclusion rule the energy uses.
inline ClearanceReport brute_force_clearance(const GeometryDesign& g, const FrameSet& frames, std::size_t threads = 1)
{
    g.validate();
    const ParticleLayout L = layout_of(g);
    const std::size_t n = L.links, m = L.per_link;
    struct Capsule {
        Vec3 p, q;
        double r;
        std::size_t body, index, link;
    };
    std::vector<Capsule> caps;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i + 1 < m; ++i) {
            caps.push_back({g.chains[k].particles[i], g.chains[k].particles[i + 1], g.chains[k].radius, k, i, k});
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        caps.push_back({g.joint_start(j), g.joint_end(j), g.chains[j].radius, n + j, 0, j});
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < caps.size(); ++a) {
        for (std::size_t b = a + 1; b < caps.size(); ++b) {
            if (!excluded_pair(caps[a].body, caps[a].index, caps[b].body, caps[b].index, 1, L)) {
                pairs.emplace_back(a, b);
            }
        }
    }

    std::vector<ClearanceReport> per_frame(frames.size());
    parallel_for(frames.size(), worker_count(threads), [&](std::size_t t) {
        const auto& motion = frames[t];
        std::vector<Vec3> p(caps.size()), q(caps.size()), c(caps.size());
        std::vector<double> half(caps.size());
        for (std::size_t i = 0; i < caps.size(); ++i) {
            p[i] = motion[caps[i].link].apply(caps[i].p);
            q[i] = motion[caps[i].link].apply(caps[i].q);
            c[i] = 0.5 * (p[i] + q[i]);
            half[i] = 0.5 * (q[i] - p[i]).norm();
        }
        ClearanceReport& best = per_frame[t];
        best.frame = t;
        for (const auto& [a, b] : pairs) {
            double rr = caps[a].r + caps[b].r;
            double lower = (c[a] - c[b]).norm() - half[a] - half[b] - rr;
            if (lower >= best.min_clearance) {
                continue;
            }
            double d = segment_distance(p[a], q[a], p[b], q[b]) - rr;
            if (d < best.min_clearance) {
                best.min_clearance = d;
                best.body_a = caps[a].body;
                best.body_b = caps[b].body;
                best.segment_a = caps[a].index;
                best.segment_b = caps[b].index;
            }
        }
    });
    ClearanceReport out;
    for (const auto& r : per_frame) {
        if (r.min_clearance < out.min_clearance) {
            out = r;
        }
    }
    out.frames_checked = frames.size();
    return out;
}

inline ClearanceReport brute_force_clearance(const GeometryDesign& g, const MechanismMotion& motion,
                                             std::size_t dense_frame_count, std::size_t threads = 1)
{
    require(dense_frame_count >= 1, "brute_force_clearance: need at least one frame");
    return brute_force_clearance(g, motion.frames(dense_frame_count), threads);
}

} // namespace overlinkd::geometry
