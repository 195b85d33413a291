#pragma once

#include "overlinkd/core/parallel.hpp"
#include "overlinkd/geometry/collision.hpp"
#include "overlinkd/geometry/design.hpp"

#include <Eigen/Dense>

#include <map>
#include <utility>

namespace overlinkd::geometry {

/// Particle pairs that contribute to the collision energy, sorted by the body
/// pair they belong to.
class PairTable {
public:
    struct Pair {
        std::uint32_t a, b, group;
    };

    PairTable() = default;

    explicit PairTable(const ParticleLayout& layout, std::size_t reach = 3) : layout_(layout)
    {
        const std::size_t total = layout.count();
        std::map<std::pair<std::size_t, std::size_t>, std::uint32_t> groups;
        for (std::size_t a = 0; a < total; ++a) {
            for (std::size_t b = a + 1; b < total; ++b) {
                std::size_t ba = layout.body(a), bb = layout.body(b);
                if (excluded_pair(ba, layout.index_in_body(a), bb, layout.index_in_body(b), 0, layout, reach)) {
                    continue;
                }
                auto key = std::minmax(ba, bb);
                auto it = groups.try_emplace(key, static_cast<std::uint32_t>(groups.size())).first;
                pairs_.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), it->second});
            }
        }
        group_bodies_.resize(groups.size());
        for (const auto& [key, id] : groups) {
            group_bodies_[id] = key;
        }
    }

    const ParticleLayout& layout() const noexcept { return layout_; }
    const std::vector<Pair>& pairs() const noexcept { return pairs_; }
    std::size_t group_count() const noexcept { return group_bodies_.size(); }
    std::pair<std::size_t, std::size_t> group_bodies(std::size_t g) const { return group_bodies_[g]; }

private:
    ParticleLayout layout_;
    std::vector<Pair> pairs_;
    std::vector<std::pair<std::size_t, std::size_t>> group_bodies_;
};

/// Energy split into (frame bin, body pair) groups, each with its gradient
/// with respect to the link particles (3 coordinates per particle, links in
/// order). Joint particles are interpolated from the link end points, so
/// their contributions are passed on to those.
struct EnergyTerms {
    double total = 0.0;
    std::size_t bins = 1, groups = 0;
    Eigen::VectorXd energy;      // bins * groups
    Eigen::MatrixXd gradient;    // 3·links·m × (bins * groups); empty without gradients
};

struct EnergyOptions {
    double margin = 0.0;     // added to every radius
    std::size_t bins = 1;    // frame bins for grouping
    bool gradient = false;
    std::size_t threads = 1;
};

inline EnergyTerms collision_terms(const GeometryDesign& g, const PairTable& table, const CollisionModel& model,
                                   const EnergyOptions& opt = {})
{
    const ParticleLayout& L = table.layout();
    require(L.links == g.link_count() && L.per_link == g.chains.front().size(), "collision_terms: layout mismatch");
    const std::size_t nframes = g.frames.size();
    const std::size_t bins = std::max<std::size_t>(1, std::min(opt.bins, std::max<std::size_t>(nframes, 1)));
    const std::size_t G = table.group_count();
    const std::size_t nv = 3 * L.links * L.per_link;
    const std::vector<Vec3> ref = flatten(g);

    // Radius per particle, and which link end points feed a joint particle.
    std::vector<double> radius(ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        std::size_t b = L.body(i);
        radius[i] = g.chains[L.motion_link(b)].radius + opt.margin;
    }

    EnergyTerms out;
    out.bins = bins;
    out.groups = G;
    out.energy = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(bins * G));
    if (opt.gradient) {
        out.gradient = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nv), static_cast<Eigen::Index>(bins * G));
    }
    const double cut = model.cutoff();

    // Adds a reference-frame gradient of particle i into column col.
    auto add_grad = [&](Eigen::MatrixXd& grad, std::size_t col, std::size_t i, const Vec3& v) {
        auto put = [&](std::size_t p, double w) {
            grad.block<3, 1>(static_cast<Eigen::Index>(3 * p), static_cast<Eigen::Index>(col)) += w * v;
        };
        if (i < L.links * L.per_link) {
            put(i, 1.0);
            return;
        }
        std::size_t j = (i - L.links * L.per_link) / kJointParticles;
        std::size_t q = (i - L.links * L.per_link) % kJointParticles;
        double u = static_cast<double>(q) / static_cast<double>(kJointParticles - 1);
        std::size_t prev = (j + L.links - 1) % L.links;
        put(prev * L.per_link + L.per_link - 1, 1.0 - u);
        put(j * L.per_link, u);
    };

    parallel_for(bins, worker_count(opt.threads), [&](std::size_t bin) {
        std::size_t f0 = bin * nframes / bins, f1 = (bin + 1) * nframes / bins;
        std::vector<Vec3> world(ref.size());
        for (std::size_t t = f0; t < f1; ++t) {
            const auto& motions = g.frames[t];
            for (std::size_t i = 0; i < ref.size(); ++i) {
                world[i] = motions[L.motion_link(L.body(i))].apply(ref[i]);
            }
            for (const auto& p : table.pairs()) {
                Vec3 dv = world[p.a] - world[p.b];
                double rr = radius[p.a] + radius[p.b];
                double reach = cut + rr;
                double d2 = dv.squaredNorm();
                if (d2 > reach * reach) {
                    continue;
                }
                double dist = std::sqrt(d2);
                double d = dist - rr;
                std::size_t col = bin * G + p.group;
                out.energy[static_cast<Eigen::Index>(col)] += detail::decay(model.alpha * d + model.beta);
                if (opt.gradient && dist > 0.0) {
                    Vec3 gw = pair_energy_derivative(d, model) * dv / dist;
                    std::size_t la = L.motion_link(L.body(p.a)), lb = L.motion_link(L.body(p.b));
                    add_grad(out.gradient, col, p.a, motions[la].rotation.transpose() * gw);
                    add_grad(out.gradient, col, p.b, -(motions[lb].rotation.transpose() * gw));
                }
            }
        }
    });
    // Pairs beyond the cutoff still carry the constant part of the penalty.
    out.total = out.energy.sum() +
                (model.offset + 0.5) * static_cast<double>(table.pairs().size()) * static_cast<double>(nframes);
    return out;
}

/// Collision energy summed over all counted particle pairs and all frames.
inline double total_energy(const GeometryDesign& g, const CollisionModel& model, double margin = 0.0)
{
    PairTable table(layout_of(g));
    EnergyOptions opt;
    opt.margin = margin;
    return collision_terms(g, table, model, opt).total;
}

/// Total energy and its gradient with respect to every link particle.
inline std::pair<double, std::vector<Vec3>> energy_gradient(const GeometryDesign& g, const CollisionModel& model,
                                                             double margin = 0.0)
{
    PairTable table(layout_of(g));
    EnergyOptions opt;
    opt.margin = margin;
    opt.gradient = true;
    EnergyTerms t = collision_terms(g, table, model, opt);
    Eigen::VectorXd sum = t.gradient.rowwise().sum();
    std::vector<Vec3> grad(static_cast<std::size_t>(sum.size() / 3));
    for (std::size_t i = 0; i < grad.size(); ++i) {
        grad[i] = sum.segment<3>(static_cast<Eigen::Index>(3 * i));
    }
    return {t.total, grad};
}

} // namespace overlinkd::geometry
