#pragma once

#include "overlinkd/geometry/clearance.hpp"
#include "overlinkd/geometry/constraints.hpp"
#include "overlinkd/geometry/hermite.hpp"

#include <Eigen/Cholesky>

#include <array>

namespace overlinkd::geometry {

struct SolverOptions {
    std::size_t max_iterations = 1500;
    double margin = 0.0;           // radius inflation used for the energy constraint
    std::size_t bins = 12;         // frame bins of the energy residual
    double energy_goal = 0.5;      // internal target as a fraction of E_th
    double curvature_goal = 0.98;  // internal target as a fraction of κ_u
    double length_goal = 1e-3;     // relative inset of the length window
    std::array<double, 2> spacing_band{0.8, 1.25};  // segment over mean segment
    double contact_energy = 1e-4;  // particle-pair energy at the capsule contact distance
    double contact_overshoot = 0.1;  // mm beyond the contact distance that the residual aims for
    double curvature_weight = 10.0;
    double spacing_weight = 1.0;
    GeomTolerances tolerances;
    std::size_t threads = 1;
    /// Called after every accepted step with (iteration, residual norm², collision energy).
    std::function<void(std::size_t, double, double)> progress;
};

struct GeometrySolveResult {
    GeometryDesign geometry;
    ConstraintReport report;
    bool feasible = false;
    std::size_t iterations = 0;
    std::string status;
};

namespace detail {

/// Affine coordinates x = A y + b of the link particles in which the hinge
/// constraints hold identically: each joint has one axial position c_j, the
/// two end particles of joint j sit at c_j -/+ D/2 along its axis (the side
/// fixed by sign σ_j), the second and second-to-last particles of each link
/// move in the plane normal to their axis, and the remaining particles are
/// free.
class HingeCoordinates {
public:
    HingeCoordinates(const GeometryDesign& g)
        : n_(g.link_count()), m_(g.chains.front().size()), dj_(g.joint_distance), topo_(g.topology)
    {
        require(m_ >= 4, "optimize_geometry: chains need at least four particles");
        sides_.resize(n_);
        basis_.resize(n_);
        for (std::size_t j = 0; j < n_; ++j) {
            const Vec3& z = topo_.axes[j].direction;
            double s = (g.joint_end(j) - g.joint_start(j)).dot(z);
            sides_[j] = s < 0.0 ? -1.0 : 1.0;
            Vec3 e1 = overlinkd::geometry::detail::any_perpendicular(z);
            basis_[j] = {e1, z.cross(e1)};
        }
        const auto nx = static_cast<Eigen::Index>(3 * n_ * m_);
        const auto ny = static_cast<Eigen::Index>(n_ + n_ * (4 + 3 * (m_ - 4)));
        A_ = Eigen::MatrixXd::Zero(nx, ny);
        b_ = Eigen::VectorXd::Zero(nx);
        for (std::size_t k = 0; k < n_; ++k) {
            std::size_t j0 = k, j1 = (k + 1) % n_;
            const AxisLine& ax0 = topo_.axes[j0];
            const AxisLine& ax1 = topo_.axes[j1];
            // Start particle: axis j0 at c_j0 + σ D/2; end particle: axis j1 at c_j1 - σ D/2.
            set_axis_point(k, 0, j0, ax0, 0.5 * sides_[j0] * dj_);
            set_axis_point(k, m_ - 1, j1, ax1, -0.5 * sides_[j1] * dj_);
            set_axis_point(k, 1, j0, ax0, 0.5 * sides_[j0] * dj_);
            set_axis_point(k, m_ - 2, j1, ax1, -0.5 * sides_[j1] * dj_);
            Eigen::Index y = link_offset(k);
            for (int c = 0; c < 2; ++c) {
                A_.block<3, 1>(row(k, 1), y + c) = basis_[j0][static_cast<std::size_t>(c)];
                A_.block<3, 1>(row(k, m_ - 2), y + 2 + c) = basis_[j1][static_cast<std::size_t>(c)];
            }
            for (std::size_t i = 2; i + 2 < m_; ++i) {
                A_.block<3, 3>(row(k, i), y + 4 + static_cast<Eigen::Index>(3 * (i - 2))) = Mat3::Identity();
            }
        }
    }

    const Eigen::MatrixXd& A() const noexcept { return A_; }
    Eigen::VectorXd x(const Eigen::VectorXd& y) const { return A_ * y + b_; }

    /// Coordinates of the closest design that satisfies the hinge constraints.
    Eigen::VectorXd project(const GeometryDesign& g) const
    {
        Eigen::VectorXd y = Eigen::VectorXd::Zero(A_.cols());
        for (std::size_t j = 0; j < n_; ++j) {
            const AxisLine& ax = topo_.axes[j];
            double hs = (g.joint_start(j) - ax.point).dot(ax.direction) + 0.5 * sides_[j] * dj_;
            double he = (g.joint_end(j) - ax.point).dot(ax.direction) - 0.5 * sides_[j] * dj_;
            y[static_cast<Eigen::Index>(j)] = 0.5 * (hs + he);
        }
        Eigen::VectorXd base = x(y);  // interior coordinates still zero
        for (std::size_t k = 0; k < n_; ++k) {
            const auto& p = g.chains[k].particles;
            std::size_t j0 = k, j1 = (k + 1) % n_;
            Eigen::Index o = link_offset(k);
            Vec3 p0 = base.segment<3>(row(k, 0)), pe = base.segment<3>(row(k, m_ - 1));
            for (int c = 0; c < 2; ++c) {
                y[o + c] = (p[1] - p0).dot(basis_[j0][static_cast<std::size_t>(c)]);
                y[o + 2 + c] = (p[m_ - 2] - pe).dot(basis_[j1][static_cast<std::size_t>(c)]);
            }
            for (std::size_t i = 2; i + 2 < m_; ++i) {
                y.segment<3>(o + 4 + static_cast<Eigen::Index>(3 * (i - 2))) = p[i];
            }
        }
        return y;
    }

private:
    Eigen::Index row(std::size_t k, std::size_t i) const { return static_cast<Eigen::Index>(3 * (k * m_ + i)); }
    Eigen::Index link_offset(std::size_t k) const
    {
        return static_cast<Eigen::Index>(n_ + k * (4 + 3 * (m_ - 4)));
    }
    void set_axis_point(std::size_t k, std::size_t i, std::size_t j, const AxisLine& ax, double shift)
    {
        A_.block<3, 1>(row(k, i), static_cast<Eigen::Index>(j)) = ax.direction;
        b_.segment<3>(row(k, i)) = ax.point + shift * ax.direction;
    }

    std::size_t n_, m_;
    double dj_;
    LinkageTopology topo_;
    std::vector<double> sides_;
    std::vector<std::array<Vec3, 2>> basis_;
    Eigen::MatrixXd A_;
    Eigen::VectorXd b_;
};

/// Gauss-Newton model ½|r|² of the stacked inequality residuals, accumulated
/// as normal equations over the link particle coordinates. Families:
/// per-frame capsule-pair contact deficits d_safe - d (capsules cannot slip
/// between each other's particles), the total collision
/// energy above its internal target, link length outside the inset window,
/// vertex curvature above the inset cap, and a spacing band that keeps
/// particles spread along each link. A residual is present only while its
/// inequality is violated.
struct ResidualSystem {
    double phi = 0.0;
    Eigen::MatrixXd H;     // JᵀJ
    Eigen::VectorXd g;     // Jᵀr
    double total_energy = 0.0;
    std::size_t contacts = 0;   // capsule pairs inside the contact distance
    std::array<double, 5> family{};  // contact, energy, length, curvature, spacing shares of phi
};

class GeometryResiduals {
public:
    GeometryResiduals(const GeometryDesign& shape, const CollisionModel& model, const GeomConstraintParams& params,
                      const SolverOptions& opt)
        : model_(model), params_(params), opt_(opt), table_(layout_of(shape))
    {
        // Separation at which one pair contributes `contact_energy` per frame.
        safe_ = (-0.5 * std::log(2.0 * opt_.contact_energy) - model_.beta) / model_.alpha;
        // The same capsules and exclusions as brute_force_clearance.
        const ParticleLayout& L = table_.layout();
        const std::size_t n = L.links, m = L.per_link;
        auto at = [m](std::size_t k, std::size_t i) { return static_cast<Eigen::Index>(3 * (k * m + i)); };
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t i = 0; i + 1 < m; ++i) {
                capsules_.push_back({at(k, i), at(k, i + 1), k, i, k});
            }
        }
        for (std::size_t j = 0; j < n; ++j) {
            capsules_.push_back({at((j + n - 1) % n, m - 1), at(j, 0), n + j, 0, j});
        }
        for (std::size_t a = 0; a < capsules_.size(); ++a) {
            for (std::size_t b = a + 1; b < capsules_.size(); ++b) {
                if (!excluded_pair(capsules_[a].body, capsules_[a].index, capsules_[b].body, capsules_[b].index, 1, L)) {
                    capsule_pairs_.emplace_back(a, b);
                }
            }
        }
    }

    double safe_distance() const noexcept { return safe_; }

    ResidualSystem evaluate(const GeometryDesign& g) const
    {
        const std::size_t n = g.link_count(), m = g.chains.front().size();
        const auto nv = static_cast<Eigen::Index>(3 * n * m);
        auto idx = [m](std::size_t k, std::size_t i) { return static_cast<Eigen::Index>(3 * (k * m + i)); };

        ResidualSystem s;
        s.H = Eigen::MatrixXd::Zero(nv, nv);
        s.g = Eigen::VectorXd::Zero(nv);
        auto add_dense = [&](std::size_t fam, double r, const Eigen::VectorXd& jr) {
            s.family[fam] += 0.5 * r * r;
            s.phi += 0.5 * r * r;
            s.H.noalias() += jr * jr.transpose();
            s.g += r * jr;
        };

        // Capsule contact rows, accumulated per frame bin and reduced in order.
        const std::size_t nframes = g.frames.size();
        const std::size_t bins = std::max<std::size_t>(1, std::min(opt_.bins, nframes));
        struct Partial {
            Eigen::MatrixXd H;
            Eigen::VectorXd g;
            double phi = 0.0;
            std::size_t contacts = 0;
        };
        std::vector<Partial> parts(bins);
        parallel_for(bins, worker_count(opt_.threads), [&](std::size_t bin) {
            Partial& P = parts[bin];
            P.H = Eigen::MatrixXd::Zero(nv, nv);
            P.g = Eigen::VectorXd::Zero(nv);
            const std::size_t nc = capsules_.size();
            std::vector<Vec3> p0(nc), p1(nc), mid(nc);
            std::vector<double> half(nc), radius(nc);
            for (std::size_t c = 0; c < nc; ++c) {
                const Capsule& cap = capsules_[c];
                radius[c] = g.chains[cap.link].radius + opt_.margin;
            }
            for (std::size_t t = bin * nframes / bins; t < (bin + 1) * nframes / bins; ++t) {
                const auto& motion = g.frames[t];
                for (std::size_t c = 0; c < nc; ++c) {
                    const Capsule& cap = capsules_[c];
                    p0[c] = motion[cap.link].apply(particle(g, cap.first));
                    p1[c] = motion[cap.link].apply(particle(g, cap.second));
                    mid[c] = 0.5 * (p0[c] + p1[c]);
                    half[c] = 0.5 * (p1[c] - p0[c]).norm();
                }
                for (const auto& [a, b] : capsule_pairs_) {
                    double contact = safe_ + radius[a] + radius[b];
                    double reach = contact + opt_.contact_overshoot;
                    if ((mid[a] - mid[b]).norm() - half[a] - half[b] >= reach) {
                        continue;
                    }
                    SegmentClosest sc = segment_closest(p0[a], p1[a], p0[b], p1[b]);
                    if (sc.distance >= reach) {
                        continue;
                    }
                    if (sc.distance < contact) {
                        ++P.contacts;
                    }
                    double r = reach - sc.distance;
                    Vec3 u = sc.distance > 1e-12 ? Vec3(sc.delta / sc.distance) : Vec3::UnitZ();
                    Vec3 ga = -(motion[capsules_[a].link].rotation.transpose() * u);
                    Vec3 gb = motion[capsules_[b].link].rotation.transpose() * u;
                    const std::array<Eigen::Index, 4> ent{capsules_[a].first, capsules_[a].second, capsules_[b].first,
                                                          capsules_[b].second};
                    const std::array<Vec3, 4> dirs{(1.0 - sc.s) * ga, sc.s * ga, (1.0 - sc.t) * gb, sc.t * gb};
                    for (int e1 = 0; e1 < 4; ++e1) {
                        P.g.segment<3>(ent[e1]) += r * dirs[e1];
                        for (int e2 = 0; e2 < 4; ++e2) {
                            P.H.block<3, 3>(ent[e1], ent[e2]) += dirs[e1] * dirs[e2].transpose();
                        }
                    }
                    P.phi += 0.5 * r * r;
                }
            }
        });
        for (const auto& P : parts) {
            s.H += P.H;
            s.g += P.g;
            s.phi += P.phi;
            s.family[0] += P.phi;
            s.contacts += P.contacts;
        }

        EnergyOptions eo;
        eo.margin = opt_.margin;
        eo.gradient = true;
        eo.threads = opt_.threads;
        EnergyTerms et = collision_terms(g, table_, model_, eo);
        s.total_energy = et.total;
        const double goal = opt_.energy_goal * model_.threshold;
        // The aggregate row only takes over once no pair is inside its contact
        // distance; before that it would swamp every other family.
        if (s.contacts == 0 && et.total > goal) {
            double root = std::sqrt(et.total);
            add_dense(1, root - std::sqrt(goal), et.gradient.rowwise().sum() / (2.0 * root));
        }

        for (std::size_t k = 0; k < n; ++k) {
            const auto& p = g.chains[k].particles;
            const double l0 = g.topology.nominal_length(k);
            double len = 0.0;
            Eigen::VectorXd dl = Eigen::VectorXd::Zero(nv);
            std::vector<double> seg(m - 1);
            std::vector<Vec3> dir(m - 1);
            for (std::size_t i = 0; i + 1 < m; ++i) {
                Vec3 e = p[i + 1] - p[i];
                seg[i] = e.norm();
                dir[i] = e / seg[i];
                len += seg[i];
                dl.segment<3>(idx(k, i + 1)) += dir[i];
                dl.segment<3>(idx(k, i)) -= dir[i];
            }
            double lo = l0 * (1.0 + opt_.length_goal), hi = params_.length_slack * l0 * (1.0 - opt_.length_goal);
            if (len < lo) {
                add_dense(2, lo - len, -dl);
            } else if (len > hi) {
                add_dense(2, len - hi, dl);
            }

            const double cap = opt_.curvature_goal * params_.curvature_cap;
            const double wk = opt_.curvature_weight;
            for (std::size_t i = 1; i + 1 < m; ++i) {
                VertexCurvature kv = vertex_curvature(p[i] - p[i - 1], p[i + 1] - p[i]);
                if (kv.value > cap && std::isfinite(kv.value)) {
                    Eigen::VectorXd jr = Eigen::VectorXd::Zero(nv);
                    jr.segment<3>(idx(k, i - 1)) -= kv.da;
                    jr.segment<3>(idx(k, i)) += kv.da - kv.db;
                    jr.segment<3>(idx(k, i + 1)) += kv.db;
                    add_dense(3, wk * (kv.value - cap), wk * jr);
                }
            }

            const double mean = len / static_cast<double>(m - 1);
            const double ws = opt_.spacing_weight * mean;
            for (std::size_t i = 0; i + 1 < m; ++i) {
                double ratio = seg[i] / mean;
                double excess = ratio > opt_.spacing_band[1] ? ratio - opt_.spacing_band[1]
                              : ratio < opt_.spacing_band[0] ? ratio - opt_.spacing_band[0]
                                                             : 0.0;
                if (excess != 0.0) {
                    Eigen::VectorXd jr = -(ratio / len) * dl;
                    jr.segment<3>(idx(k, i + 1)) += dir[i] / mean;
                    jr.segment<3>(idx(k, i)) -= dir[i] / mean;
                    add_dense(4, ws * excess, ws * jr);
                }
            }
        }
        return s;
    }

private:
    struct Capsule {
        Eigen::Index first, second;  // coordinate offsets of the two end particles
        std::size_t body, index, link;
    };

    static Vec3 particle(const GeometryDesign& g, Eigen::Index offset)
    {
        const std::size_t m = g.chains.front().size();
        const auto i = static_cast<std::size_t>(offset / 3);
        return g.chains[i / m].particles[i % m];
    }

    std::vector<Capsule> capsules_;
    std::vector<std::pair<std::size_t, std::size_t>> capsule_pairs_;
    CollisionModel model_;
    GeomConstraintParams params_;
    SolverOptions opt_;
    PairTable table_;
    double safe_ = 0.0;
};

inline void unpack(const Eigen::VectorXd& x, GeometryDesign& g)
{
    const std::size_t m = g.chains.front().size();
    for (std::size_t k = 0; k < g.link_count(); ++k) {
        for (std::size_t i = 0; i < m; ++i) {
            g.chains[k].particles[i] = x.segment<3>(static_cast<Eigen::Index>(3 * (k * m + i)));
        }
    }
}

} // namespace detail

/// Levenberg-Marquardt feasibility solve over the link particle positions.
/// There is no objective: the iteration stops at the first iterate that
/// satisfies every constraint family (energy at radius + margin) with no
/// capsule pair inside its contact distance, and an already feasible start
/// is returned untouched.
inline GeometrySolveResult optimize_geometry(const GeometryDesign& initial, const CollisionModel& model,
                                             const GeomConstraintParams& params, const SolverOptions& opt = {})
{
    initial.validate();
    model.validate();
    params.validate();
    require(!initial.frames.empty(), "optimize_geometry: geometry carries no frames");

    GeometrySolveResult out;
    out.geometry = initial;
    auto check = [&](const GeometryDesign& g) { return check_constraints(g, model, params, opt.tolerances, opt.margin); };
    out.report = check(initial);
    if (out.report.feasible()) {
        out.feasible = true;
        out.status = "initial geometry already feasible";
        return out;
    }

    detail::GeometryResiduals system(initial, model, params, opt);
    detail::HingeCoordinates coords(initial);
    const Eigen::MatrixXd& A = coords.A();
    GeometryDesign g = initial;
    Eigen::VectorXd y = coords.project(initial);
    detail::unpack(coords.x(y), g);
    detail::ResidualSystem rs = system.evaluate(g);
    double phi = rs.phi;
    double lambda = 1e-3;
    auto feasible_now = [&](const detail::ResidualSystem& s, const GeometryDesign& geo) {
        return check_constraints(geo, s.total_energy, model, params, opt.tolerances);
    };
    if (ConstraintReport rep = feasible_now(rs, g); rep.feasible() && rs.contacts == 0) {
        out.geometry = g;
        out.report = rep;
        out.feasible = true;
        out.status = "feasible after projection onto the hinge constraints";
        return out;
    }
    while (out.iterations < opt.max_iterations) {
        ++out.iterations;
        Eigen::MatrixXd H = A.transpose() * rs.H * A;
        Eigen::VectorXd grad = A.transpose() * rs.g;
        Eigen::VectorXd diag = H.diagonal().cwiseMax(1e-9 * std::max(1.0, H.diagonal().maxCoeff()));
        Eigen::MatrixXd M = H;
        M.diagonal() += lambda * diag;
        Eigen::VectorXd step = M.ldlt().solve(-grad);
        if (!step.allFinite()) {
            lambda *= 10.0;
            continue;
        }
        GeometryDesign trial = g;
        detail::unpack(coords.x(y + step), trial);
        bool valid = true;
        for (const auto& c : trial.chains) {
            for (std::size_t i = 1; i < c.size(); ++i) {
                valid = valid && (c.particles[i] - c.particles[i - 1]).norm() > 1e-9;
            }
        }
        detail::ResidualSystem trs;
        double tphi = std::numeric_limits<double>::infinity();
        if (valid) {
            trs = system.evaluate(trial);
            tphi = trs.phi;
        }
        if (tphi < phi) {
            y += step;
            g = std::move(trial);
            rs = std::move(trs);
            phi = tphi;
            lambda = std::max(lambda / 3.0, 1e-12);
            if (opt.progress) {
                opt.progress(out.iterations, 2.0 * phi, rs.total_energy);
            }
            if (ConstraintReport rep = feasible_now(rs, g); rep.feasible() && rs.contacts == 0) {
                out.geometry = g;
                out.report = rep;
                out.feasible = true;
                out.status = "feasible";
                return out;
            }
        } else {
            lambda = std::min(lambda * 4.0, 1e12);
            if (lambda >= 1e12) {
                break;
            }
        }
    }
    out.geometry = g;
    out.report = check(g);
    out.feasible = out.report.feasible();
    out.status = out.feasible ? "feasible" : "iteration cap reached: " + out.report.summary();
    return out;
}

/// Moves every hinge so the two end particles sit D apart around their
/// current midpoint, spreading each end shift linearly along the chain.
inline GeometryDesign with_joint_distance(const GeometryDesign& g, double dj)
{
    require(dj > 0.0, "with_joint_distance: joint distance must be positive");
    const std::size_t n = g.link_count();
    GeometryDesign out = g;
    out.joint_distance = dj;
    std::vector<Vec3> start_shift(n, Vec3::Zero()), end_shift(n, Vec3::Zero());
    for (std::size_t j = 0; j < n; ++j) {
        Vec3 a = g.joint_start(j), b = g.joint_end(j);
        Vec3 mid = 0.5 * (a + b);
        Vec3 dir = (b - a).norm() > 0.0 ? Vec3((b - a).normalized()) : g.topology.axes[j].direction;
        end_shift[(j + n - 1) % n] = (mid - 0.5 * dj * dir) - a;
        start_shift[j] = (mid + 0.5 * dj * dir) - b;
    }
    for (std::size_t k = 0; k < n; ++k) {
        auto& p = out.chains[k].particles;
        for (std::size_t i = 0; i < p.size(); ++i) {
            double s = static_cast<double>(i) / static_cast<double>(p.size() - 1);
            p[i] += (1.0 - s) * start_shift[k] + s * end_shift[k];
        }
    }
    return out;
}

} // namespace overlinkd::geometry
