#pragma once

#include "overlinkd/core/types.hpp"

#include <vector>

namespace overlinkd::dynamics {

/// Force (N) and moment (N·mm) applied at the end-effector point, world frame.
struct Wrench {
    Vec3 force = Vec3::Zero();
    Vec3 moment = Vec3::Zero();

    Wrench scaled(double k) const { return {k * force, k * moment}; }
    bool is_zero() const { return force.isZero(0.0) && moment.isZero(0.0); }
};

/// Constant wrench over the time fractions [t0, t1] of the cycle.
struct LoadPhase {
    double t0 = 0.0;
    double t1 = 1.0;
    Wrench wrench;
};

/// Piecewise-constant end-effector load keyed to the fraction of the period.
/// Fractions not covered by any phase carry zero load.
struct LoadProfile {
    std::vector<LoadPhase> phases;

    static LoadProfile none() { return {}; }

    static LoadProfile constant(const Vec3& force, const Vec3& moment = Vec3::Zero())
    {
        return {{LoadPhase{0.0, 1.0, {force, moment}}}};
    }

    void validate() const
    {
        double last = 0.0;
        for (std::size_t i = 0; i < phases.size(); ++i) {
            const auto& p = phases[i];
            require(p.t0 >= 0.0 && p.t1 <= 1.0 && p.t0 <= p.t1, "LoadProfile: phase " + std::to_string(i) +
                                                                 " must satisfy 0 <= t0 <= t1 <= 1");
            require(p.t0 >= last, "LoadProfile: phases must be ordered and disjoint");
            require(p.wrench.force.allFinite() && p.wrench.moment.allFinite(), "LoadProfile: non-finite wrench");
            last = p.t1;
        }
    }

    /// Wrench at cycle fraction u; the first phase containing u wins.
    Wrench at(double u) const
    {
        for (const auto& p : phases) {
            if (u >= p.t0 && u <= p.t1) {
                return p.wrench;
            }
        }
        return {};
    }

    LoadProfile scaled(double k) const
    {
        LoadProfile out = *this;
        for (auto& p : out.phases) {
            p.wrench = p.wrench.scaled(k);
        }
        return out;
    }

    bool is_zero() const
    {
        for (const auto& p : phases) {
            if (!p.wrench.is_zero() && p.t1 > p.t0) {
                return false;
            }
        }
        return true;
    }
};

} // namespace overlinkd::dynamics
