#pragma once

#include "overlinkd/dynamics/keypoints.hpp"
#include "overlinkd/dynamics/load.hpp"
#include "overlinkd/kinematics/motion.hpp"

#include <vector>

namespace overlinkd::dynamics {

using kinematics::BennettDesign;

inline constexpr double kGravity = 9.81; // m/s²

/// Quasi-static actuator torque (N·mm) balancing a world-frame wrench at the
/// end-effector: τ = Jᵀ F with the linear Jacobian column paired with the
/// force and the angular column with the moment.
inline double torque(const BennettKinematics& kin, double q, const Wrench& w, std::optional<double> guess = std::nullopt)
{
    if (w.is_zero()) {
        return 0.0;
    }
    auto j = kin.jacobian(q, guess);
    Vec3 omega = j.twist.head<3>();
    return w.force.dot(j.linear) + w.moment.dot(omega);
}

inline double torque(const BennettDesign& d, double q, const Wrench& w) { return torque(BennettKinematics(d), q, w); }

struct EnergySample {
    double t = 0.0;      // s
    double q = 0.0;      // rad
    double torque = 0.0; // N·mm
    double power = 0.0;  // W, |τ ω| after the N·mm → N·m conversion
    double energy = 0.0; // J accumulated from t = 0
    double measure = 0.0; // ‖J_a‖, mm/rad; 0 where singular
    bool singular = false;
};

struct EnergyProfile {
    std::vector<EnergySample> samples;
    double energy = 0.0;     // J over the schedule
    double max_torque = 0.0; // N·mm, max |τ| over the samples
    std::size_t singular_frames = 0;
};

/// τ, power, trapezoidal energy and the singularity measure along a
/// schedule. The load is looked up by t / T. Samples where the Jacobian
/// does not exist are flagged and carry zero torque.
inline EnergyProfile energy_profile(const BennettKinematics& kin, const ActuationSchedule& schedule,
                                    const LoadProfile& load)
{
    schedule.validate();
    load.validate();
    EnergyProfile out;
    out.samples.reserve(schedule.size());
    double guess = kin.reference().theta[1];
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const auto& s = schedule.samples[i];
        EnergySample e;
        e.t = s.t;
        e.q = s.q;
        kinematics::LoopAngles a = kin.solve(s.q, guess);
        guess = a.theta[1];
        try {
            auto j = kin.jacobian(s.q, guess);
            Wrench w = load.at(s.t / schedule.period);
            e.measure = j.linear.norm();
            e.torque = w.is_zero() ? 0.0 : w.force.dot(j.linear) + w.moment.dot(j.twist.head<3>());
        } catch (const SingularityError&) {
            e.singular = true;
            ++out.singular_frames;
        }
        e.power = std::abs(e.torque * s.omega) * 1e-3;
        if (i > 0) {
            const auto& prev = out.samples.back();
            e.energy = prev.energy + 0.5 * (prev.power + e.power) * (e.t - prev.t);
        }
        out.max_torque = std::max(out.max_torque, std::abs(e.torque));
        out.samples.push_back(e);
    }
    out.energy = out.samples.back().energy;
    return out;
}

inline double cycle_energy(const BennettKinematics& kin, const ActuationSchedule& schedule, const LoadProfile& load)
{
    return energy_profile(kin, schedule, load).energy;
}

inline double max_torque(const BennettKinematics& kin, const ActuationSchedule& schedule, const LoadProfile& load)
{
    return energy_profile(kin, schedule, load).max_torque;
}

inline double cycle_energy(const BennettDesign& d, const ActuationSchedule& schedule, const LoadProfile& load)
{
    return cycle_energy(BennettKinematics(d), schedule, load);
}

inline double max_torque(const BennettDesign& d, const ActuationSchedule& schedule, const LoadProfile& load)
{
    return max_torque(BennettKinematics(d), schedule, load);
}

/// Dimensionless cost of transport E / (m g d) with E in J, m in kg, d in m.
inline double cost_of_transport(double energy, double mass, double distance)
{
    require(mass > 0.0 && std::isfinite(mass), "cost_of_transport: mass must be positive");
    require(distance > 0.0 && std::isfinite(distance), "cost_of_transport: distance must be positive");
    return energy / (mass * kGravity * distance);
}

} // namespace overlinkd::dynamics
