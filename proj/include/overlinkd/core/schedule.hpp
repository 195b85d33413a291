#pragma once

#include "overlinkd/core/types.hpp"

#include <vector>

namespace overlinkd {

struct ScheduleSample {
    double t = 0.0;     // s
    double q = 0.0;     // rad
    double omega = 0.0; // rad/s
};

/// Actuator angle as a function of time over one period.
struct ActuationSchedule {
    double period = 1.0;
    std::vector<ScheduleSample> samples;

    std::size_t size() const noexcept { return samples.size(); }

    void validate() const
    {
        require(period > 0.0 && std::isfinite(period), "ActuationSchedule: period must be positive");
        require(!samples.empty(), "ActuationSchedule: no samples");
        require(samples.front().t == 0.0, "ActuationSchedule: first sample must be at t = 0");
        for (std::size_t i = 1; i < samples.size(); ++i) {
            require(samples[i].t > samples[i - 1].t, "ActuationSchedule: times must be strictly increasing");
        }
        require(std::abs(samples.back().t - period) <= 1e-12 * period || samples.size() == 1,
                "ActuationSchedule: last sample must be at t = T");
    }
};

/// n samples at uniform times from 0 to T inclusive; q advances by one full
/// turn starting from q0.
inline ActuationSchedule constant_speed_schedule(double period, std::size_t n, double q0)
{
    require(period > 0.0, "constant_speed_schedule: period must be positive");
    require(n >= 2, "constant_speed_schedule: need at least 2 samples");
    ActuationSchedule s;
    s.period = period;
    s.samples.resize(n);
    double omega = kTwoPi / period;
    for (std::size_t i = 0; i < n; ++i) {
        double u = static_cast<double>(i) / static_cast<double>(n - 1);
        s.samples[i] = {i + 1 == n ? period : u * period, q0 + kTwoPi * u, omega};
    }
    return s;
}

} // namespace overlinkd
