#pragma once

#include "overlinkd/kinematics/motion.hpp"

#include <algorithm>
#include <vector>

namespace overlinkd::dynamics {

using kinematics::BennettKinematics;

/// Key point o_k that the end-effector must reach at cumulative time
/// fraction T^k of the period.
struct KeyPoint {
    Vec3 point = Vec3::Zero();
    double fraction = 1.0;
};

struct KeyPointSpec {
    std::vector<KeyPoint> points;

    void validate() const
    {
        require(!points.empty(), "KeyPointSpec: at least one key point is required");
        double prev = 0.0;
        for (std::size_t k = 0; k < points.size(); ++k) {
            require(points[k].point.allFinite(), "KeyPointSpec: key point " + std::to_string(k) + " is not finite");
            require(points[k].fraction > prev, "KeyPointSpec: time fractions must be strictly increasing and positive");
            prev = points[k].fraction;
        }
        require(std::abs(points.back().fraction - 1.0) <= 1e-12, "KeyPointSpec: the intervals must sum to 1");
    }
};

/// Piecewise-linear arc length of the end-effector path over one actuator
/// turn, sampled densely in q.
class ArcTable {
public:
    ArcTable(const BennettKinematics& kin, double q_start, std::size_t n)
    {
        require(n >= 16, "ArcTable: too few samples");
        q_.resize(n + 1);
        s_.resize(n + 1);
        theta2_.resize(n + 1);
        pts_.resize(n + 1);
        double guess = kin.solve(q_start).theta[1];
        for (std::size_t i = 0; i <= n; ++i) {
            q_[i] = q_start + kTwoPi * static_cast<double>(i) / static_cast<double>(n);
            auto f = kin.fk(q_[i], guess);
            guess = f.angles.theta[1];
            theta2_[i] = guess;
            pts_[i] = f.ee;
            s_[i] = i == 0 ? 0.0 : s_[i - 1] + (pts_[i] - pts_[i - 1]).norm();
        }
    }

    double q_begin() const { return q_.front(); }
    double length() const { return s_.back(); }
    std::size_t size() const { return q_.size(); }
    const std::vector<Vec3>& points() const { return pts_; }
    double q(std::size_t i) const { return q_[i]; }
    double theta2(std::size_t i) const { return theta2_[i]; }

    /// Arc length from the start of the table to actuator angle q.
    double arc_at(double q) const
    {
        double x = (q - q_.front()) / step();
        auto i = static_cast<std::size_t>(std::clamp(std::floor(x), 0.0, static_cast<double>(q_.size() - 2)));
        double u = x - static_cast<double>(i);
        return s_[i] + u * (s_[i + 1] - s_[i]);
    }

    /// Actuator angle at arc length s (inverse of arc_at).
    double q_at_arc(double s) const
    {
        auto it = std::upper_bound(s_.begin(), s_.end(), s);
        std::size_t i = it == s_.begin() ? 0 : static_cast<std::size_t>(it - s_.begin()) - 1;
        i = std::min(i, s_.size() - 2);
        double ds = s_[i + 1] - s_[i];
        double u = ds > 0.0 ? std::clamp((s - s_[i]) / ds, 0.0, 1.0) : 0.0;
        return q_[i] + u * step();
    }

    /// ds/dq at q, interpolated between centred node slopes.
    double slope_at(double q) const
    {
        auto node = [&](std::size_t i) {
            std::size_t n = q_.size() - 1;
            std::size_t lo = i == 0 ? n - 1 : i - 1;
            std::size_t hi = i == n ? 1 : i + 1;
            double dlo = i == 0 ? s_[n] - s_[lo] : s_[i] - s_[lo];
            double dhi = i == n ? s_[hi] : s_[hi] - s_[i];
            return (dlo + dhi) / (2.0 * step());
        };
        double x = (q - q_.front()) / step();
        auto i = static_cast<std::size_t>(std::clamp(std::floor(x), 0.0, static_cast<double>(q_.size() - 2)));
        double u = std::clamp(x - static_cast<double>(i), 0.0, 1.0);
        return (1.0 - u) * node(i) + u * node(i + 1);
    }

    /// Index of the table sample nearest to p (the duplicate end sample excluded).
    std::size_t nearest(const Vec3& p) const
    {
        std::size_t best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
            double d = (pts_[i] - p).squaredNorm();
            if (d < bd) {
                bd = d;
                best = i;
            }
        }
        return best;
    }

private:
    double step() const { return q_[1] - q_[0]; }

    std::vector<double> q_, s_, theta2_;
    std::vector<Vec3> pts_;
};

struct KeyPointMatch {
    double q = 0.0;        // actuator angle of the closest trace point
    double distance = 0.0; // mm from the key point to the trace
};

/// Closest point of the traced path to p: nearest table sample, refined by
/// root finding on (ee(q) − p)·dee/dq over the neighbouring table intervals.
inline KeyPointMatch closest_trace_point(const BennettKinematics& kin, const ArcTable& table, const Vec3& p)
{
    std::size_t i = table.nearest(p);
    std::size_t n = table.size() - 1;
    std::size_t lo_i = i == 0 ? n - 1 : i - 1;
    double q_lo = i == 0 ? table.q(lo_i) - kTwoPi : table.q(lo_i);
    double q_hi = table.q(i + 1);
    double guess = table.theta2(i);
    auto grad = [&](double q) {
        auto j = kin.jacobian(q, guess);
        return (kin.fk(q, guess).ee - p).dot(j.linear);
    };
    auto dist = [&](double q) { return (kin.fk(q, guess).ee - p).norm(); };
    double best_q = table.q(i);
    double best_d = dist(best_q);
    // Illinois-modified regula falsi on the bracketed sign change.
    auto refine = [&](double a, double b) {
        double fa, fb;
        try {
            fa = grad(a);
            fb = grad(b);
        } catch (const SingularityError&) {
            return;
        }
        if ((fa < 0.0) == (fb < 0.0)) {
            return;
        }
        int side = 0;
        for (int it = 0; it < 60 && b - a > 1e-14; ++it) {
            double m = (a * fb - b * fa) / (fb - fa);
            if (!(m > a && m < b)) {
                m = 0.5 * (a + b);
            }
            double fm;
            try {
                fm = grad(m);
            } catch (const SingularityError&) {
                break;
            }
            if (fm == 0.0) {
                a = b = m;
                break;
            }
            if ((fm < 0.0) == (fa < 0.0)) {
                a = m;
                fa = fm;
                if (side == -1) {
                    fb *= 0.5;
                }
                side = -1;
            } else {
                b = m;
                fb = fm;
                if (side == 1) {
                    fa *= 0.5;
                }
                side = 1;
            }
        }
        double qm = 0.5 * (a + b);
        double dm = dist(qm);
        if (dm < best_d) {
            best_d = dm;
            best_q = qm;
        }
    };
    refine(q_lo, table.q(i));
    refine(table.q(i), q_hi);
    return {best_q, best_d};
}

struct KeyPointSchedule {
    ActuationSchedule schedule;
    std::vector<KeyPointMatch> matches;
    bool ordered = true; // key points met in the specified order along the motion
};

/// Schedule over one period T such that the end-effector passes key point k
/// at time T^k·T and its arc length progresses linearly in time between
/// consecutive key points. The period starts at the last key point. The
/// uniform grid of n samples is merged with the key times. Key points are
/// associated with their closest trace points; when these are not in
/// cyclic order, a constant arc-speed schedule from the last key point is
/// returned with `ordered` cleared.
inline KeyPointSchedule keypoint_schedule_lenient(const BennettKinematics& kin, const KeyPointSpec& spec, double period,
                                                  std::size_t n, std::size_t table_size = 1440)
{
    spec.validate();
    require(period > 0.0, "keypoint_schedule: period must be positive");
    require(n >= 2, "keypoint_schedule: need at least 2 samples");
    const std::size_t m = spec.points.size();

    KeyPointSchedule out;
    ArcTable table(kin, kin.reference().theta[0], table_size);
    out.matches.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        out.matches[k] = closest_trace_point(kin, table, spec.points[k].point);
    }
    const double q0 = table.q_begin();
    const double length = table.length();
    const double q_start = q0 + wrap_two_pi(out.matches[m - 1].q - q0);
    const double s_start = table.arc_at(q_start);
    // Arc length from q_start along the motion, and its inverse, over one turn.
    auto arc_rel = [&](double q) {
        double s = table.arc_at(q0 + wrap_two_pi(q - q0)) - s_start;
        return s < 0.0 ? s + length : s;
    };
    auto q_rel = [&](double s) {
        double a = s_start + s;
        if (a >= length) {
            a -= length;
        }
        double q = table.q_at_arc(a);
        return q_start + wrap_two_pi(q - q_start);
    };
    auto slope = [&](double q) { return table.slope_at(q0 + wrap_two_pi(q - q0)); };

    // Knots (time, arc, q) of the piecewise-linear arc schedule.
    std::vector<double> kt = {0.0}, ks = {0.0}, kq = {q_start};
    for (std::size_t k = 0; k + 1 < m; ++k) {
        double qk = q_start + wrap_two_pi(out.matches[k].q - q_start);
        if (qk <= kq.back() + 1e-12) {
            out.ordered = false;
            break;
        }
        kt.push_back(spec.points[k].fraction * period);
        kq.push_back(qk);
        ks.push_back(arc_rel(qk));
    }
    if (!out.ordered) {
        kt = {0.0};
        ks = {0.0};
        kq = {q_start};
    }
    kt.push_back(period);
    ks.push_back(length);
    kq.push_back(q_start + kTwoPi);

    std::vector<double> times;
    for (std::size_t i = 0; i < n; ++i) {
        times.push_back(period * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    times.insert(times.end(), kt.begin() + 1, kt.end() - 1);
    std::sort(times.begin(), times.end());
    std::vector<double> merged;
    for (double t : times) {
        if (merged.empty() || t - merged.back() > 1e-9 * period) {
            merged.push_back(t);
        } else if (std::find(kt.begin(), kt.end(), t) != kt.end()) {
            merged.back() = t;
        }
    }
    merged.back() = period;

    out.schedule.period = period;
    std::size_t seg = 0;
    for (double t : merged) {
        while (seg + 2 < kt.size() && t > kt[seg + 1]) {
            ++seg;
        }
        double dt = kt[seg + 1] - kt[seg];
        double u = (t - kt[seg]) / dt;
        double speed = (ks[seg + 1] - ks[seg]) / dt;
        double q;
        auto hit = std::find(kt.begin(), kt.end(), t);
        if (hit != kt.end()) {
            q = kq[static_cast<std::size_t>(hit - kt.begin())];
        } else {
            q = q_rel(ks[seg] + u * (ks[seg + 1] - ks[seg]));
        }
        double ds = slope(q);
        double omega = ds > 1e-12 ? speed / ds : 0.0;
        out.schedule.samples.push_back({t, q, omega});
    }
    return out;
}

/// Strict variant: every key point must lie within 1e-3 mm of the trace and
/// be met in order; otherwise a ValidationError names the key point.
inline ActuationSchedule keypoint_schedule(const BennettKinematics& kin, const KeyPointSpec& spec, double period,
                                           std::size_t n = 120)
{
    KeyPointSchedule ks = keypoint_schedule_lenient(kin, spec, period, n);
    for (std::size_t k = 0; k < ks.matches.size(); ++k) {
        if (ks.matches[k].distance > 1e-3) {
            throw ValidationError("keypoint_schedule: key point " + std::to_string(k + 1) + " is " +
                                  std::to_string(ks.matches[k].distance) + " mm away from the trace");
        }
    }
    if (!ks.ordered) {
        throw ValidationError("keypoint_schedule: key points are not met in the specified order");
    }
    return ks.schedule;
}

} // namespace overlinkd::dynamics
