#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace overlinkd {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: bad knot vectors, degenerate curves, out-of-range arguments.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// The loop cannot be closed at the requested actuator angle.
class AssemblyError : public Error {
public:
    AssemblyError(const std::string& what, double angle) : Error(what), angle_(angle) {}
    double angle() const noexcept { return angle_; }

private:
    double angle_;
};

/// Passive joint rate is unbounded (branch point of the closure map).
class SingularityError : public Error {
public:
    using Error::Error;
};

/// An iterative solver ran out of iterations.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual) : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

inline void require(bool condition, const std::string& message)
{
    if (!condition) {
        throw ValidationError(message);
    }
}

/// Wraps an angle into [0, 2π).
inline double wrap_two_pi(double angle)
{
    double w = std::fmod(angle, kTwoPi);
    if (w < 0.0) {
        w += kTwoPi;
    }
    if (w >= kTwoPi) {
        w = 0.0;
    }
    return w;
}

/// Wraps an angle into (-π, π].
inline double wrap_pi(double angle)
{
    double w = wrap_two_pi(angle + kPi) - kPi;
    return w <= -kPi ? w + kTwoPi : w;
}

} // namespace overlinkd
