#pragma once

#include "overlinkd/core/se3.hpp"

#include <vector>

namespace overlinkd::kinematics {

/// Fixed part of a link in the Rz(θ)·Tz(d)·Tx(a)·Rx(α) convention: carries the
/// frame from joint i (after its rotation) to joint i+1.
inline RigidTransform link_transform(double length, double twist, double offset = 0.0)
{
    double ca = std::cos(twist), sa = std::sin(twist);
    RigidTransform t;
    t.rotation << 1.0, 0.0, 0.0, 0.0, ca, -sa, 0.0, sa, ca;
    t.translation = Vec3(length, 0.0, offset);
    return t;
}

inline RigidTransform joint_step(double theta, double length, double twist, double offset = 0.0)
{
    return rot_z(theta) * link_transform(length, twist, offset);
}

struct DHParams {
    double length = 0.0;
    double twist = 0.0;
    double offset = 0.0;
};

/// Closure residual tolerance of an assembled configuration.
inline constexpr double kClosureTolerance = 1e-8;

/// Closes a single DH loop over joints 1..n-1 with joint 0 held fixed, by
/// damped Gauss-Newton on the twelve entries of (loop product - I). Updates
/// theta in place and returns the final Frobenius residual.
inline double close_dh_loop(const std::vector<DHParams>& links, std::vector<double>& theta, int max_iter = 200)
{
    const std::size_t n = links.size();
    const auto nu = static_cast<Eigen::Index>(n - 1);
    using Residual = Eigen::Matrix<double, 12, 1>;
    Mat4 gen = Mat4::Zero();
    gen(0, 1) = -1.0;
    gen(1, 0) = 1.0;

    auto evaluate = [&](const std::vector<double>& th, std::vector<Mat4>& steps) {
        steps.resize(n);
        Mat4 prod = Mat4::Identity();
        for (std::size_t j = 0; j < n; ++j) {
            steps[j] = joint_step(th[j], links[j].length, links[j].twist, links[j].offset).matrix();
            prod = prod * steps[j];
        }
        Mat4 d = prod - Mat4::Identity();
        Residual r;
        for (int c = 0; c < 4; ++c) {
            for (int row = 0; row < 3; ++row) {
                r(3 * c + row) = d(row, c);
            }
        }
        return r;
    };

    std::vector<Mat4> steps;
    Residual r = evaluate(theta, steps);
    if (r.norm() <= 1e-13) {
        return r.norm();
    }
    double lambda = 1e-9;
    std::vector<Mat4> prefix(n + 1), suffix(n + 1), cand_steps;
    for (int it = 0; it < max_iter; ++it) {
        // d(step_j)/dθj = gen · step_j, so prefix and suffix products give each column.
        prefix[0] = Mat4::Identity();
        suffix[n] = Mat4::Identity();
        for (std::size_t j = 0; j < n; ++j) {
            prefix[j + 1] = prefix[j] * steps[j];
        }
        for (std::size_t j = n; j-- > 0;) {
            suffix[j] = steps[j] * suffix[j + 1];
        }
        Eigen::Matrix<double, 12, Eigen::Dynamic> jac(12, nu);
        for (std::size_t j = 1; j < n; ++j) {
            Mat4 dp = prefix[j] * gen * steps[j] * suffix[j + 1];
            for (int c = 0; c < 4; ++c) {
                for (int row = 0; row < 3; ++row) {
                    jac(3 * c + row, static_cast<Eigen::Index>(j - 1)) = dp(row, c);
                }
            }
        }
        Eigen::MatrixXd jtj = jac.transpose() * jac;
        Eigen::VectorXd jtr = jac.transpose() * r;
        const double rn = r.norm();
        bool improved = false;
        for (int tries = 0; tries < 40; ++tries) {
            Eigen::MatrixXd a = jtj;
            a.diagonal().array() += lambda * (1.0 + jtj.diagonal().array());
            Eigen::VectorXd delta = a.ldlt().solve(-jtr);
            std::vector<double> cand = theta;
            for (std::size_t j = 1; j < n; ++j) {
                cand[j] += delta(static_cast<Eigen::Index>(j - 1));
            }
            Residual rc = evaluate(cand, cand_steps);
            if (rc.norm() < rn) {
                theta = std::move(cand);
                std::swap(steps, cand_steps);
                r = rc;
                lambda = std::max(lambda * 0.1, 1e-12);
                improved = true;
                break;
            }
            lambda = std::max(lambda * 10.0, 1e-9);
        }
        if (r.norm() <= 1e-13 || !improved) {
            break;
        }
    }
    return r.norm();
}

} // namespace overlinkd::kinematics
