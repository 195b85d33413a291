#pragma once

#include "overlinkd/core/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

namespace overlinkd::synth {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Standard population size 4 + floor(3 ln n).
inline std::size_t default_population(std::size_t dim)
{
    return 4 + static_cast<std::size_t>(std::floor(3.0 * std::log(static_cast<double>(dim))));
}

/// (μ/μ_w, λ) CMA-ES with rank-one and rank-μ covariance updates and
/// cumulative step-size adaptation. Minimizes; the caller evaluates the
/// points returned by ask() and reports their values to tell().
class CmaEs {
public:
    CmaEs(VecX mean, double sigma, std::size_t lambda, std::uint64_t seed)
        : n_(static_cast<std::size_t>(mean.size())), lambda_(lambda), mean_(std::move(mean)), sigma_(sigma), rng_(seed)
    {
        require(n_ >= 1, "CmaEs: empty search space");
        require(lambda_ >= 2, "CmaEs: population must be at least 2");
        require(sigma_ > 0.0, "CmaEs: sigma must be positive");
        const double n = static_cast<double>(n_);
        mu_ = lambda_ / 2;
        weights_.resize(static_cast<Eigen::Index>(mu_));
        for (std::size_t i = 0; i < mu_; ++i) {
            weights_[static_cast<Eigen::Index>(i)] =
                std::log(static_cast<double>(lambda_) / 2.0 + 0.5) - std::log(static_cast<double>(i) + 1.0);
        }
        weights_ /= weights_.sum();
        mueff_ = 1.0 / weights_.squaredNorm();
        cc_ = (4.0 + mueff_ / n) / (n + 4.0 + 2.0 * mueff_ / n);
        cs_ = (mueff_ + 2.0) / (n + mueff_ + 5.0);
        c1_ = 2.0 / ((n + 1.3) * (n + 1.3) + mueff_);
        cmu_ = std::min(1.0 - c1_, 2.0 * (mueff_ - 2.0 + 1.0 / mueff_) / ((n + 2.0) * (n + 2.0) + mueff_));
        damps_ = 1.0 + 2.0 * std::max(0.0, std::sqrt((mueff_ - 1.0) / (n + 1.0)) - 1.0) + cs_;
        chin_ = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
        pc_ = VecX::Zero(mean_.size());
        ps_ = VecX::Zero(mean_.size());
        B_ = MatX::Identity(mean_.size(), mean_.size());
        D_ = VecX::Ones(mean_.size());
        C_ = MatX::Identity(mean_.size(), mean_.size());
    }

    std::size_t dimension() const noexcept { return n_; }
    std::size_t population() const noexcept { return lambda_; }
    double sigma() const noexcept { return sigma_; }
    const VecX& mean() const noexcept { return mean_; }
    std::size_t generation() const noexcept { return gen_; }

    /// max/min axis ratio of the current covariance.
    double axis_ratio() const { return D_.maxCoeff() / std::max(D_.minCoeff(), 1e-300); }

    std::vector<VecX> ask()
    {
        std::normal_distribution<double> gauss(0.0, 1.0);
        pop_.assign(lambda_, VecX());
        zs_.assign(lambda_, VecX());
        for (std::size_t k = 0; k < lambda_; ++k) {
            VecX z(mean_.size());
            for (Eigen::Index i = 0; i < z.size(); ++i) {
                z[i] = gauss(rng_);
            }
            zs_[k] = z;
            pop_[k] = mean_ + sigma_ * (B_ * D_.cwiseProduct(z));
        }
        return pop_;
    }

    void tell(const std::vector<double>& fitness)
    {
        require(fitness.size() == lambda_, "CmaEs::tell: fitness count does not match the population");
        std::vector<std::size_t> order(lambda_);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fitness[a] < fitness[b]; });

        const double n = static_cast<double>(n_);
        VecX old = mean_;
        mean_.setZero();
        VecX zmean = VecX::Zero(old.size());
        for (std::size_t i = 0; i < mu_; ++i) {
            double w = weights_[static_cast<Eigen::Index>(i)];
            mean_ += w * pop_[order[i]];
            zmean += w * zs_[order[i]];
        }
        ++gen_;
        ps_ = (1.0 - cs_) * ps_ + std::sqrt(cs_ * (2.0 - cs_) * mueff_) * (B_ * zmean);
        double psn = ps_.norm() / std::sqrt(1.0 - std::pow(1.0 - cs_, 2.0 * static_cast<double>(gen_)));
        bool hsig = psn / chin_ < 1.4 + 2.0 / (n + 1.0);
        VecX y = (mean_ - old) / sigma_;
        pc_ = (1.0 - cc_) * pc_ + (hsig ? std::sqrt(cc_ * (2.0 - cc_) * mueff_) : 0.0) * y;

        MatX rank_mu = MatX::Zero(C_.rows(), C_.cols());
        for (std::size_t i = 0; i < mu_; ++i) {
            VecX d = (pop_[order[i]] - old) / sigma_;
            rank_mu += weights_[static_cast<Eigen::Index>(i)] * d * d.transpose();
        }
        double delta = hsig ? 0.0 : cc_ * (2.0 - cc_);
        C_ = (1.0 - c1_ - cmu_) * C_ + c1_ * (pc_ * pc_.transpose() + delta * C_) + cmu_ * rank_mu;
        sigma_ *= std::exp((cs_ / damps_) * (ps_.norm() / chin_ - 1.0));

        C_ = 0.5 * (C_ + C_.transpose());
        Eigen::SelfAdjointEigenSolver<MatX> eig(C_);
        B_ = eig.eigenvectors();
        D_ = eig.eigenvalues().cwiseMax(1e-300).cwiseSqrt();
    }

private:
    std::size_t n_, lambda_, mu_ = 0, gen_ = 0;
    VecX mean_;
    double sigma_;
    std::mt19937_64 rng_;
    VecX weights_;
    double mueff_ = 0, cc_ = 0, cs_ = 0, c1_ = 0, cmu_ = 0, damps_ = 0, chin_ = 0;
    VecX pc_, ps_, D_;
    MatX B_, C_;
    std::vector<VecX> pop_, zs_;
};

} // namespace overlinkd::synth
