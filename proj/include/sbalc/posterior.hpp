#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sbalc/cubature.hpp"
#include "sbalc/gp.hpp"
#include "sbalc/priors.hpp"
#include "sbalc/rng.hpp"

namespace sbalc {

/// Prior pool with self-normalized log importance weights.
struct WeightedPool {
    Eigen::MatrixXd points;      // N x d
    Eigen::VectorXd log_weights; // N, sums to 1 after exp when normalized
    bool normalized = false;
};

/// Surrogate posterior log-density: m(x) + log f(x) - log c.
inline double posterior_log_pdf(const GpModel& model, const PriorSpec& prior,
                                double log_c, const Eigen::VectorXd& x) {
    if (!std::isfinite(log_c))
        throw std::invalid_argument("posterior_log_pdf: log_c must be finite");
    double lf = log_prior_pdf(prior, x);
    if (!std::isfinite(lf)) return -std::numeric_limits<double>::infinity();
    return model.predict(x).first + lf - log_c;
}

inline WeightedPool weights_from_means(Eigen::MatrixXd pool,
                                       const Eigen::VectorXd& means) {
    if (pool.rows() == 0)
        throw std::invalid_argument("weights_from_means: empty pool");
    double mx = means.maxCoeff();
    if (!std::isfinite(mx))
        throw std::runtime_error(
            "weights_from_means: all weights underflow (flat -inf means)");
    double lse = mx + std::log((means.array() - mx).exp().sum());
    WeightedPool wp;
    wp.points = std::move(pool);
    wp.log_weights = means.array() - lse;
    wp.normalized = true;
    return wp;
}

inline WeightedPool weights_from_model(const GpModel& model,
                                       const Eigen::MatrixXd& pool) {
    return weights_from_means(pool, model.predict_batch(pool).first);
}

/// Self-normalized importance estimates of posterior mean and std.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd>
posterior_moments(const WeightedPool& wp) {
    if (!wp.normalized)
        throw std::invalid_argument("posterior_moments: pool not normalized");
    Eigen::VectorXd w = wp.log_weights.array().exp();
    Eigen::VectorXd mean = wp.points.transpose() * w;
    Eigen::VectorXd var = Eigen::VectorXd::Zero(wp.points.cols());
    for (Eigen::Index i = 0; i < wp.points.rows(); ++i) {
        Eigen::VectorXd c = wp.points.row(i).transpose() - mean;
        var += w[i] * c.cwiseProduct(c);
    }
    return {std::move(mean), var.cwiseMax(0.0).cwiseSqrt()};
}

inline double effective_sample_size(const WeightedPool& wp) {
    if (!wp.normalized)
        throw std::invalid_argument("effective_sample_size: pool not normalized");
    double ss = (2.0 * wp.log_weights.array()).exp().sum();
    return 1.0 / ss;
}

/// Multinomial resampling with replacement, proportional to weights.
inline Eigen::MatrixXd sir_resample(const WeightedPool& wp, std::size_t m,
                                    RngStream& rng) {
    if (!wp.normalized)
        throw std::invalid_argument("sir_resample: pool not normalized");
    if (m < 1) throw std::invalid_argument("sir_resample: m must be >= 1");
    const Eigen::Index n = wp.points.rows();
    Eigen::VectorXd cum(n);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        acc += std::exp(wp.log_weights[i]);
        cum[i] = acc;
    }
    cum[n - 1] = 1.0; // guard against rounding at the top end

    Eigen::MatrixXd out(static_cast<Eigen::Index>(m), wp.points.cols());
    for (std::size_t k = 0; k < m; ++k) {
        double u = rng.uniform01();
        Eigen::Index lo = 0, hi = n - 1;
        while (lo < hi) {
            Eigen::Index mid = (lo + hi) / 2;
            if (cum[mid] < u) lo = mid + 1;
            else hi = mid;
        }
        out.row(static_cast<Eigen::Index>(k)) = wp.points.row(lo);
    }
    return out;
}

} // namespace sbalc
