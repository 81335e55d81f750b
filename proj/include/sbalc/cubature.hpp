#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sbalc/gp.hpp"
#include "sbalc/normal.hpp"

namespace sbalc {

enum class StoppingVariant { two_sided, upper_only, lower_only };
enum class BoundSide { upper, lower };

/// Evidence quantities of one iteration, all in log domain.
struct EvidenceEstimate {
    double log_c_plugin = 0.0;
    double log_c_upper = 0.0;
    double log_c_lower = 0.0;
    double cov_plugin = 0.0;
    std::size_t pool_size = 0;
    double b = 1.0;
};

/// Max-shifted log of the mean of exp(values).
inline double log_mean_exp(const Eigen::VectorXd& values) {
    if (values.size() == 0)
        throw std::invalid_argument("log_mean_exp: empty input");
    double mx = values.maxCoeff();
    if (!std::isfinite(mx)) return mx; // all -inf (or a stray +inf/nan)
    double acc = (values.array() - mx).exp().sum();
    return mx + std::log(acc / static_cast<double>(values.size()));
}

/// Plug-in evidence from posterior means over a prior pool.
inline double plugin_evidence(const Eigen::VectorXd& means) {
    if (means.size() < 2)
        throw std::invalid_argument("plugin_evidence: pool must have >= 2 points");
    return log_mean_exp(means);
}

inline double plugin_evidence(const GpModel& model, const Eigen::MatrixXd& pool) {
    return plugin_evidence(model.predict_batch(pool).first);
}

/// Credible-bound evidence: mean +/- b*std pushed through the pool average.
inline double bound_evidence(const Eigen::VectorXd& means,
                             const Eigen::VectorXd& stds, double b,
                             BoundSide side) {
    if (!(b > 0.0)) throw std::invalid_argument("bound_evidence: b must be > 0");
    double sign = side == BoundSide::upper ? 1.0 : -1.0;
    return log_mean_exp(means + sign * b * stds);
}

inline double bound_evidence(const GpModel& model, const Eigen::MatrixXd& pool,
                             double b, BoundSide side) {
    auto [means, stds] = model.predict_batch(pool);
    return bound_evidence(means, stds, b, side);
}

/// CoV of the Monte Carlo plug-in estimator, ratio form: with
/// r_j = exp(m_j - log c), CoV = sqrt(sum (r_j - 1)^2 / (N(N-1))).
inline double estimator_cov(const Eigen::VectorXd& means) {
    const Eigen::Index n = means.size();
    if (n < 2) throw std::invalid_argument("estimator_cov: need >= 2 pool points");
    double log_c = log_mean_exp(means);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        double r = std::exp(means[j] - log_c);
        acc += (r - 1.0) * (r - 1.0);
    }
    return std::sqrt(acc / (static_cast<double>(n) * static_cast<double>(n - 1)));
}

inline double estimator_cov(const GpModel& model, const Eigen::MatrixXd& pool) {
    return estimator_cov(model.predict_batch(pool).first);
}

/// Relative bound-width metric tested against eps_RE.
inline double stopping_metric(const EvidenceEstimate& est, StoppingVariant variant) {
    double up = std::exp(est.log_c_upper - est.log_c_plugin) - 1.0;
    double low = 1.0 - std::exp(est.log_c_lower - est.log_c_plugin);
    switch (variant) {
    case StoppingVariant::two_sided: return up + low;
    case StoppingVariant::upper_only: return up;
    case StoppingVariant::lower_only: return low;
    }
    return 0.0;
}

/// Ratio of expected-absolute-error integrand to the bound-gap
/// integrand; continuous extension sqrt(2/pi)/(2b) at sigma = 0.
inline double h_b(double sigma, double b) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("h_b: sigma must be >= 0");
    if (!(b > 0.0)) throw std::invalid_argument("h_b: b must be > 0");
    if (sigma == 0.0) return std::sqrt(2.0 / M_PI) / (2.0 * b);
    double num = std::exp(0.5 * sigma * sigma) * std::erf(sigma * M_SQRT1_2);
    return num / (2.0 * std::sinh(b * sigma));
}

/// Finite constant dominating h_b on [0, sigma0].
inline double m_b_bound(double sigma0, double b) {
    if (!(sigma0 > 0.0 && b > 0.0))
        throw std::invalid_argument("m_b_bound: arguments must be > 0");
    double small = std::exp(0.5) / (2.0 * b) * std::sqrt(2.0 / M_PI);
    double large = std::exp(0.5 * sigma0 * sigma0) / (2.0 * std::sinh(b));
    return std::max(small, large);
}

/// Diagnostic upper bound on E|c_n - c_plugin|, in linear scale.
inline double expected_error_bound(const EvidenceEstimate& est, double sigma0) {
    double gap = std::exp(est.log_c_upper) - std::exp(est.log_c_lower);
    return m_b_bound(sigma0, est.b) * gap;
}

/// One-shot evaluation of all evidence quantities over a pool.
inline EvidenceEstimate estimate_evidence(const Eigen::VectorXd& means,
                                          const Eigen::VectorXd& stds, double b) {
    EvidenceEstimate est;
    est.log_c_plugin = plugin_evidence(means);
    est.log_c_upper = bound_evidence(means, stds, b, BoundSide::upper);
    est.log_c_lower = bound_evidence(means, stds, b, BoundSide::lower);
    est.cov_plugin = estimator_cov(means);
    est.pool_size = static_cast<std::size_t>(means.size());
    est.b = b;
    return est;
}

inline EvidenceEstimate estimate_evidence(const GpModel& model,
                                          const Eigen::MatrixXd& pool, double b) {
    auto [means, stds] = model.predict_batch(pool);
    return estimate_evidence(means, stds, b);
}

} // namespace sbalc
