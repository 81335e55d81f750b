#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "sbalc/cubature.hpp"
#include "sbalc/priors.hpp"
#include "sbalc/quadrature.hpp"
#include "sbalc/rng.hpp"

namespace sbalc {

/// A log-likelihood callable plus the metadata a report needs.
struct LogLikelihoodModel {
    Eigen::Index dim = 0;
    std::function<double(const Eigen::VectorXd&)> eval;
    std::string name;
    double sigma_eps = 0.0;
    Eigen::MatrixXd observations;

    double operator()(const Eigen::VectorXd& x) const { return eval(x); }
};

// ---------------------------------------------------------------------------
// Example 1: sigmoid response, single parameter

inline double sigmoid_response(double x) {
    return 10.0 / (1.0 + std::exp(-1.2 * (x - 1.0)));
}

/// Unnormalized Gaussian log-likelihood around the observation R(1) = 5.
inline double example1_loglik(double x) {
    double r = 5.0 - sigmoid_response(x);
    return -r * r / (2.0 * 0.2 * 0.2);
}

inline PriorSpec example1_prior() {
    return PriorSpec({MarginalPrior::gaussian(1.5, 2.0)});
}

inline LogLikelihoodModel make_example1() {
    LogLikelihoodModel m;
    m.dim = 1;
    m.eval = [](const Eigen::VectorXd& x) { return example1_loglik(x[0]); };
    m.name = "example1";
    m.sigma_eps = 0.2;
    return m;
}

// ---------------------------------------------------------------------------
// Example 2: 3-DOF mass-spring system, uncertain k1, k2, k5

namespace detail {

inline Eigen::Matrix3d spring_stiffness(double k1, double k2, double k5) {
    const double k3 = 1.0, k4 = 1.0, k6 = 3.0;
    Eigen::Matrix3d k;
    k << k1 + k4 + k6, -k4, -k6,
         -k4, k2 + k4 + k5, -k5,
         -k6, -k5, k3 + k5 + k6;
    return k;
}

/// Eigenvalues of a symmetric 3x3 matrix by the trigonometric
/// closed-form solution of the characteristic cubic, ascending.
inline std::array<double, 3> sym3_eigenvalues(const Eigen::Matrix3d& a) {
    double q = a.trace() / 3.0;
    double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    double p2 = (a(0, 0) - q) * (a(0, 0) - q) + (a(1, 1) - q) * (a(1, 1) - q) +
                (a(2, 2) - q) * (a(2, 2) - q) + 2.0 * p1;
    if (p2 <= 0.0) return {q, q, q};
    double p = std::sqrt(p2 / 6.0);
    Eigen::Matrix3d b = (a - q * Eigen::Matrix3d::Identity()) / p;
    double r = b.determinant() / 2.0;
    r = std::clamp(r, -1.0, 1.0);
    double phi = std::acos(r) / 3.0;
    double e1 = q + 2.0 * p * std::cos(phi);
    double e3 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
    double e2 = 3.0 * q - e1 - e3;
    return {e3, e2, e1};
}

} // namespace detail

/// Natural frequencies (Hz, ascending) of the 3-DOF system with unit
/// masses, fixed k3 = k4 = 1.0 and k6 = 3.0 N/m.
inline Eigen::Vector3d mass_spring_frequencies(double k1, double k2, double k5) {
    if (!(k1 > 0.0 && k2 > 0.0 && k5 > 0.0))
        throw std::invalid_argument("mass_spring_frequencies: stiffnesses must be > 0");
    auto lam = detail::sym3_eigenvalues(detail::spring_stiffness(k1, k2, k5));
    if (!(lam[0] > 0.0))
        throw std::runtime_error(
            "mass_spring_frequencies: stiffness matrix not positive definite");
    Eigen::Vector3d f;
    for (int i = 0; i < 3; ++i) f[i] = std::sqrt(lam[static_cast<std::size_t>(i)]) / (2.0 * M_PI);
    return f;
}

/// 30 synthetic observation sets: frequencies at stiffness draws
/// N(1.5, 0.2^2) around the nominal values, redrawn if nonpositive.
inline Eigen::MatrixXd generate_observations(RngStream& rng) {
    Eigen::MatrixXd obs(30, 3);
    for (Eigen::Index r = 0; r < 30; ++r) {
        double k1, k2, k5;
        do {
            k1 = rng.normal(1.5, 0.2);
            k2 = rng.normal(1.5, 0.2);
            k5 = rng.normal(1.5, 0.2);
        } while (!(k1 > 0.0 && k2 > 0.0 && k5 > 0.0));
        obs.row(r) = mass_spring_frequencies(k1, k2, k5).transpose();
    }
    return obs;
}

inline double example2_loglik(const Eigen::VectorXd& x, const Eigen::MatrixXd& obs) {
    if (obs.rows() != 30 || obs.cols() != 3)
        throw std::invalid_argument("example2_loglik: observations must be 30x3");
    const double sigma_eps = 0.01;
    Eigen::Vector3d f = mass_spring_frequencies(x[0], x[1], x[2]);
    double ss = (obs.rowwise() - f.transpose()).squaredNorm();
    return -ss / (2.0 * sigma_eps * sigma_eps);
}

inline PriorSpec example2_prior() {
    return PriorSpec({MarginalPrior::gaussian(2.0, 0.3),
                      MarginalPrior::gaussian(2.0, 0.3),
                      MarginalPrior::gaussian(2.0, 0.3)});
}

inline LogLikelihoodModel make_example2(Eigen::MatrixXd obs) {
    LogLikelihoodModel m;
    m.dim = 3;
    m.observations = std::move(obs);
    m.sigma_eps = 0.01;
    m.name = "example2";
    m.eval = [o = m.observations](const Eigen::VectorXd& x) {
        return example2_loglik(x, o);
    };
    return m;
}

/// Flat log-likelihood fixture (evidence exactly 1, posterior = prior).
inline LogLikelihoodModel make_flat(Eigen::Index dim) {
    LogLikelihoodModel m;
    m.dim = dim;
    m.eval = [](const Eigen::VectorXd&) { return 0.0; };
    m.name = "flat";
    return m;
}

// ---------------------------------------------------------------------------
// Reference oracles on the true log-likelihood

/// 1-D adaptive quadrature of exp(L(x)) f(x) over the 1e-10-truncated
/// prior support. Linear scale.
inline double reference_evidence_quadrature(const LogLikelihoodModel& model,
                                            const PriorSpec& prior) {
    if (model.dim != 1 || prior.dim() != 1)
        throw std::invalid_argument("reference_evidence_quadrature: dim must be 1");
    const auto& m0 = prior.marginals[0];
    double a = m0.inverse_cdf(1e-10);
    double b = m0.inverse_cdf(1.0 - 1e-10);
    auto integrand = [&](double x) {
        Eigen::VectorXd v(1);
        v[0] = x;
        return std::exp(model.eval(v) + m0.log_pdf(x));
    };
    return adaptive_quadrature(integrand, a, b, 1e-8, 256);
}

/// Brute-force Monte Carlo evidence on the true log-likelihood.
/// Returns (log evidence, estimator CoV).
inline std::pair<double, double>
reference_evidence_mcs(const LogLikelihoodModel& model, const PriorSpec& prior,
                       std::size_t n, RngStream& rng) {
    if (n < 1000)
        throw std::invalid_argument("reference_evidence_mcs: n must be >= 1e3");
    Eigen::MatrixXd xs = sample_prior(prior, n, rng);
    Eigen::VectorXd ll(xs.rows());
    for (Eigen::Index i = 0; i < xs.rows(); ++i)
        ll[i] = model.eval(xs.row(i).transpose());
    return {plugin_evidence(ll), estimator_cov(ll)};
}

/// Same, on an externally supplied pool (common-random-number studies).
inline std::pair<double, double>
reference_evidence_mcs(const LogLikelihoodModel& model, const Eigen::MatrixXd& pool) {
    Eigen::VectorXd ll(pool.rows());
    for (Eigen::Index i = 0; i < pool.rows(); ++i)
        ll[i] = model.eval(pool.row(i).transpose());
    return {plugin_evidence(ll), estimator_cov(ll)};
}

} // namespace sbalc
