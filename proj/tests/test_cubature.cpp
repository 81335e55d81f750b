#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "sbalc/cubature.hpp"
#include "sbalc/rng.hpp"

using namespace sbalc;
using Catch::Approx;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

// direct (unshifted) mean of exponentials, usable when values are moderate
double naive_log_mean_exp(const Eigen::VectorXd& v) {
    return std::log(v.array().exp().mean());
}

} // namespace

TEST_CASE("log_mean_exp") {
    Eigen::VectorXd v = vec({0.2, -1.0, 3.5, 1.1});
    CHECK(log_mean_exp(v) == Approx(naive_log_mean_exp(v)).epsilon(1e-14));

    // shift invariance where the naive form would overflow
    Eigen::VectorXd big = v.array() + 800.0;
    CHECK(log_mean_exp(big) == Approx(log_mean_exp(v) + 800.0).epsilon(1e-14));

    Eigen::VectorXd c = Eigen::VectorXd::Constant(7, -4.2);
    CHECK(log_mean_exp(c) == Approx(-4.2).epsilon(1e-15));

    double ninf = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd allninf = Eigen::VectorXd::Constant(3, ninf);
    CHECK(log_mean_exp(allninf) == ninf);

    Eigen::VectorXd mixed = vec({0.0, ninf});
    CHECK(log_mean_exp(mixed) == Approx(std::log(0.5)).epsilon(1e-14));

    CHECK_THROWS_AS(log_mean_exp(Eigen::VectorXd()), std::invalid_argument);
}

TEST_CASE("plugin_evidence hand values") {
    CHECK(plugin_evidence(vec({std::log(2.0), std::log(4.0)})) ==
          Approx(std::log(3.0)).epsilon(1e-14));
    CHECK_THROWS_AS(plugin_evidence(vec({0.0})), std::invalid_argument);
}

TEST_CASE("bound_evidence ordering and hand value") {
    Eigen::VectorXd means = vec({-1.0, 0.5, 2.0});
    Eigen::VectorXd stds = vec({0.3, 0.0, 1.2});
    double b = 1.5;
    double up = bound_evidence(means, stds, b, BoundSide::upper);
    double low = bound_evidence(means, stds, b, BoundSide::lower);
    double mid = plugin_evidence(means);
    CHECK(low <= mid);
    CHECK(mid <= up);
    CHECK(up == Approx(naive_log_mean_exp(means + b * stds)).epsilon(1e-14));
    CHECK(low == Approx(naive_log_mean_exp(means - b * stds)).epsilon(1e-14));

    // zero predictive uncertainty collapses the bracket
    Eigen::VectorXd z = Eigen::VectorXd::Zero(3);
    CHECK(bound_evidence(means, z, b, BoundSide::upper) == Approx(mid));
    CHECK(bound_evidence(means, z, b, BoundSide::lower) == Approx(mid));

    CHECK_THROWS_AS(bound_evidence(means, stds, 0.0, BoundSide::upper),
                    std::invalid_argument);
}

TEST_CASE("estimator_cov") {
    // two-point hand case: means log 1 and log 3, c = 2, r = {0.5, 1.5}
    CHECK(estimator_cov(vec({std::log(1.0), std::log(3.0)})) ==
          Approx(0.5).epsilon(1e-14));

    // equal means: zero sampling variability
    CHECK(estimator_cov(Eigen::VectorXd::Constant(10, 1.7)) ==
          Approx(0.0).margin(1e-15));

    // cross-check against std-error / mean on the linear scale
    RngStream rng(5);
    Eigen::VectorXd m(50);
    for (Eigen::Index i = 0; i < m.size(); ++i) m[i] = rng.uniform(-1.0, 1.0);
    Eigen::VectorXd w = m.array().exp();
    double mean = w.mean();
    double ss = (w.array() - mean).square().sum();
    double expected = std::sqrt(ss / (50.0 * 49.0)) / mean;
    CHECK(estimator_cov(m) == Approx(expected).epsilon(1e-12));

    CHECK_THROWS_AS(estimator_cov(vec({0.0})), std::invalid_argument);
}

TEST_CASE("stopping_metric variants") {
    EvidenceEstimate est;
    est.log_c_plugin = std::log(2.0);
    est.log_c_upper = std::log(2.4);
    est.log_c_lower = std::log(1.8);
    CHECK(stopping_metric(est, StoppingVariant::upper_only) ==
          Approx(0.2).epsilon(1e-12));
    CHECK(stopping_metric(est, StoppingVariant::lower_only) ==
          Approx(0.1).epsilon(1e-12));
    CHECK(stopping_metric(est, StoppingVariant::two_sided) ==
          Approx(0.3).epsilon(1e-12));

    EvidenceEstimate tight;
    tight.log_c_plugin = tight.log_c_upper = tight.log_c_lower = -3.0;
    CHECK(stopping_metric(tight, StoppingVariant::two_sided) == Approx(0.0).margin(1e-15));
}

TEST_CASE("h_b values and continuity at zero") {
    CHECK(h_b(0.0, 1.0) == Approx(std::sqrt(2.0 / M_PI) / 2.0).epsilon(1e-15));
    CHECK(h_b(1.0, 1.0) == Approx(0.47888169832434474).epsilon(1e-12));
    CHECK(h_b(1e-12, 1.0) == Approx(h_b(0.0, 1.0)).epsilon(1e-9));
    CHECK(h_b(1e-12, 2.5) == Approx(h_b(0.0, 2.5)).epsilon(1e-9));
    CHECK_THROWS_AS(h_b(-0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(h_b(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("m_b_bound dominates h_b on [0, sigma0]") {
    CHECK(m_b_bound(1.0, 1.0) == Approx(0.7014634088262545).epsilon(1e-12));
    for (double sigma0 : {0.3, 1.0, 2.5}) {
        for (double b : {0.5, 1.0, 2.0}) {
            double m = m_b_bound(sigma0, b);
            for (int i = 0; i <= 200; ++i) {
                double s = sigma0 * i / 200.0;
                CHECK(h_b(s, b) <= m * (1.0 + 1e-12));
            }
        }
    }
}

TEST_CASE("expected_error_bound") {
    EvidenceEstimate est;
    est.b = 1.0;
    est.log_c_upper = std::log(2.0);
    est.log_c_lower = std::log(1.0);
    double expected = m_b_bound(1.0, 1.0) * 1.0;
    CHECK(expected_error_bound(est, 1.0) == Approx(expected).epsilon(1e-14));
}

TEST_CASE("estimate_evidence one-shot agrees with the pieces") {
    RngStream rng(17);
    Eigen::VectorXd means(30), stds(30);
    for (int i = 0; i < 30; ++i) {
        means[i] = rng.uniform(-5.0, 1.0);
        stds[i] = rng.uniform(0.0, 0.8);
    }
    EvidenceEstimate est = estimate_evidence(means, stds, 1.25);
    CHECK(est.log_c_plugin == Approx(plugin_evidence(means)));
    CHECK(est.log_c_upper ==
          Approx(bound_evidence(means, stds, 1.25, BoundSide::upper)));
    CHECK(est.log_c_lower ==
          Approx(bound_evidence(means, stds, 1.25, BoundSide::lower)));
    CHECK(est.cov_plugin == Approx(estimator_cov(means)));
    CHECK(est.pool_size == 30);
    CHECK(est.b == 1.25);
    CHECK(est.log_c_lower <= est.log_c_plugin);
    CHECK(est.log_c_plugin <= est.log_c_upper);
}
