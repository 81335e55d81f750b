#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "sbalc/cubature.hpp"
#include "sbalc/gp.hpp"
#include "sbalc/hammersley.hpp"
#include "sbalc/nelder_mead.hpp"
#include "sbalc/priors.hpp"
#include "sbalc/rng.hpp"

namespace sbalc {

struct AcquisitionConfig {
    StoppingVariant variant = StoppingVariant::two_sided;
    double b = 1.0;
    std::size_t n_starts = 8;
    std::size_t max_local_iters = 200;
    std::size_t candidate_pool_size = 4096;

    void validate() const {
        if (n_starts < 1)
            throw std::invalid_argument("AcquisitionConfig: n_starts must be >= 1");
        if (candidate_pool_size < n_starts)
            throw std::invalid_argument(
                "AcquisitionConfig: candidate_pool_size must be >= n_starts");
        if (!(b > 0.0))
            throw std::invalid_argument("AcquisitionConfig: b must be > 0");
    }
};

namespace detail {

/// log of (e^{m+bs} - e^{m-bs}) and its one-sided variants.
inline double log_bracket(double m, double s, double b, StoppingVariant variant) {
    if (s <= 0.0) return -std::numeric_limits<double>::infinity();
    switch (variant) {
    case StoppingVariant::two_sided:
        return m + std::log(2.0 * std::sinh(b * s));
    case StoppingVariant::upper_only:
        return m + std::log(std::expm1(b * s));
    case StoppingVariant::lower_only:
        return m + std::log(-std::expm1(-b * s));
    }
    return -std::numeric_limits<double>::infinity();
}

} // namespace detail

/// Log learning-function score. -inf where the predictive std or the
/// prior density vanishes.
inline double log_learning_function(double mean, double std, double log_f,
                                    const AcquisitionConfig& cfg) {
    if (std <= 0.0 || !std::isfinite(log_f))
        return -std::numeric_limits<double>::infinity();
    return 2.0 * std::log(std) + detail::log_bracket(mean, std, cfg.b, cfg.variant) +
           log_f;
}

inline double log_learning_function(const GpModel& model, const PriorSpec& prior,
                                    const Eigen::VectorXd& x,
                                    const AcquisitionConfig& cfg) {
    auto [mean, std] = model.predict(x);
    return log_learning_function(mean, std, log_prior_pdf(prior, x), cfg);
}

/// Learning-function value in linear scale (may underflow for deeply
/// negative posterior means; use the log form for comparisons).
inline double learning_function(const GpModel& model, const PriorSpec& prior,
                                const Eigen::VectorXd& x,
                                const AcquisitionConfig& cfg) {
    return std::exp(log_learning_function(model, prior, x, cfg));
}

/// Next evaluation point: Hammersley screening over the box followed by
/// Nelder-Mead refinement from the best candidates. First-index ties.
inline Eigen::VectorXd select_next(const GpModel& model, const PriorSpec& prior,
                                   const Box& box, const AcquisitionConfig& cfg,
                                   [[maybe_unused]] RngStream& rng) {
    cfg.validate();
    const Eigen::Index d = box.dim();
    if (!(box.lo.array() < box.hi.array()).all())
        throw std::invalid_argument("select_next: empty box");

    Eigen::MatrixXd u = hammersley(cfg.candidate_pool_size,
                                   static_cast<std::size_t>(d));
    Eigen::MatrixXd cand(u.rows(), d);
    for (Eigen::Index i = 0; i < u.rows(); ++i)
        cand.row(i) = box.lo.transpose().array() +
                      u.row(i).array() * (box.hi - box.lo).transpose().array();

    auto [means, stds] = model.predict_batch(cand);
    std::vector<double> scores(static_cast<std::size_t>(cand.rows()));
    for (Eigen::Index i = 0; i < cand.rows(); ++i)
        scores[static_cast<std::size_t>(i)] = log_learning_function(
            means[i], stds[i], log_prior_pdf(prior, cand.row(i).transpose()), cfg);

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    if (!std::isfinite(scores[order.front()]))
        throw std::runtime_error(
            "select_next: learning function is -inf over the whole candidate "
            "pool; inspect the model and the truncated box");

    auto neg_score = [&](const Eigen::VectorXd& x) -> double {
        if (!box.contains(x)) return std::numeric_limits<double>::infinity();
        double s = log_learning_function(model, prior, x, cfg);
        return std::isfinite(s) ? -s : std::numeric_limits<double>::infinity();
    };

    Eigen::VectorXd step = 0.02 * (box.hi - box.lo);
    Eigen::VectorXd best_x;
    double best = -std::numeric_limits<double>::infinity();
    const std::size_t n_refine = std::min(cfg.n_starts, order.size());
    for (std::size_t s = 0; s < n_refine; ++s) {
        if (!std::isfinite(scores[order[s]])) break;
        Eigen::VectorXd x0 = cand.row(static_cast<Eigen::Index>(order[s])).transpose();
        auto r = nelder_mead(neg_score, x0, step, cfg.max_local_iters);
        double val = std::isfinite(r.value) ? -r.value : scores[order[s]];
        Eigen::VectorXd xr = std::isfinite(r.value) ? r.x : x0;
        if (val > best) {
            best = val;
            best_x = xr;
        }
    }

    auto near_training = [&](const Eigen::VectorXd& x) {
        const auto& xs = model.training_set().inputs;
        for (Eigen::Index i = 0; i < xs.rows(); ++i) {
            double rel = (x - xs.row(i).transpose()).norm() /
                         (1.0 + xs.row(i).norm());
            if (rel < 1e-9) return true;
        }
        return false;
    };

    if (near_training(best_x)) {
        for (std::size_t s = 0; s < order.size(); ++s) {
            Eigen::VectorXd x = cand.row(static_cast<Eigen::Index>(order[s])).transpose();
            if (std::isfinite(scores[order[s]]) && !near_training(x)) return x;
        }
        throw std::runtime_error(
            "select_next: every finite-score candidate duplicates a training "
            "point");
    }
    return best_x;
}

} // namespace sbalc
