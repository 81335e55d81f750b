#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "sbalc/normal.hpp"
#include "sbalc/rng.hpp"

namespace sbalc {

/// One independent marginal of the parameter prior.
struct MarginalPrior {
    enum class Kind { gaussian, uniform };

    Kind kind;
    double a; // mean (gaussian) or lower bound (uniform)
    double b; // std (gaussian) or upper bound (uniform)

    static MarginalPrior gaussian(double mean, double std) {
        if (!(std > 0.0))
            throw std::invalid_argument("gaussian prior: std must be > 0");
        return {Kind::gaussian, mean, std};
    }

    static MarginalPrior uniform(double lower, double upper) {
        if (!(lower < upper))
            throw std::invalid_argument("uniform prior: lower must be < upper");
        return {Kind::uniform, lower, upper};
    }

    double log_pdf(double x) const {
        switch (kind) {
        case Kind::gaussian:
            return log_normal_pdf((x - a) / b) - std::log(b);
        case Kind::uniform:
            if (x < a || x > b) return -std::numeric_limits<double>::infinity();
            return -std::log(b - a);
        }
        return 0.0; // unreachable
    }

    double cdf(double x) const {
        switch (kind) {
        case Kind::gaussian:
            return normal_cdf((x - a) / b);
        case Kind::uniform:
            if (x <= a) return 0.0;
            if (x >= b) return 1.0;
            return (x - a) / (b - a);
        }
        return 0.0;
    }

    double inverse_cdf(double p) const {
        if (!(p > 0.0 && p < 1.0))
            throw std::invalid_argument("inverse_cdf: p must lie in (0,1)");
        switch (kind) {
        case Kind::gaussian:
            return a + b * normal_quantile(p);
        case Kind::uniform:
            return a + p * (b - a);
        }
        return 0.0;
    }
};

/// Per-dimension closed intervals [lo_j, hi_j].
struct Box {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;

    Eigen::Index dim() const { return lo.size(); }

    bool contains(const Eigen::VectorXd& x, double tol = 0.0) const {
        for (Eigen::Index j = 0; j < lo.size(); ++j)
            if (x[j] < lo[j] - tol || x[j] > hi[j] + tol) return false;
        return true;
    }
};

/// Joint prior as a product of independent marginals.
struct PriorSpec {
    std::vector<MarginalPrior> marginals;

    explicit PriorSpec(std::vector<MarginalPrior> m) : marginals(std::move(m)) {
        if (marginals.empty())
            throw std::invalid_argument("PriorSpec: need at least one marginal");
    }

    Eigen::Index dim() const { return static_cast<Eigen::Index>(marginals.size()); }
};

inline double log_prior_pdf(const PriorSpec& prior, const Eigen::VectorXd& x) {
    if (x.size() != prior.dim())
        throw std::invalid_argument("log_prior_pdf: dimension mismatch");
    double lp = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j)
        lp += prior.marginals[static_cast<std::size_t>(j)].log_pdf(x[j]);
    return lp;
}

/// i.i.d. prior draws, one row per sample. Deterministic given the stream.
inline Eigen::MatrixXd sample_prior(const PriorSpec& prior, std::size_t n,
                                    RngStream& rng) {
    if (n < 1) throw std::invalid_argument("sample_prior: n must be >= 1");
    const Eigen::Index d = prior.dim();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), d);
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            out(i, j) =
                prior.marginals[static_cast<std::size_t>(j)].inverse_cdf(rng.uniform01());
    return out;
}

/// Truncated design box between the delta and 1-delta prior quantiles.
inline Box truncated_box(const PriorSpec& prior, double delta) {
    if (!(delta > 0.0 && delta < 0.5))
        throw std::invalid_argument("truncated_box: delta must lie in (0, 0.5)");
    const Eigen::Index d = prior.dim();
    Box box;
    box.lo.resize(d);
    box.hi.resize(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const auto& m = prior.marginals[static_cast<std::size_t>(j)];
        box.lo[j] = m.inverse_cdf(delta);
        box.hi[j] = m.inverse_cdf(1.0 - delta);
    }
    return box;
}

/// Map unit-cube points into the delta-truncated prior box via the
/// inverse marginal CDFs rescaled to [delta, 1-delta].
inline Eigen::MatrixXd map_unit_to_box(const Eigen::MatrixXd& u,
                                       const PriorSpec& prior, double delta) {
    if (u.cols() != prior.dim())
        throw std::invalid_argument("map_unit_to_box: dimension mismatch");
    Eigen::MatrixXd out(u.rows(), u.cols());
    for (Eigen::Index i = 0; i < u.rows(); ++i)
        for (Eigen::Index j = 0; j < u.cols(); ++j) {
            double p = delta + u(i, j) * (1.0 - 2.0 * delta);
            out(i, j) = prior.marginals[static_cast<std::size_t>(j)].inverse_cdf(p);
        }
    return out;
}

} // namespace sbalc
