#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sbalc/hammersley.hpp"
#include "sbalc/nelder_mead.hpp"

namespace sbalc {

/// GP hyperparameters: constant mean, process std, per-dimension
/// lengthscales. Lengthscales refer to standardized inputs when the
/// owning model standardizes (see GpModel::input_shift/input_scale).
struct Hyperparams {
    double beta = 0.0;
    double sigma0 = 1.0;
    Eigen::VectorXd lengthscales;

    void validate() const {
        if (!(sigma0 > 0.0))
            throw std::invalid_argument("Hyperparams: sigma0 must be > 0");
        for (Eigen::Index j = 0; j < lengthscales.size(); ++j)
            if (!(lengthscales[j] > 0.0))
                throw std::invalid_argument("Hyperparams: lengthscales must be > 0");
    }
};

/// Paired design points and log-likelihood values.
struct TrainingSet {
    Eigen::MatrixXd inputs;  // n x d
    Eigen::VectorXd outputs; // n

    Eigen::Index size() const { return inputs.rows(); }
    Eigen::Index dim() const { return inputs.cols(); }

    void validate() const {
        if (inputs.rows() != outputs.size())
            throw std::invalid_argument("TrainingSet: row count mismatch");
        if (inputs.rows() < 2)
            throw std::invalid_argument("TrainingSet: need at least 2 points");
        if (!outputs.allFinite() || !inputs.allFinite())
            throw std::invalid_argument("TrainingSet: non-finite entries");
        for (Eigen::Index i = 0; i < inputs.rows(); ++i)
            for (Eigen::Index k = i + 1; k < inputs.rows(); ++k)
                if ((inputs.row(i) - inputs.row(k)).norm() == 0.0)
                    throw std::invalid_argument("TrainingSet: duplicate design points");
    }
};

/// Squared-exponential kernel on raw coordinates.
inline double kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
                     const Hyperparams& hp) {
    if (x.size() != x2.size() || x.size() != hp.lengthscales.size())
        throw std::invalid_argument("kernel: dimension mismatch");
    double q = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        double t = (x[j] - x2[j]) / hp.lengthscales[j];
        q += t * t;
    }
    return hp.sigma0 * hp.sigma0 * std::exp(-0.5 * q);
}

namespace detail {

inline Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& z,
                                     const Hyperparams& hp) {
    const Eigen::Index n = z.rows();
    Eigen::MatrixXd scaled = z.array().rowwise() /
                             hp.lengthscales.transpose().array();
    Eigen::VectorXd sq = scaled.rowwise().squaredNorm();
    Eigen::MatrixXd k = -2.0 * scaled * scaled.transpose();
    k.colwise() += sq;
    k.rowwise() += sq.transpose();
    return (hp.sigma0 * hp.sigma0) * (-0.5 * k.array()).exp().matrix();
}

struct Factorization {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double nugget = 0.0; // absolute value added to the diagonal
};

/// Cholesky with nugget escalation: start at 1e-10*sigma0^2, grow x10
/// up to 1e-4*sigma0^2, then give up.
inline std::optional<Factorization> factorize(const Eigen::MatrixXd& k,
                                              double sigma0_sq) {
    for (double rel = 1e-10; rel <= 1e-4 * 1.0000001; rel *= 10.0) {
        Eigen::MatrixXd kn = k;
        kn.diagonal().array() += rel * sigma0_sq;
        Eigen::LLT<Eigen::MatrixXd> llt(kn);
        if (llt.info() == Eigen::Success)
            return Factorization{std::move(llt), rel * sigma0_sq};
    }
    return std::nullopt;
}

} // namespace detail

/// Log marginal likelihood of the outputs under the GP prior with the
/// given hyperparameters (nugget-regularized kernel matrix).
inline double log_marginal_likelihood(const TrainingSet& train,
                                      const Hyperparams& hp) {
    hp.validate();
    const Eigen::Index n = train.size();
    Eigen::MatrixXd k = detail::kernel_matrix(train.inputs, hp);
    auto fact = detail::factorize(k, hp.sigma0 * hp.sigma0);
    if (!fact)
        throw std::runtime_error(
            "log_marginal_likelihood: kernel matrix not positive definite "
            "after nugget escalation (degenerate design)");
    Eigen::VectorXd r = train.outputs.array() - hp.beta;
    Eigen::VectorXd alpha = fact->llt.solve(r);
    double log_det = 2.0 * fact->llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return -0.5 * r.dot(alpha) - 0.5 * log_det -
           0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
}

struct FitConfig {
    std::size_t n_starts = 8;
    std::size_t max_local_iters = 400;
    double scale_lo = 1e-3; // search box, relative to data scales
    double scale_hi = 1e3;
};

/// Fitted GP surrogate. Immutable after construction; predict and
/// predict_batch are read-only.
class GpModel {
public:
    /// Factorize with fixed hyperparameters. Standardization defaults to
    /// per-dimension training mean/std; pass shift=0, scale=1 to disable.
    static GpModel build(const TrainingSet& train, const Hyperparams& hp,
                         std::optional<Eigen::VectorXd> shift = std::nullopt,
                         std::optional<Eigen::VectorXd> scale = std::nullopt) {
        hp.validate();
        GpModel m;
        m.train_ = train;
        m.hp_ = hp;
        const Eigen::Index d = train.dim();
        if (shift && scale) {
            m.input_shift_ = *shift;
            m.input_scale_ = *scale;
        } else {
            m.input_shift_ = train.inputs.colwise().mean();
            m.input_scale_.resize(d);
            for (Eigen::Index j = 0; j < d; ++j) {
                double s = std::sqrt(
                    (train.inputs.col(j).array() - m.input_shift_[j]).square().sum() /
                    static_cast<double>(std::max<Eigen::Index>(train.size() - 1, 1)));
                m.input_scale_[j] = s > 1e-12 ? s : 1.0;
            }
        }
        m.z_ = m.standardize(train.inputs);
        Eigen::MatrixXd k = detail::kernel_matrix(m.z_, hp);
        auto fact = detail::factorize(k, hp.sigma0 * hp.sigma0);
        if (!fact)
            throw std::runtime_error("GpModel: kernel factorization failed");
        m.nugget_ = fact->nugget;
        m.chol_ = std::move(fact->llt);
        m.weights_ = m.chol_.solve((train.outputs.array() - hp.beta).matrix());
        return m;
    }

    std::pair<double, double> predict(const Eigen::VectorXd& x) const {
        if (x.size() != train_.dim())
            throw std::invalid_argument("predict: dimension mismatch");
        Eigen::VectorXd zx = ((x - input_shift_).array() / input_scale_.array() /
                              hp_.lengthscales.array())
                                 .matrix();
        Eigen::MatrixXd zs = z_.array().rowwise() / hp_.lengthscales.transpose().array();
        Eigen::VectorXd kvec =
            (hp_.sigma0 * hp_.sigma0) *
            (-0.5 * (zs.rowwise() - zx.transpose()).rowwise().squaredNorm().array())
                .exp();
        double mean = hp_.beta + kvec.dot(weights_);
        Eigen::VectorXd v = chol_.matrixL().solve(kvec);
        double var = hp_.sigma0 * hp_.sigma0 - v.squaredNorm();
        return {mean, std::sqrt(std::max(0.0, var))};
    }

    /// Vectorized predict over rows of xs.
    std::pair<Eigen::VectorXd, Eigen::VectorXd>
    predict_batch(const Eigen::MatrixXd& xs) const {
        if (xs.cols() != train_.dim())
            throw std::invalid_argument("predict_batch: dimension mismatch");
        const Eigen::Index m = xs.rows();
        Eigen::MatrixXd zq = standardize(xs);
        Eigen::MatrixXd zqs = zq.array().rowwise() / hp_.lengthscales.transpose().array();
        Eigen::MatrixXd zts = z_.array().rowwise() / hp_.lengthscales.transpose().array();
        Eigen::VectorXd qn = zqs.rowwise().squaredNorm();
        Eigen::VectorXd tn = zts.rowwise().squaredNorm();
        Eigen::MatrixXd cross = -2.0 * zts * zqs.transpose(); // n x m
        cross.colwise() += tn;
        cross.rowwise() += qn.transpose();
        Eigen::MatrixXd kmat =
            (hp_.sigma0 * hp_.sigma0) * (-0.5 * cross.array()).exp().matrix();
        Eigen::VectorXd means =
            (kmat.transpose() * weights_).array() + hp_.beta;
        Eigen::MatrixXd v = chol_.matrixL().solve(kmat);
        Eigen::VectorXd stds(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            double var = hp_.sigma0 * hp_.sigma0 - v.col(i).squaredNorm();
            stds[i] = std::sqrt(std::max(0.0, var));
        }
        return {std::move(means), std::move(stds)};
    }

    const Hyperparams& hyperparams() const { return hp_; }
    const TrainingSet& training_set() const { return train_; }
    double nugget() const { return nugget_; }
    const Eigen::VectorXd& input_shift() const { return input_shift_; }
    const Eigen::VectorXd& input_scale() const { return input_scale_; }

    /// Regularized kernel matrix reconstructed from the cached factor.
    Eigen::MatrixXd regularized_kernel() const {
        Eigen::MatrixXd l = chol_.matrixL();
        return l * l.transpose();
    }

private:
    GpModel() = default;

    Eigen::MatrixXd standardize(const Eigen::MatrixXd& x) const {
        return (x.rowwise() - input_shift_.transpose()).array().rowwise() /
               input_scale_.transpose().array();
    }

    Hyperparams hp_;
    TrainingSet train_;
    Eigen::MatrixXd z_; // standardized training inputs
    Eigen::LLT<Eigen::MatrixXd> chol_;
    Eigen::VectorXd weights_;
    Eigen::VectorXd input_shift_, input_scale_;
    double nugget_ = 0.0;
};

/// Maximum-likelihood fit: multi-start Nelder-Mead over log(sigma0) and
/// log(lengthscales) on standardized inputs, with beta profiled out in
/// closed form at every objective evaluation.
inline GpModel fit(const TrainingSet& train, const FitConfig& cfg = {}) {
    train.validate();
    const Eigen::Index d = train.dim();
    const Eigen::Index n = train.size();

    Eigen::VectorXd shift = train.inputs.colwise().mean();
    Eigen::VectorXd scale(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        double s = std::sqrt((train.inputs.col(j).array() - shift[j]).square().sum() /
                             static_cast<double>(n - 1));
        scale[j] = s > 1e-12 ? s : 1.0;
    }
    Eigen::MatrixXd z = (train.inputs.rowwise() - shift.transpose())
                            .array()
                            .rowwise() /
                        scale.transpose().array();

    double sy = std::sqrt((train.outputs.array() - train.outputs.mean()).square().sum() /
                          static_cast<double>(n - 1));
    if (!(sy > 1e-12)) sy = 1e-6 * (1.0 + std::abs(train.outputs.mean()));

    // theta = [log sigma0, log l_1 .. log l_d]; beta profiled by GLS.
    auto objective = [&](const Eigen::VectorXd& theta) -> double {
        Hyperparams hp;
        hp.sigma0 = std::exp(theta[0]);
        hp.lengthscales = theta.tail(d).array().exp();
        if (!std::isfinite(hp.sigma0) || !hp.lengthscales.allFinite())
            return std::numeric_limits<double>::infinity();
        Eigen::MatrixXd k = detail::kernel_matrix(z, hp);
        auto fact = detail::factorize(k, hp.sigma0 * hp.sigma0);
        if (!fact) return std::numeric_limits<double>::infinity();
        Eigen::VectorXd kinv_y = fact->llt.solve(train.outputs);
        Eigen::VectorXd kinv_1 = fact->llt.solve(Eigen::VectorXd::Ones(n));
        double beta = train.outputs.dot(kinv_1) / kinv_1.sum();
        Eigen::VectorXd r = train.outputs.array() - beta;
        double quad = r.dot(kinv_y - beta * kinv_1);
        double log_det =
            2.0 * fact->llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        double nll = 0.5 * quad + 0.5 * log_det +
                     0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
        return std::isfinite(nll) ? nll : std::numeric_limits<double>::infinity();
    };

    const double lo = std::log(cfg.scale_lo), hi = std::log(cfg.scale_hi);
    Eigen::MatrixXd starts01 = hammersley(cfg.n_starts, static_cast<std::size_t>(d + 1));

    double best_val = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_theta;
    Eigen::VectorXd step = Eigen::VectorXd::Constant(d + 1, 0.7);
    for (Eigen::Index s = 0; s < starts01.rows(); ++s) {
        Eigen::VectorXd theta0(d + 1);
        theta0[0] = std::log(sy) + lo + starts01(s, 0) * (hi - lo);
        for (Eigen::Index j = 0; j < d; ++j)
            theta0[j + 1] = lo + starts01(s, j + 1) * (hi - lo);
        if (!std::isfinite(objective(theta0))) continue;
        auto r = nelder_mead(objective, theta0, step, cfg.max_local_iters);
        if (r.value < best_val) {
            best_val = r.value;
            best_theta = r.x;
        }
    }
    if (!best_theta.size())
        throw std::runtime_error("fit: every hyperparameter start failed to factorize");

    Hyperparams hp;
    hp.sigma0 = std::exp(best_theta[0]);
    hp.lengthscales = best_theta.tail(d).array().exp();
    {
        Eigen::MatrixXd k = detail::kernel_matrix(z, hp);
        auto fact = detail::factorize(k, hp.sigma0 * hp.sigma0);
        if (!fact) throw std::runtime_error("fit: final factorization failed");
        Eigen::VectorXd kinv_1 = fact->llt.solve(Eigen::VectorXd::Ones(n));
        hp.beta = train.outputs.dot(kinv_1) / kinv_1.sum();
    }
    return GpModel::build(train, hp, shift, scale);
}

} // namespace sbalc
