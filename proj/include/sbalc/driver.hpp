#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sbalc/acquisition.hpp"
#include "sbalc/benchmarks.hpp"
#include "sbalc/cubature.hpp"
#include "sbalc/gp.hpp"
#include "sbalc/hammersley.hpp"
#include "sbalc/posterior.hpp"
#include "sbalc/priors.hpp"
#include "sbalc/rng.hpp"

namespace sbalc {

struct AlcConfig {
    std::size_t n0 = 4;
    std::size_t pool_size = 20000;
    std::size_t pool_increment = 20000;
    double b = 1.0;
    double eps_re = 0.1;
    double eta = 0.02;
    double delta0 = 1e-2;
    double delta1 = 1e-5;
    StoppingVariant variant = StoppingVariant::two_sided;
    std::size_t max_model_calls = 200;
    std::size_t max_pool_enrichments = 10;
    std::size_t sir_samples = 10000;
    std::uint64_t seed = 0;
    FitConfig fit;
    AcquisitionConfig acquisition;

    void validate() const {
        if (n0 < 2) throw std::invalid_argument("AlcConfig: n0 must be >= 2");
        if (!(eps_re > 0.0)) throw std::invalid_argument("AlcConfig: eps_re must be > 0");
        if (!(eta > 0.0)) throw std::invalid_argument("AlcConfig: eta must be > 0");
        if (!(delta1 > 0.0 && delta1 <= delta0 && delta0 < 0.5))
            throw std::invalid_argument("AlcConfig: need 0 < delta1 <= delta0 < 0.5");
        if (pool_size < 2) throw std::invalid_argument("AlcConfig: pool_size must be >= 2");
        acquisition.validate();
    }
};

struct IterationRecord {
    std::size_t n = 0; // training-set size at this estimate
    double log_c_plugin = 0.0;
    double log_c_upper = 0.0;
    double log_c_lower = 0.0;
    double stopping_metric = 0.0;
    double cov_plugin = 0.0;
    std::size_t pool_size = 0;
    std::optional<Eigen::VectorXd> selected_point;
    double wall_time_s = 0.0;
};

enum class Termination { converged, call_budget, enrichment_budget };

inline const char* to_string(Termination t) {
    switch (t) {
    case Termination::converged: return "converged";
    case Termination::call_budget: return "call_budget";
    case Termination::enrichment_budget: return "enrichment_budget";
    }
    return "unknown";
}

struct RunReport {
    EvidenceEstimate evidence;
    std::vector<IterationRecord> history;
    std::size_t n_model_calls = 0;
    Eigen::VectorXd posterior_mean;
    Eigen::VectorXd posterior_std;
    double effective_sample_size = 0.0;
    Eigen::MatrixXd sir_samples;
    AlcConfig config;
    Termination termination = Termination::converged;
    bool low_ess_warning = false;
    double total_wall_time_s = 0.0;
};

/// Hammersley initial design inside the delta0-truncated prior box.
inline Eigen::MatrixXd initial_design(const PriorSpec& prior, std::size_t n0,
                                      double delta0) {
    return map_unit_to_box(hammersley(n0, static_cast<std::size_t>(prior.dim())),
                           prior, delta0);
}

/// Full active-learning loop: initial design, per-iteration GP refit and
/// evidence estimates, bound-width stopping over two successive
/// iterations, acquisition, pool enrichment against the CoV threshold,
/// then posterior moments and SIR draws.
inline RunReport run(const LogLikelihoodModel& problem, const PriorSpec& prior,
                     const AlcConfig& cfg) {
    cfg.validate();
    if (problem.dim != prior.dim())
        throw std::invalid_argument("run: problem/prior dimension mismatch");
    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&t_start] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             t_start)
            .count();
    };

    RngStream pool_rng(cfg.seed, Stream::pool);
    RngStream enrich_rng(cfg.seed, Stream::pool_enrichment);
    RngStream acq_rng(cfg.seed, Stream::acquisition);
    RngStream sir_rng(cfg.seed, Stream::sir);

    Eigen::MatrixXd pool = sample_prior(prior, cfg.pool_size, pool_rng);

    auto evaluate = [&](const Eigen::VectorXd& x) {
        double v = problem.eval(x);
        if (!std::isfinite(v))
            throw std::runtime_error("run: model returned a non-finite value at x = [" +
                                     [&] {
                                         std::string s;
                                         for (Eigen::Index j = 0; j < x.size(); ++j)
                                             s += (j ? " " : "") + std::to_string(x[j]);
                                         return s;
                                     }() +
                                     "]");
        return v;
    };

    TrainingSet train;
    train.inputs = initial_design(prior, cfg.n0, cfg.delta0);
    train.outputs.resize(train.inputs.rows());
    for (Eigen::Index i = 0; i < train.inputs.rows(); ++i)
        train.outputs[i] = evaluate(train.inputs.row(i).transpose());
    std::size_t n_calls = cfg.n0;

    Box acq_box = truncated_box(prior, cfg.delta1);
    AcquisitionConfig acq = cfg.acquisition;
    acq.b = cfg.b;
    acq.variant = cfg.variant;

    RunReport report;
    report.config = cfg;

    std::optional<GpModel> model;
    EvidenceEstimate est;
    std::size_t consecutive_hits = 0;
    Termination termination = Termination::call_budget;

    // Stage 1: bound-width criterion over two successive iterations.
    while (true) {
        const double t_iter = elapsed();
        model = fit(train, cfg.fit);
        est = estimate_evidence(*model, pool, cfg.b);
        double metric = stopping_metric(est, cfg.variant);

        IterationRecord rec;
        rec.n = static_cast<std::size_t>(train.size());
        rec.log_c_plugin = est.log_c_plugin;
        rec.log_c_upper = est.log_c_upper;
        rec.log_c_lower = est.log_c_lower;
        rec.stopping_metric = metric;
        rec.cov_plugin = est.cov_plugin;
        rec.pool_size = static_cast<std::size_t>(pool.rows());

        consecutive_hits = metric < cfg.eps_re ? consecutive_hits + 1 : 0;
        if (consecutive_hits >= 2) {
            rec.wall_time_s = elapsed() - t_iter;
            report.history.push_back(std::move(rec));
            termination = Termination::converged;
            break;
        }
        if (n_calls >= cfg.max_model_calls) {
            rec.wall_time_s = elapsed() - t_iter;
            report.history.push_back(std::move(rec));
            termination = Termination::call_budget;
            break;
        }

        Eigen::VectorXd next = select_next(*model, prior, acq_box, acq, acq_rng);
        rec.selected_point = next;
        rec.wall_time_s = elapsed() - t_iter;
        report.history.push_back(std::move(rec));

        double y = evaluate(next);
        train.inputs.conservativeResize(train.inputs.rows() + 1, Eigen::NoChange);
        train.inputs.row(train.inputs.rows() - 1) = next.transpose();
        train.outputs.conservativeResize(train.outputs.size() + 1);
        train.outputs[train.outputs.size() - 1] = y;
        ++n_calls;
    }

    // Stage 2: estimator-CoV criterion, met by pool enrichment alone.
    if (termination == Termination::converged) {
        std::size_t enrichments = 0;
        while (est.cov_plugin > cfg.eta) {
            if (enrichments >= cfg.max_pool_enrichments) {
                termination = Termination::enrichment_budget;
                break;
            }
            const double t_iter = elapsed();
            Eigen::MatrixXd extra = sample_prior(prior, cfg.pool_increment, enrich_rng);
            Eigen::MatrixXd merged(pool.rows() + extra.rows(), pool.cols());
            merged << pool, extra;
            pool = std::move(merged);
            ++enrichments;
            est = estimate_evidence(*model, pool, cfg.b);

            IterationRecord rec;
            rec.n = static_cast<std::size_t>(train.size());
            rec.log_c_plugin = est.log_c_plugin;
            rec.log_c_upper = est.log_c_upper;
            rec.log_c_lower = est.log_c_lower;
            rec.stopping_metric = stopping_metric(est, cfg.variant);
            rec.cov_plugin = est.cov_plugin;
            rec.pool_size = static_cast<std::size_t>(pool.rows());
            rec.wall_time_s = elapsed() - t_iter;
            report.history.push_back(std::move(rec));
        }
    }

    WeightedPool wp = weights_from_model(*model, pool);
    auto [mean, std] = posterior_moments(wp);
    report.effective_sample_size = effective_sample_size(wp);
    report.low_ess_warning = report.effective_sample_size < 2.0;
    report.evidence = est;
    report.n_model_calls = n_calls;
    report.posterior_mean = std::move(mean);
    report.posterior_std = std::move(std);
    report.sir_samples = sir_resample(wp, cfg.sir_samples, sir_rng);
    report.termination = termination;
    report.total_wall_time_s = elapsed();
    return report;
}

} // namespace sbalc
