#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "sbalc/config.hpp"
#include "sbalc/driver.hpp"

namespace sbalc {

inline constexpr const char* kEngineVersion = "1.0.0";

namespace detail {

/// 17 significant digits: enough to round-trip any double exactly.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

inline nlohmann::json report_to_json(const RunReport& report,
                                     const ProblemConfig& cfg) {
    nlohmann::json j;
    j["version"] = kEngineVersion;
    j["config"] = emit_config(cfg);
    j["termination"] = to_string(report.termination);
    j["n_model_calls"] = report.n_model_calls;
    j["evidence"] = {{"log_c_plugin", report.evidence.log_c_plugin},
                     {"c_plugin", std::exp(report.evidence.log_c_plugin)},
                     {"log_c_upper", report.evidence.log_c_upper},
                     {"log_c_lower", report.evidence.log_c_lower},
                     {"cov_plugin", report.evidence.cov_plugin},
                     {"pool_size", report.evidence.pool_size},
                     {"b", report.evidence.b}};
    j["posterior"] = {{"mean", std::vector<double>(report.posterior_mean.begin(),
                                                   report.posterior_mean.end())},
                      {"std", std::vector<double>(report.posterior_std.begin(),
                                                  report.posterior_std.end())},
                      {"effective_sample_size", report.effective_sample_size},
                      {"low_ess_warning", report.low_ess_warning}};
    j["iterations"] = report.history.size();
    j["timing"] = {{"total_wall_time_s", report.total_wall_time_s}};
    return j;
}

inline void write_report(const RunReport& report, const ProblemConfig& cfg,
                         const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_report: cannot open '" + path + "'");
    out << report_to_json(report, cfg).dump(2) << '\n';
}

/// One CSV row per IterationRecord; the final row reproduces the
/// report's evidence fields exactly.
inline void write_history(const RunReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_history: cannot open '" + path + "'");
    out << "iteration,n,pool_size,log_c_plugin,log_c_upper,log_c_lower,"
           "stopping_metric,cov_plugin,selected_point,wall_time_s\n";
    for (std::size_t i = 0; i < report.history.size(); ++i) {
        const auto& r = report.history[i];
        out << i << ',' << r.n << ',' << r.pool_size << ','
            << detail::fmt17(r.log_c_plugin) << ',' << detail::fmt17(r.log_c_upper)
            << ',' << detail::fmt17(r.log_c_lower) << ','
            << detail::fmt17(r.stopping_metric) << ',' << detail::fmt17(r.cov_plugin)
            << ',';
        if (r.selected_point) {
            for (Eigen::Index jj = 0; jj < r.selected_point->size(); ++jj)
                out << (jj ? " " : "") << detail::fmt17((*r.selected_point)[jj]);
        }
        out << ',' << detail::fmt17(r.wall_time_s) << '\n';
    }
}

inline void write_samples(const Eigen::MatrixXd& samples, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_samples: cannot open '" + path + "'");
    for (Eigen::Index j = 0; j < samples.cols(); ++j)
        out << (j ? "," : "") << "x" << j;
    out << '\n';
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
        for (Eigen::Index j = 0; j < samples.cols(); ++j)
            out << (j ? "," : "") << detail::fmt17(samples(i, j));
        out << '\n';
    }
}

} // namespace sbalc
