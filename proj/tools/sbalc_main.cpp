// sbalc: Bayesian model-evidence estimation with an actively learned
// GP surrogate over the log-likelihood.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sbalc/config.hpp"
#include "sbalc/report.hpp"

namespace {

constexpr int kExitConverged = 0;
constexpr int kExitCallBudget = 2;
constexpr int kExitEnrichmentBudget = 3;
constexpr int kExitConfigError = 64;
constexpr int kExitModelFailure = 70;

std::string join_path(const std::string& dir, const std::string& file) {
    if (dir.empty() || file.empty() || file.front() == '/') return file;
    return dir.back() == '/' ? dir + file : dir + "/" + file;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<std::size_t> max_calls, const std::string& out_dir) {
    sbalc::ProblemConfig cfg;
    try {
        cfg = sbalc::load_config(config_path);
    } catch (const sbalc::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kExitConfigError;
    }
    if (seed) cfg.algorithm.seed = *seed;
    if (max_calls) cfg.algorithm.max_model_calls = *max_calls;

    try {
        sbalc::LogLikelihoodModel problem = sbalc::make_problem(cfg);
        sbalc::PriorSpec prior(cfg.priors);
        sbalc::RunReport report = sbalc::run(problem, prior, cfg.algorithm);

        sbalc::write_report(report, cfg, join_path(out_dir, cfg.report_path));
        sbalc::write_history(report, join_path(out_dir, cfg.history_path));
        sbalc::write_samples(report.sir_samples, join_path(out_dir, cfg.samples_path));

        std::cout << "evidence: " << std::exp(report.evidence.log_c_plugin)
                  << " (log " << report.evidence.log_c_plugin << ")\n"
                  << "model calls: " << report.n_model_calls << "\n"
                  << "termination: " << sbalc::to_string(report.termination) << "\n";
        switch (report.termination) {
        case sbalc::Termination::converged: return kExitConverged;
        case sbalc::Termination::call_budget: return kExitCallBudget;
        case sbalc::Termination::enrichment_budget: return kExitEnrichmentBudget;
        }
        return kExitConverged;
    } catch (const sbalc::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "model failure: " << e.what() << '\n';
        return kExitModelFailure;
    }
}

int cmd_reference(const std::string& config_path, std::size_t n,
                  std::optional<std::uint64_t> seed, const std::string& out_dir) {
    sbalc::ProblemConfig cfg;
    try {
        cfg = sbalc::load_config(config_path);
    } catch (const sbalc::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kExitConfigError;
    }
    if (seed) cfg.algorithm.seed = *seed;
    try {
        sbalc::LogLikelihoodModel problem = sbalc::make_problem(cfg);
        sbalc::PriorSpec prior(cfg.priors);
        nlohmann::json j;
        j["problem"] = cfg.problem;
        if (problem.dim == 1) {
            double c = sbalc::reference_evidence_quadrature(problem, prior);
            j["method"] = "quadrature";
            j["evidence"] = c;
            j["log_evidence"] = std::log(c);
        } else {
            sbalc::RngStream rng(cfg.algorithm.seed, sbalc::Stream::pool);
            auto [log_c, cov] = sbalc::reference_evidence_mcs(problem, prior, n, rng);
            j["method"] = "mcs";
            j["n"] = n;
            j["evidence"] = std::exp(log_c);
            j["log_evidence"] = log_c;
            j["cov"] = cov;
        }
        std::string path = join_path(out_dir, "reference.json");
        std::ofstream out(path);
        out << j.dump(2) << '\n';
        std::cout << j.dump(2) << '\n';
        return kExitConverged;
    } catch (const std::exception& e) {
        std::cerr << "model failure: " << e.what() << '\n';
        return kExitModelFailure;
    }
}

int cmd_report(const std::string& report_path) {
    std::ifstream in(report_path);
    if (!in) {
        std::cerr << "cannot open '" << report_path << "'\n";
        return kExitConfigError;
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        std::cerr << "report parse error: " << e.what() << '\n';
        return kExitConfigError;
    }
    std::printf("problem:        %s\n", j["config"]["problem"].get<std::string>().c_str());
    std::printf("termination:    %s\n", j["termination"].get<std::string>().c_str());
    std::printf("model calls:    %zu\n", j["n_model_calls"].get<std::size_t>());
    std::printf("evidence:       %.6g  (log %.6f)\n",
                j["evidence"]["c_plugin"].get<double>(),
                j["evidence"]["log_c_plugin"].get<double>());
    std::printf("estimator CoV:  %.4f  (pool %zu)\n",
                j["evidence"]["cov_plugin"].get<double>(),
                j["evidence"]["pool_size"].get<std::size_t>());
    auto mean = j["posterior"]["mean"].get<std::vector<double>>();
    auto std = j["posterior"]["std"].get<std::vector<double>>();
    for (std::size_t k = 0; k < mean.size(); ++k)
        std::printf("x%zu:             mean %.6g, std %.6g\n", k, mean[k], std[k]);
    std::printf("ESS:            %.1f\n",
                j["posterior"]["effective_sample_size"].get<double>());
    return kExitConverged;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sbalc: active-learning Bayesian cubature for model evidence"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", report_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> max_calls;
    std::size_t ref_n = 200000;

    auto* run_cmd = app.add_subcommand("run", "Run the active-learning engine");
    run_cmd->add_option("--config", config_path, "Config file (JSON)")->required();
    run_cmd->add_option("--seed", seed, "Override the config seed");
    run_cmd->add_option("--max-calls", max_calls, "Override the model-call budget");
    run_cmd->add_option("--out-dir", out_dir, "Output directory");

    auto* ref_cmd = app.add_subcommand("reference", "Run the reference oracle");
    ref_cmd->add_option("--config", config_path, "Config file (JSON)")->required();
    ref_cmd->add_option("--n", ref_n, "Monte Carlo sample count (d > 1)");
    ref_cmd->add_option("--seed", seed, "Override the config seed");
    ref_cmd->add_option("--out-dir", out_dir, "Output directory");

    auto* rep_cmd = app.add_subcommand("report", "Pretty-print a stored report");
    rep_cmd->add_option("report", report_path, "report.json path")->required();

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed()) return cmd_run(config_path, seed, max_calls, out_dir);
    if (ref_cmd->parsed()) return cmd_reference(config_path, ref_n, seed, out_dir);
    return cmd_report(report_path);
}
