#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sbalc/driver.hpp"
#include "sbalc/external_model.hpp"
#include "sbalc/priors.hpp"

namespace sbalc {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Declarative run configuration (parsed from a JSON file).
struct ProblemConfig {
    std::string problem;          // builtin name, or "external" with command
    std::string external_command; // set when problem == "external"
    std::uint64_t obs_seed = 1;   // example2 observation regeneration
    double external_timeout_s = 600.0;
    std::vector<MarginalPrior> priors;
    AlcConfig algorithm;
    std::string report_path = "report.json";
    std::string history_path = "history.csv";
    std::string samples_path = "samples.csv";
};

namespace detail {

inline StoppingVariant variant_from_string(const std::string& s) {
    if (s == "two_sided") return StoppingVariant::two_sided;
    if (s == "upper_only") return StoppingVariant::upper_only;
    if (s == "lower_only") return StoppingVariant::lower_only;
    throw ConfigError("algorithm.variant: unknown value '" + s + "'");
}

inline std::string variant_to_string(StoppingVariant v) {
    switch (v) {
    case StoppingVariant::two_sided: return "two_sided";
    case StoppingVariant::upper_only: return "upper_only";
    case StoppingVariant::lower_only: return "lower_only";
    }
    return "two_sided";
}

} // namespace detail

inline ProblemConfig parse_config(const nlohmann::json& j) {
    ProblemConfig cfg;
    try {
        cfg.problem = j.at("problem").get<std::string>();
        if (cfg.problem == "external") {
            cfg.external_command = j.at("command").get<std::string>();
            if (j.contains("timeout_s"))
                cfg.external_timeout_s = j.at("timeout_s").get<double>();
        }
        if (j.contains("obs_seed")) cfg.obs_seed = j.at("obs_seed").get<std::uint64_t>();

        for (const auto& p : j.at("priors")) {
            std::string kind = p.at("kind").get<std::string>();
            if (kind == "gaussian")
                cfg.priors.push_back(MarginalPrior::gaussian(
                    p.at("mean").get<double>(), p.at("std").get<double>()));
            else if (kind == "uniform")
                cfg.priors.push_back(MarginalPrior::uniform(
                    p.at("lower").get<double>(), p.at("upper").get<double>()));
            else
                throw ConfigError("priors[].kind: unknown value '" + kind + "'");
        }
        if (cfg.priors.empty()) throw ConfigError("priors: must not be empty");

        if (j.contains("algorithm")) {
            const auto& a = j.at("algorithm");
            auto& alg = cfg.algorithm;
            if (a.contains("n0")) alg.n0 = a.at("n0").get<std::size_t>();
            if (a.contains("pool_size")) alg.pool_size = a.at("pool_size").get<std::size_t>();
            if (a.contains("pool_increment"))
                alg.pool_increment = a.at("pool_increment").get<std::size_t>();
            if (a.contains("b")) alg.b = a.at("b").get<double>();
            if (a.contains("eps_re")) alg.eps_re = a.at("eps_re").get<double>();
            if (a.contains("eta")) alg.eta = a.at("eta").get<double>();
            if (a.contains("delta0")) alg.delta0 = a.at("delta0").get<double>();
            if (a.contains("delta1")) alg.delta1 = a.at("delta1").get<double>();
            if (a.contains("variant"))
                alg.variant = detail::variant_from_string(a.at("variant").get<std::string>());
            if (a.contains("max_model_calls"))
                alg.max_model_calls = a.at("max_model_calls").get<std::size_t>();
            if (a.contains("max_pool_enrichments"))
                alg.max_pool_enrichments = a.at("max_pool_enrichments").get<std::size_t>();
            if (a.contains("sir_samples"))
                alg.sir_samples = a.at("sir_samples").get<std::size_t>();
        }
        cfg.algorithm.acquisition.variant = cfg.algorithm.variant;
        cfg.algorithm.acquisition.b = cfg.algorithm.b;
        if (j.contains("seed")) cfg.algorithm.seed = j.at("seed").get<std::uint64_t>();

        if (j.contains("outputs")) {
            const auto& o = j.at("outputs");
            if (o.contains("report")) cfg.report_path = o.at("report").get<std::string>();
            if (o.contains("history")) cfg.history_path = o.at("history").get<std::string>();
            if (o.contains("samples")) cfg.samples_path = o.at("samples").get<std::string>();
        }
        cfg.algorithm.validate();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

inline ProblemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

inline nlohmann::json emit_config(const ProblemConfig& cfg) {
    nlohmann::json j;
    j["problem"] = cfg.problem;
    if (cfg.problem == "external") {
        j["command"] = cfg.external_command;
        j["timeout_s"] = cfg.external_timeout_s;
    }
    j["obs_seed"] = cfg.obs_seed;
    j["priors"] = nlohmann::json::array();
    for (const auto& p : cfg.priors) {
        nlohmann::json pj;
        if (p.kind == MarginalPrior::Kind::gaussian) {
            pj["kind"] = "gaussian";
            pj["mean"] = p.a;
            pj["std"] = p.b;
        } else {
            pj["kind"] = "uniform";
            pj["lower"] = p.a;
            pj["upper"] = p.b;
        }
        j["priors"].push_back(pj);
    }
    const auto& a = cfg.algorithm;
    j["algorithm"] = {{"n0", a.n0},
                      {"pool_size", a.pool_size},
                      {"pool_increment", a.pool_increment},
                      {"b", a.b},
                      {"eps_re", a.eps_re},
                      {"eta", a.eta},
                      {"delta0", a.delta0},
                      {"delta1", a.delta1},
                      {"variant", detail::variant_to_string(a.variant)},
                      {"max_model_calls", a.max_model_calls},
                      {"max_pool_enrichments", a.max_pool_enrichments},
                      {"sir_samples", a.sir_samples}};
    j["seed"] = a.seed;
    j["outputs"] = {{"report", cfg.report_path},
                    {"history", cfg.history_path},
                    {"samples", cfg.samples_path}};
    return j;
}

/// Instantiate the problem a config names.
inline LogLikelihoodModel make_problem(const ProblemConfig& cfg) {
    if (cfg.problem == "example1") return make_example1();
    if (cfg.problem == "example2") {
        RngStream rng(cfg.obs_seed, Stream::observations);
        return make_example2(generate_observations(rng));
    }
    if (cfg.problem == "flat")
        return make_flat(static_cast<Eigen::Index>(cfg.priors.size()));
    if (cfg.problem == "external")
        return external_model_protocol(cfg.external_command,
                                       static_cast<Eigen::Index>(cfg.priors.size()),
                                       cfg.external_timeout_s);
    throw ConfigError("problem: unknown value '" + cfg.problem + "'");
}

} // namespace sbalc
