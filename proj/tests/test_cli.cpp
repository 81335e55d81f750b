#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sbalc/config.hpp"
#include "sbalc/report.hpp"

using namespace sbalc;
using Catch::Approx;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path temp_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("sbalc_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    out << j.dump(2) << '\n';
    return path;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(SBALC_CLI_PATH) + " " + args;
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json flat_config() {
    return json{{"problem", "flat"},
                {"priors", {{{"kind", "uniform"}, {"lower", 0.0}, {"upper", 1.0}}}},
                {"seed", 1},
                {"algorithm", {{"pool_size", 2000}, {"sir_samples", 500}}}};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("config parsing: defaults and overrides") {
    json j = {{"problem", "example1"},
              {"priors", {{{"kind", "gaussian"}, {"mean", 1.5}, {"std", 2.0}}}}};
    ProblemConfig cfg = parse_config(j);
    CHECK(cfg.problem == "example1");
    REQUIRE(cfg.priors.size() == 1);
    CHECK(cfg.priors[0].kind == MarginalPrior::Kind::gaussian);
    CHECK(cfg.algorithm.n0 == 4);
    CHECK(cfg.algorithm.pool_size == 20000);
    CHECK(cfg.algorithm.b == 1.0);
    CHECK(cfg.algorithm.eps_re == 0.1);
    CHECK(cfg.algorithm.eta == 0.02);
    CHECK(cfg.algorithm.max_model_calls == 200);
    CHECK(cfg.report_path == "report.json");

    j["algorithm"] = {{"n0", 6},        {"b", 2.0},
                      {"eps_re", 0.05}, {"variant", "upper_only"},
                      {"pool_size", 500}, {"sir_samples", 100}};
    j["seed"] = 99;
    j["outputs"] = {{"report", "r.json"}};
    cfg = parse_config(j);
    CHECK(cfg.algorithm.n0 == 6);
    CHECK(cfg.algorithm.b == 2.0);
    CHECK(cfg.algorithm.acquisition.b == 2.0);
    CHECK(cfg.algorithm.variant == StoppingVariant::upper_only);
    CHECK(cfg.algorithm.acquisition.variant == StoppingVariant::upper_only);
    CHECK(cfg.algorithm.seed == 99);
    CHECK(cfg.report_path == "r.json");
    CHECK(cfg.history_path == "history.csv");
}

TEST_CASE("config parsing: rejections") {
    CHECK_THROWS_AS(parse_config(json{{"priors", json::array()}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"problem", "example1"},
                                      {"priors", json::array()}}),
                    ConfigError);
    CHECK_THROWS_AS(
        parse_config(json{{"problem", "example1"},
                          {"priors", {{{"kind", "cauchy"}, {"mean", 0.0}}}}}),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config(json{
            {"problem", "example1"},
            {"priors", {{{"kind", "gaussian"}, {"mean", 0.0}, {"std", -1.0}}}}}),
        ConfigError);
    json bad_variant = {{"problem", "example1"},
                        {"priors", {{{"kind", "gaussian"}, {"mean", 0.0}, {"std", 1.0}}}},
                        {"algorithm", {{"variant", "sideways"}}}};
    CHECK_THROWS_AS(parse_config(bad_variant), ConfigError);
    json bad_alg = {{"problem", "example1"},
                    {"priors", {{{"kind", "gaussian"}, {"mean", 0.0}, {"std", 1.0}}}},
                    {"algorithm", {{"n0", 1}}}};
    CHECK_THROWS_AS(parse_config(bad_alg), ConfigError);

    CHECK_THROWS_AS(load_config("/nonexistent/sbalc.json"), ConfigError);
    fs::path dir = temp_dir("badjson");
    std::ofstream(dir / "c.json") << "{ not json";
    CHECK_THROWS_AS(load_config((dir / "c.json").string()), ConfigError);
}

TEST_CASE("config round trip") {
    json j = {{"problem", "example2"},
              {"obs_seed", 13},
              {"priors",
               {{{"kind", "gaussian"}, {"mean", 2.0}, {"std", 0.3}},
                {{"kind", "gaussian"}, {"mean", 2.0}, {"std", 0.3}},
                {{"kind", "uniform"}, {"lower", 1.0}, {"upper", 3.0}}}},
              {"seed", 42},
              {"algorithm", {{"pool_size", 1000}, {"variant", "lower_only"}}}};
    ProblemConfig a = parse_config(j);
    ProblemConfig b = parse_config(emit_config(a));
    CHECK(b.problem == a.problem);
    CHECK(b.obs_seed == a.obs_seed);
    CHECK(b.priors.size() == a.priors.size());
    for (std::size_t k = 0; k < a.priors.size(); ++k) {
        CHECK(b.priors[k].kind == a.priors[k].kind);
        CHECK(b.priors[k].a == a.priors[k].a);
        CHECK(b.priors[k].b == a.priors[k].b);
    }
    CHECK(b.algorithm.pool_size == a.algorithm.pool_size);
    CHECK(b.algorithm.variant == a.algorithm.variant);
    CHECK(b.algorithm.seed == a.algorithm.seed);
}

TEST_CASE("make_problem dispatch") {
    ProblemConfig cfg;
    cfg.problem = "example1";
    cfg.priors = {MarginalPrior::gaussian(1.5, 2.0)};
    CHECK(make_problem(cfg).dim == 1);

    cfg.problem = "example2";
    cfg.obs_seed = 13;
    cfg.priors = {MarginalPrior::gaussian(2.0, 0.3), MarginalPrior::gaussian(2.0, 0.3),
                  MarginalPrior::gaussian(2.0, 0.3)};
    auto p2 = make_problem(cfg);
    CHECK(p2.dim == 3);
    RngStream rng(13, Stream::observations);
    CHECK(p2.observations == generate_observations(rng));

    cfg.problem = "flat";
    CHECK(make_problem(cfg).dim == 3);

    cfg.problem = "nope";
    CHECK_THROWS_AS(make_problem(cfg), ConfigError);
}

TEST_CASE("external model protocol against the stub") {
    std::string stub = STUB_MODEL_PATH;
    auto m = external_model_protocol(stub + " example1", 1, 30.0);
    Eigen::VectorXd x(1);
    for (double v : {0.4, 1.0, 2.3, -1.7}) {
        x << v;
        CHECK(m(x) == Approx(example1_loglik(v)).epsilon(1e-15));
    }

    auto err = external_model_protocol(stub + " error", 1, 30.0);
    x << 1.0;
    CHECK_THROWS_AS(err(x), std::runtime_error);

    CHECK_THROWS_AS(external_model_protocol(stub + " badhandshake", 1, 30.0),
                    std::runtime_error);
}

TEST_CASE("cli run: converged flat problem writes all artifacts") {
    fs::path dir = temp_dir("flat");
    fs::path cfg = write_json(dir / "config.json", flat_config());
    int rc = run_cli("run --config " + cfg.string() + " --out-dir " + dir.string() +
                     " > " + (dir / "stdout.txt").string());
    CHECK(rc == 0);

    json rep = json::parse(slurp(dir / "report.json"));
    CHECK(rep["termination"] == "converged");
    CHECK(rep["evidence"]["c_plugin"].get<double>() == Approx(1.0).margin(1e-4));
    CHECK(rep["config"]["problem"] == "flat");
    CHECK(rep["posterior"]["mean"][0].get<double>() == Approx(0.5).margin(0.03));

    std::string hist = slurp(dir / "history.csv");
    CHECK(hist.rfind("iteration,n,pool_size,", 0) == 0);
    CHECK(std::count(hist.begin(), hist.end(), '\n') ==
          1 + rep["iterations"].get<long>());

    std::string samples = slurp(dir / "samples.csv");
    CHECK(samples.rfind("x0", 0) == 0);
    CHECK(std::count(samples.begin(), samples.end(), '\n') == 1 + 500);

    // report subcommand pretty-prints the stored run
    int rc2 = run_cli("report " + (dir / "report.json").string() + " > " +
                      (dir / "pretty.txt").string());
    CHECK(rc2 == 0);
    std::string pretty = slurp(dir / "pretty.txt");
    CHECK(pretty.find("termination:    converged") != std::string::npos);
}

TEST_CASE("cli run: deterministic given the seed, exit codes on budgets") {
    fs::path dir = temp_dir("seeded");
    json j = {{"problem", "example1"},
              {"priors", {{{"kind", "gaussian"}, {"mean", 1.5}, {"std", 2.0}}}},
              {"seed", 1},
              {"algorithm", {{"pool_size", 5000}, {"sir_samples", 200}}}};
    fs::path cfg = write_json(dir / "config.json", j);

    fs::path a = dir / "a", b = dir / "b";
    fs::create_directories(a);
    fs::create_directories(b);
    CHECK(run_cli("run --config " + cfg.string() + " --out-dir " + a.string() +
                  " > /dev/null") == 0);
    CHECK(run_cli("run --config " + cfg.string() + " --out-dir " + b.string() +
                  " > /dev/null") == 0);
    // identical up to the wall-time column
    auto strip_timing = [](const std::string& csv) {
        std::string out;
        std::istringstream in(csv);
        for (std::string line; std::getline(in, line);)
            out += line.substr(0, line.rfind(',')) + '\n';
        return out;
    };
    CHECK(strip_timing(slurp(a / "history.csv")) ==
          strip_timing(slurp(b / "history.csv")));
    CHECK(slurp(a / "samples.csv") == slurp(b / "samples.csv"));

    // call budget cut via the command-line override
    fs::path c = dir / "c";
    fs::create_directories(c);
    CHECK(run_cli("run --config " + cfg.string() + " --max-calls 4 --out-dir " +
                  c.string() + " > /dev/null") == 2);
    json rep = json::parse(slurp(c / "report.json"));
    CHECK(rep["termination"] == "call_budget");
    CHECK(rep["n_model_calls"].get<int>() == 4);

    // missing config file
    CHECK(run_cli("run --config /nonexistent.json 2> /dev/null") == 64);
}

TEST_CASE("cli run: external stub problem end to end") {
    fs::path dir = temp_dir("external");
    json j = {{"problem", "external"},
              {"command", std::string(STUB_MODEL_PATH) + " example1"},
              {"priors", {{{"kind", "gaussian"}, {"mean", 1.5}, {"std", 2.0}}}},
              {"seed", 1},
              {"algorithm", {{"pool_size", 5000}, {"sir_samples", 200}}}};
    fs::path cfg = write_json(dir / "config.json", j);
    CHECK(run_cli("run --config " + cfg.string() + " --out-dir " + dir.string() +
                  " > /dev/null") == 0);
    json rep = json::parse(slurp(dir / "report.json"));
    CHECK(rep["termination"] == "converged");
    // same problem as the builtin: evidence agrees with the 1-D oracle
    double c_ref = reference_evidence_quadrature(make_example1(), example1_prior());
    CHECK(rep["evidence"]["c_plugin"].get<double>() == Approx(c_ref).epsilon(0.1));

    // a model that replies ERROR surfaces as a model failure
    json bad = j;
    bad["command"] = std::string(STUB_MODEL_PATH) + " error";
    fs::path cfg2 = write_json(dir / "bad.json", bad);
    CHECK(run_cli("run --config " + cfg2.string() + " 2> /dev/null") == 70);
}

TEST_CASE("cli reference: 1-D quadrature oracle") {
    fs::path dir = temp_dir("reference");
    json j = {{"problem", "example1"},
              {"priors", {{{"kind", "gaussian"}, {"mean", 1.5}, {"std", 2.0}}}}};
    fs::path cfg = write_json(dir / "config.json", j);
    CHECK(run_cli("reference --config " + cfg.string() + " --out-dir " +
                  dir.string() + " > /dev/null") == 0);
    json ref = json::parse(slurp(dir / "reference.json"));
    CHECK(ref["method"] == "quadrature");
    CHECK(ref["evidence"].get<double>() == Approx(0.03234276738972895).epsilon(1e-6));
}

TEST_CASE("report json carries the evidence block verbatim") {
    PriorSpec prior({MarginalPrior::uniform(0.0, 1.0)});
    AlcConfig acfg;
    acfg.pool_size = 1000;
    acfg.sir_samples = 50;
    RunReport r = run(make_flat(1), prior, acfg);
    ProblemConfig pcfg;
    pcfg.problem = "flat";
    pcfg.priors = {MarginalPrior::uniform(0.0, 1.0)};
    pcfg.algorithm = acfg;
    json j = report_to_json(r, pcfg);
    CHECK(j["evidence"]["log_c_plugin"].get<double>() == r.evidence.log_c_plugin);
    CHECK(j["evidence"]["pool_size"].get<std::size_t>() == r.evidence.pool_size);
    CHECK(j["n_model_calls"].get<std::size_t>() == r.n_model_calls);
    CHECK(j["posterior"]["mean"].size() == 1);
    CHECK(j["version"] == kEngineVersion);
}
