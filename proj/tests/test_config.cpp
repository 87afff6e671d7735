#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "occucert/config.hpp"
#include "occucert/report.hpp"

using namespace occucert;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string config_dir() {
    const char* env = std::getenv("OCCUCERT_CONFIG_DIR");
    if (env) return env;
    for (const char* c : {"configs", "../configs", "../../configs"}) {
        if (fs::exists(fs::path(c) / "example1.json")) return c;
    }
    return "configs";
}

std::string minimal_config(const std::string& tasks) {
    return R"({
      "problem": {
        "variables": ["x"],
        "dynamics": {
          "drift": [[{"exponents": [1], "coefficient": -1.0}]],
          "diffusion": [[[{"exponents": [0], "coefficient": 0.1}]]],
          "initial_state": [0.2]
        },
        "safe_set": {
          "inequalities": [[{"exponents": [0], "coefficient": 1.0}, {"exponents": [2], "coefficient": -1.0}]],
          "bounding_box": {"lower": [-1.0], "upper": [1.0]}
        },
        "target_set": {
          "inequalities": [[{"exponents": [0], "coefficient": 0.09}, {"exponents": [2], "coefficient": -1.0}]]
        },
        "horizon": 2.0,
        "threshold": 0.5
      },
      "tasks": [)" +
           tasks + R"(],
      "output_dir": "out/test"
    })";
}

}  // namespace

TEST_CASE("bundled example configs parse and encode the case studies") {
    const auto dir = config_dir();
    auto r1 = parse_config(slurp((fs::path(dir) / "example1.json").string()));
    REQUIRE(r1.config.has_value());
    CHECK(r1.config->problem.horizon == 10.0);
    CHECK(r1.config->problem.threshold == 2.0);
    CHECK(r1.config->problem.model.initial_state[0] == 0.5);
    CHECK(r1.config->tasks.size() == 5);

    auto r2 = parse_config(slurp((fs::path(dir) / "example2.json").string()));
    REQUIRE(r2.config.has_value());
    CHECK(r2.config->problem.horizon == 5.0);
    CHECK(r2.config->problem.threshold == 0.1);
    CHECK(r2.config->problem.model.initial_state[0] == 0.9);
    // target is (0.5 - x)(x - 0.1)
    const auto& h = r2.config->problem.target.inequalities[0];
    CHECK(evaluate(h, Eigen::VectorXd::Constant(1, 0.3)) > 0.0);
    CHECK(evaluate(h, Eigen::VectorXd::Constant(1, 0.6)) < 0.0);
}

TEST_CASE("empty task lists are schema errors") {
    auto r = parse_config(minimal_config(""));
    REQUIRE(!r.config.has_value());
    bool found = false;
    for (const auto& e : r.errors) found = found || e.find("/tasks") != std::string::npos;
    CHECK(found);
}

TEST_CASE("malformed JSON is reported, not thrown") {
    auto r = parse_config("{ not json");
    REQUIRE(!r.config.has_value());
    REQUIRE(!r.errors.empty());
    CHECK(r.errors[0].find("malformed") != std::string::npos);
}

TEST_CASE("schema errors carry JSON-pointer locations") {
    auto r = parse_config(minimal_config(
        R"({"verify": {"theorem": "no-such-theorem", "degree": 3, "lambda_grid": [0.1]}})"));
    REQUIRE(!r.config.has_value());
    bool theorem = false, degree = false;
    for (const auto& e : r.errors) {
        theorem = theorem || e.find("/tasks/0/verify/theorem") != std::string::npos;
        degree = degree || e.find("/tasks/0/verify/degree") != std::string::npos;
    }
    CHECK(theorem);
    CHECK(degree);
}

TEST_CASE("model validation failures surface with the problem pointer") {
    std::string cfg = minimal_config(
        R"({"simulate": {"dt": 0.01, "n_paths": 10, "seed": 1}})");
    // Move the target outside the safe interior.
    const std::string needle = "\"coefficient\": 0.09";
    cfg.replace(cfg.find(needle), needle.size(), "\"coefficient\": 2.25");
    auto r = parse_config(cfg);
    REQUIRE(!r.config.has_value());
    bool found = false;
    for (const auto& e : r.errors)
        found = found || (e.rfind("/problem/target_set", 0) == 0 &&
                          e.find("target not inside") != std::string::npos);
    CHECK(found);
}

TEST_CASE("config round-trips through serialization") {
    const auto dir = config_dir();
    const std::string text = slurp((fs::path(dir) / "example1.json").string());
    auto r = parse_config(text);
    REQUIRE(r.config.has_value());
    const auto echoed = config_to_json(*r.config).dump(2);
    auto r2 = parse_config(echoed);
    REQUIRE(r2.config.has_value());
    CHECK(config_to_json(*r2.config) == config_to_json(*r.config));
    // structural equality of the parsed problems
    CHECK(r2.config->problem.model.drift[0] == r.config->problem.model.drift[0]);
    CHECK(r2.config->problem.target.inequalities[0] == r.config->problem.target.inequalities[0]);
    CHECK(r2.config->tasks.size() == r.config->tasks.size());
}

TEST_CASE("certificates round-trip through JSON") {
    Certificate cert;
    cert.theorem = TheoremKind::AttractiveILower;
    cert.degree = 4;
    Polynomial x = Polynomial::variable(1, 0);
    cert.v = 0.25 * x * x - 1.5 * x;
    cert.lambda = 0.1;
    cert.beta = -0.25;
    cert.m_bound = 1.0;
    cert.v0 = 0.5;
    cert.bound = 0.25;
    cert.raw_bound = 0.25;
    cert.delta = 0.4;
    cert.accepted = true;
    const auto j = certificate_to_json(cert);
    std::string err;
    auto back = certificate_from_json(j, &err);
    REQUIRE(back.has_value());
    CHECK(back->v == cert.v);
    CHECK(back->beta == cert.beta);
    CHECK(back->theorem == cert.theorem);
    CHECK(*back->m_bound == 1.0);

    auto bad = certificate_from_json(nlohmann::json{{"theorem", "nope"}}, &err);
    CHECK(!bad.has_value());
}

TEST_CASE("simulate-only jobs produce an estimate and no certificates") {
    auto r = parse_config(minimal_config(
        R"({"simulate": {"dt": 0.005, "n_paths": 400, "seed": 5, "record_paths": 3}})"));
    REQUIRE(r.config.has_value());
    JobConfig cfg = *r.config;
    const auto out_dir = fs::temp_directory_path() / "occucert_test_run";
    fs::remove_all(out_dir);
    cfg.output_dir = out_dir.string();
    RunOptions opt;
    opt.jobs = 2;
    auto outcome = run_job(cfg, opt);
    CHECK(outcome.exit_code == 0);
    REQUIRE(fs::exists(out_dir / "report.json"));
    const auto& tasks = outcome.report.at("tasks");
    REQUIRE(tasks.size() == 1);
    CHECK(tasks[0].at("type") == "simulate");
    CHECK(tasks[0].at("result").contains("p_hat"));
    CHECK(!tasks[0].contains("certificate_path"));
    CHECK(fs::exists(out_dir / "sim_0_paths.csv"));
    CHECK(fs::exists(out_dir / "sim_0_paths.svg"));

    std::ostringstream rendered;
    render_report(outcome.report, rendered);
    CHECK(rendered.str().find("p_hat") != std::string::npos);
    fs::remove_all(out_dir);
}

TEST_CASE("verify tasks write grid tables with one row per grid point") {
    auto r = parse_config(minimal_config(
        R"({"verify": {"theorem": "attractive-II-lower", "degree": 2,
            "lambda_grid": [0.5, 1.0], "m_grid": [1.0]}})"));
    REQUIRE(r.config.has_value());
    JobConfig cfg = *r.config;
    const auto out_dir = fs::temp_directory_path() / "occucert_test_verify";
    fs::remove_all(out_dir);
    cfg.output_dir = out_dir.string();
    RunOptions opt;
    auto outcome = run_job(cfg, opt);
    CHECK(outcome.exit_code == 0);
    const auto& result = outcome.report.at("tasks")[0].at("result");
    CHECK(result.at("points").size() == 2);  // |lambda grid| x |M grid|
    REQUIRE(fs::exists(out_dir / "verify_0_grid.csv"));
    std::ifstream gc(out_dir / "verify_0_grid.csv");
    std::string line;
    int rows = 0;
    while (std::getline(gc, line)) ++rows;
    CHECK(rows == 3);  // header + 2 grid points
    fs::remove_all(out_dir);
}
