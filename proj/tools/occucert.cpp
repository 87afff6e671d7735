#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "occucert/report.hpp"

namespace {

int load_and_run(const std::string& config_path, occucert::RunOptions options) {
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "error: cannot open " << config_path << "\n";
        return 4;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    auto parsed = occucert::parse_config(ss.str());
    if (!parsed.config) {
        std::cerr << "config errors in " << config_path << ":\n";
        for (const auto& e : parsed.errors) std::cerr << "  " << e << "\n";
        return 2;
    }
    options.log = &std::cout;
    auto outcome = occucert::run_job(*parsed.config, options);
    if (outcome.exit_code == 0) {
        occucert::render_report(outcome.report, std::cout);
        std::cout << "report written to " << parsed.config->output_dir << "/report.json\n";
    }
    return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"occucert: certified occupation-time probability bounds for polynomial SDEs"};
    app.require_subcommand(1);

    std::string config_path;
    std::string report_dir;
    int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    bool solver_dump = false;
    std::optional<std::uint64_t> seed_flag;
    std::uint64_t seed_value = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--jobs", jobs, "parallel workers for grid points and MC paths");
        sub->add_flag("--solver-dump", solver_dump, "dump assembled SDPs in SDPA sparse format");
        sub->add_option_function<std::uint64_t>(
               "--seed", [&](const std::uint64_t& v) { seed_flag = v; },
               "override every simulation seed in the config");
    };

    auto* run_cmd = app.add_subcommand("run", "run every task in a job config");
    run_cmd->add_option("config", config_path, "job config JSON")->required();
    add_common(run_cmd);

    auto* verify_cmd = app.add_subcommand("verify", "run only the verify tasks of a config");
    verify_cmd->add_option("config", config_path, "job config JSON")->required();
    add_common(verify_cmd);

    auto* simulate_cmd = app.add_subcommand("simulate", "run only the simulate tasks of a config");
    simulate_cmd->add_option("config", config_path, "job config JSON")->required();
    add_common(simulate_cmd);

    auto* report_cmd = app.add_subcommand("report", "pretty-print report.json from an output dir");
    report_cmd->add_option("dir", report_dir, "output directory containing report.json")
        ->required();

    CLI11_PARSE(app, argc, argv);
    (void)seed_value;

    occucert::RunOptions options;
    options.jobs = jobs;
    options.solver_dump = solver_dump;
    if (seed_flag) {
        options.seed_override = *seed_flag;
    } else if (const char* env = std::getenv("OCCUCERT_SEED")) {
        options.seed_override = std::strtoull(env, nullptr, 10);
    }

    if (report_cmd->parsed()) {
        std::ifstream in(report_dir + "/report.json");
        if (!in) {
            std::cerr << "error: cannot open " << report_dir << "/report.json\n";
            return 4;
        }
        auto j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded()) {
            std::cerr << "error: malformed report.json\n";
            return 4;
        }
        occucert::render_report(j, std::cout);
        return 0;
    }
    if (verify_cmd->parsed()) options.filter = occucert::TaskFilter::VerifyOnly;
    if (simulate_cmd->parsed()) options.filter = occucert::TaskFilter::SimulateOnly;
    return load_and_run(config_path, options);
}
