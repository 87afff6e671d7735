#include "occucert/report.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "occucert/sos.hpp"

namespace occucert {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void log_line(const RunOptions& opt, const std::string& line) {
    if (opt.log) (*opt.log) << line << "\n" << std::flush;
}

std::string fmt(double v, int prec = 4) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
    return buf;
}

}  // namespace

RunOutcome run_job(const JobConfig& config, const RunOptions& options) {
    RunOutcome out;
    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) {
        out.exit_code = 4;
        out.report = json{{"error", "cannot create output directory: " + ec.message()}};
        return out;
    }

    json tasks = json::array();
    int task_index = -1;
    for (const auto& task : config.tasks) {
        ++task_index;
        const std::string tag = "task " + std::to_string(task_index);
        json tj;
        try {
            if (const auto* v = std::get_if<VerifyTask>(&task)) {
                tj["type"] = "verify";
                if (options.filter == TaskFilter::SimulateOnly) {
                    tj["skipped"] = true;
                    tasks.push_back(std::move(tj));
                    continue;
                }
                CertifyOptions copt;
                copt.jobs = options.jobs;
                if (options.solver_dump)
                    copt.sdpa_dump_dir = (fs::path(config.output_dir) / "sdpa").string();
                GridReport report = grid_search(config.problem, v->spec, copt);
                tj["result"] = grid_report_to_json(report);

                // Grid table artifact, one row per (lambda, M) point.
                const fs::path grid_csv =
                    fs::path(config.output_dir) /
                    ("verify_" + std::to_string(task_index) + "_grid.csv");
                std::ofstream gc(grid_csv);
                gc << "lambda,m,status,bound,raw_bound,beta,v0,postcheck,replay,seconds\n";
                for (const auto& pt : report.points) {
                    gc << pt.lambda << ",";
                    if (pt.m_bound) gc << *pt.m_bound;
                    gc << "," << pt.status << ",";
                    if (pt.certificate) {
                        const auto& c = *pt.certificate;
                        char buf[256];
                        std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g,%.10g,%.3g,%.3g",
                                      c.bound, c.raw_bound, c.beta, c.v0, c.postcheck_violation,
                                      c.replay_violation);
                        gc << buf;
                    } else {
                        gc << ",,,,,";
                    }
                    gc << "," << pt.solve_seconds << "\n";
                }
                tj["grid_csv"] = grid_csv.string();

                if (report.best) {
                    const fs::path cert_path =
                        fs::path(config.output_dir) /
                        ("verify_" + std::to_string(task_index) + "_certificate.json");
                    std::ofstream cf(cert_path);
                    cf << certificate_to_json(*report.best).dump(2) << "\n";
                    tj["certificate_path"] = cert_path.string();
                    log_line(options, tag + ": verify " + to_string(v->spec.theorem) +
                                          " best bound " + fmt(report.best->bound) + " at lambda " +
                                          std::to_string(report.best->lambda));
                } else {
                    log_line(options, tag + ": verify " + to_string(v->spec.theorem) +
                                          " produced no certificate");
                }
            } else if (const auto* s = std::get_if<SimulateTask>(&task)) {
                tj["type"] = "simulate";
                if (options.filter == TaskFilter::VerifyOnly) {
                    tj["skipped"] = true;
                    tasks.push_back(std::move(tj));
                    continue;
                }
                SimConfig sim = s->sim;
                sim.jobs = options.jobs;
                if (options.seed_override) sim.seed = *options.seed_override;
                McEstimate est = estimate(config.problem, sim);
                tj["result"] = mc_estimate_to_json(est);
                tj["seed"] = sim.seed;
                tj["dt"] = sim.dt;
                if (sim.record_paths > 0) {
                    const std::string stem = "sim_" + std::to_string(task_index) + "_paths";
                    auto exp = export_paths(
                        config.problem, sim, (fs::path(config.output_dir) / (stem + ".csv")).string(),
                        (fs::path(config.output_dir) / (stem + ".svg")).string());
                    tj["paths_csv"] = exp.csv_path;
                    tj["paths_svg"] = exp.svg_path;
                }
                log_line(options, tag + ": simulate p_hat " + fmt(est.p_hat) + " +- " +
                                      fmt(est.ci_halfwidth));
            } else if (const auto* a = std::get_if<AuditTask>(&task)) {
                tj["type"] = "audit";
                if (options.filter != TaskFilter::All) {
                    tj["skipped"] = true;
                    tasks.push_back(std::move(tj));
                    continue;
                }
                fs::path cert_path = a->certificate_path;
                if (cert_path.is_relative() &&
                    fs::exists(fs::path(config.output_dir) / cert_path))
                    cert_path = fs::path(config.output_dir) / cert_path;
                std::ifstream cf(cert_path);
                if (!cf) {
                    tj["error"] = "cannot open certificate " + cert_path.string();
                    out.exit_code = 4;
                    tasks.push_back(std::move(tj));
                    continue;
                }
                json cj = json::parse(cf, nullptr, false);
                std::string err;
                auto cert = cj.is_discarded()
                                ? std::nullopt
                                : certificate_from_json(cj, &err);
                if (!cert) {
                    tj["error"] = "bad certificate: " + err;
                    out.exit_code = 4;
                    tasks.push_back(std::move(tj));
                    continue;
                }
                SimConfig sim = a->sim;
                sim.jobs = options.jobs;
                if (options.seed_override) sim.seed = *options.seed_override;
                AuditResult audit = audit_expectation(config.problem, *cert, sim);
                tj["certificate_path"] = cert_path.string();
                tj["result"] = audit_to_json(audit);
                log_line(options, tag + ": audit mean " + fmt(audit.mean, 6) + " vs bound " +
                                      fmt(audit.expectation_bound, 6));
            }
        } catch (const std::exception& ex) {
            tj["error"] = ex.what();
            out.exit_code = 3;
        }
        tasks.push_back(std::move(tj));
    }

    out.report["provenance"] = {{"tool", "occucert"},
                                {"version", "0.1.0"},
                                {"timestamp", timestamp_utc()},
                                {"jobs", options.jobs}};
    if (options.seed_override) out.report["provenance"]["seed_override"] = *options.seed_override;
    out.report["tasks"] = std::move(tasks);

    const fs::path report_path = fs::path(config.output_dir) / "report.json";
    std::ofstream rf(report_path);
    if (!rf) {
        out.exit_code = 4;
        return out;
    }
    rf << out.report.dump(2) << "\n";
    return out;
}

void render_report(const json& report, std::ostream& os) {
    if (report.contains("provenance")) {
        const auto& p = report.at("provenance");
        os << "occucert report (" << p.value("timestamp", "?") << ")\n\n";
    }
    if (!report.contains("tasks")) return;
    int idx = -1;
    for (const auto& t : report.at("tasks")) {
        ++idx;
        const std::string type = t.value("type", "?");
        if (t.value("skipped", false)) continue;
        os << "[" << idx << "] " << type << "\n";
        if (t.contains("error")) {
            os << "    error: " << t.at("error").get<std::string>() << "\n";
            continue;
        }
        if (type == "verify" && t.contains("result")) {
            const auto& r = t.at("result");
            os << "    theorem " << r.value("theorem", "?") << ", degree " << r.value("degree", 0)
               << "\n";
            os << "    " << std::left << std::setw(12) << "lambda" << std::setw(8) << "M"
               << std::setw(22) << "status" << std::setw(12) << "bound" << std::setw(14)
               << "raw" << std::setw(13) << "beta" << "seconds\n";
            for (const auto& pt : r.at("points")) {
                std::ostringstream lam;
                lam << pt.at("lambda").get<double>();
                os << "    " << std::setw(12) << lam.str() << std::setw(8)
                   << (pt.contains("m") ? fmt(pt.at("m").get<double>(), 2) : "-")
                   << std::setw(22) << pt.value("status", "?");
                if (pt.contains("certificate")) {
                    const auto& c = pt.at("certificate");
                    os << std::setw(12) << fmt(c.value("bound", 0.0)) << std::setw(14)
                       << fmt(c.value("raw_bound", 0.0)) << std::setw(13)
                       << fmt(c.value("beta", 0.0), 6);
                } else {
                    os << std::setw(12) << "-" << std::setw(14) << "-" << std::setw(13) << "-";
                }
                os << fmt(pt.value("solve_seconds", 0.0), 2) << "\n";
            }
            if (r.contains("best")) {
                const auto& b = r.at("best");
                os << "    best: bound " << fmt(b.value("bound", 0.0)) << " (raw "
                   << fmt(b.value("raw_bound", 0.0)) << ") at lambda "
                   << b.value("lambda", 0.0) << "\n";
            } else {
                os << "    best: no certificate\n";
            }
        } else if (type == "simulate" && t.contains("result")) {
            const auto& r = t.at("result");
            os << "    p_hat " << fmt(r.value("p_hat", 0.0)) << " +- "
               << fmt(r.value("ci_halfwidth", 0.0)) << " (95% Wilson), " << r.value("n_paths", 0L)
               << " paths, " << r.value("n_safety_violations", 0L) << " safety exits";
            if (r.value("n_failed_numerical", 0L) > 0)
                os << ", " << r.value("n_failed_numerical", 0L) << " failed-numerical";
            os << "\n";
        } else if (type == "audit" && t.contains("result")) {
            const auto& r = t.at("result");
            os << "    " << r.value("theorem", "?") << ": mean Z " << fmt(r.value("mean", 0.0), 6)
               << " +- " << fmt(r.value("std_error", 0.0), 6) << " vs "
               << (r.value("bound_is_upper", false) ? "upper" : "lower") << " bound "
               << fmt(r.value("expectation_bound", 0.0), 6)
               << (r.value("within_3se", false) ? " (within 3 SE)" : " (OUTSIDE 3 SE)") << "\n";
        }
    }
}

}  // namespace occucert
