#ifndef OCCUCERT_REPORT_HPP
#define OCCUCERT_REPORT_HPP

#include <iosfwd>
#include <string>

#include "occucert/config.hpp"

namespace occucert {

enum class TaskFilter { All, VerifyOnly, SimulateOnly };

struct RunOptions {
    int jobs = 1;
    bool solver_dump = false;
    std::optional<std::uint64_t> seed_override;
    TaskFilter filter = TaskFilter::All;
    std::ostream* log = nullptr;  // line-per-task progress
};

struct RunOutcome {
    int exit_code = 0;  // 0 ok, 3 solver failure, 4 I/O failure
    nlohmann::json report;
};

/// Executes the job's tasks in order, writes report.json plus per-task
/// CSV/SVG/certificate artifacts into output_dir. Infeasible grids are
/// results, not errors.
RunOutcome run_job(const JobConfig& config, const RunOptions& options);

/// Human-readable tables for a report produced by run_job.
void render_report(const nlohmann::json& report, std::ostream& out);

}  // namespace occucert

#endif
