#ifndef OCCUCERT_CONFIG_HPP
#define OCCUCERT_CONFIG_HPP

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "occucert/certify.hpp"
#include "occucert/model.hpp"
#include "occucert/simulate.hpp"

namespace occucert {

struct VerifyTask {
    CertificateSpec spec;
};

struct SimulateTask {
    SimConfig sim;
};

struct AuditTask {
    std::string certificate_path;
    SimConfig sim;
};

using Task = std::variant<VerifyTask, SimulateTask, AuditTask>;

struct JobConfig {
    OccupationProblem problem;
    std::vector<std::string> variable_names;
    std::vector<Task> tasks;
    std::string output_dir = "out";
};

struct ParseResult {
    std::optional<JobConfig> config;
    /// Schema violations with JSON-pointer locations; empty on success.
    std::vector<std::string> errors;
};

/// Full parse + schema validation + model validation. Never throws on bad
/// input; every problem is reported as a pointer-tagged error string.
ParseResult parse_config(const std::string& text);

nlohmann::json config_to_json(const JobConfig& config);
nlohmann::json polynomial_to_json(const Polynomial& p);
Polynomial polynomial_from_json(const nlohmann::json& j, int dimension);

nlohmann::json certificate_to_json(const Certificate& cert);
std::optional<Certificate> certificate_from_json(const nlohmann::json& j, std::string* error);

nlohmann::json mc_estimate_to_json(const McEstimate& est);
nlohmann::json audit_to_json(const AuditResult& audit);
nlohmann::json grid_report_to_json(const GridReport& report);

}  // namespace occucert

#endif
