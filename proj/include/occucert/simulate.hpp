#ifndef OCCUCERT_SIMULATE_HPP
#define OCCUCERT_SIMULATE_HPP

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "occucert/certify.hpp"
#include "occucert/model.hpp"

namespace occucert {

/// Counter-seeded per-path stream: results never depend on thread layout.
class PathRng {
  public:
    PathRng(std::uint64_t seed, std::uint64_t path_id);
    std::uint64_t next_u64();
    double next_uniform();  // (0,1)
    double next_normal();   // Box-Muller with cached spare

  private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

struct SimConfig {
    double dt = 2e-3;
    long n_paths = 100000;
    std::uint64_t seed = 0;
    int record_paths = 0;
    int jobs = 1;
};

struct PathState {
    double t = 0.0;
    Eigen::VectorXd x;
    double occupied = 0.0;  // accumulated time in the target
    double i_out = 0.0;     // accumulated time outside the target
    bool frozen = false;
    bool failed = false;    // non-finite state before exit
};

struct McEstimate {
    double p_hat = 0.0;
    double ci_halfwidth = 0.0;  // 95% Wilson
    long n_paths = 0;
    long n_success = 0;
    long n_safety_violations = 0;
    long n_failed_numerical = 0;
};

/// Flattened evaluators shared by every path of one problem.
class Stepper {
  public:
    Stepper(const SdeModel& model, const SemialgebraicSet& safe, const SemialgebraicSet& target);

    /// Euler-Maruyama transition with freeze-at-exit semantics; occupation
    /// accrues at the pre-step state (left-endpoint rule).
    void step(PathState& state, double dt, const double* noise) const;

    bool in_target(const Eigen::VectorXd& x) const;
    bool outside_safe(const Eigen::VectorXd& x) const;
    int brownian_dim() const { return m_; }

  private:
    int n_, m_, max_deg_;
    std::vector<CompiledPolynomial> drift_;
    std::vector<CompiledPolynomial> diffusion_;  // row-major n x m
    std::vector<CompiledPolynomial> safe_;
    std::vector<CompiledPolynomial> target_;
    mutable Eigen::MatrixXd pow_;  // power table workspace
};

/// Single spec-shaped transition; builds evaluators per call, so tests can
/// use it directly while estimate() runs the shared Stepper.
PathState step(const PathState& state, const SdeModel& model, const OccupationProblem& problem,
               double dt, const Eigen::VectorXd& noise);

McEstimate estimate(const OccupationProblem& problem, const SimConfig& config);

struct AuditResult {
    TheoremKind theorem;
    double mean = 0.0;
    double std_error = 0.0;
    /// Proof-side expectation bound: upper for the dissipative theorem,
    /// lower for the attractive ones.
    double expectation_bound = 0.0;
    bool bound_is_upper = false;
    long n_paths = 0;
};

/// Simulates to tau = tau_K ^ H evaluating the theorem's score process
/// Z: e^{lambda O(t)} v(X) (dissipative), v(X) e^{-lambda I_out} (attractive
/// I), or v(X) e^{lambda(2 O(t) - t)} (attractive II).
AuditResult audit_expectation(const OccupationProblem& problem, const Certificate& certificate,
                              const SimConfig& config);

/// Per-step observer; return value of false stops the path early.
using StepObserver =
    std::function<void(long path_id, const PathState& before, const PathState& after)>;

/// Test/inspection hook: runs paths like estimate() while reporting every
/// transition to the observer. Single-threaded.
McEstimate run_with_observer(const OccupationProblem& problem, const SimConfig& config,
                             const StepObserver& observer);

struct ExportResult {
    std::string csv_path;
    std::string svg_path;
    int paths_written = 0;
};

/// CSV of (path_id, t, x..., occupied, frozen) rows plus an SVG rendering
/// with the safe band, target band, and success/failure path coloring.
ExportResult export_paths(const OccupationProblem& problem, const SimConfig& config,
                          const std::string& csv_path, const std::string& svg_path);

}  // namespace occucert

#endif
