#ifndef OCCUCERT_CERTIFY_HPP
#define OCCUCERT_CERTIFY_HPP

#include <optional>
#include <string>
#include <vector>

#include "occucert/model.hpp"
#include "occucert/sos.hpp"
#include "occucert/solver.hpp"

namespace occucert {

enum class TheoremKind { DissipativeUpper, AttractiveILower, AttractiveIILower };

std::string to_string(TheoremKind k);
std::optional<TheoremKind> parse_theorem(const std::string& name);

struct CertificateSpec {
    TheoremKind theorem = TheoremKind::DissipativeUpper;
    int degree = 4;  // even, positive
    std::vector<double> lambda_grid;
    std::vector<double> m_grid;  // ignored for the dissipative theorem
};

struct Certificate {
    TheoremKind theorem;
    int degree = 0;
    Polynomial v{1};      // original coordinates
    double lambda = 0.0;
    double beta = 0.0;
    std::optional<double> m_bound;  // M (absent for dissipative)
    double v0 = 0.0;
    double raw_bound = 0.0;
    double bound = 0.0;  // clamp(raw, 0, 1)
    std::optional<double> delta;    // attractive-I horizon penalty
    std::optional<double> delta_w;  // attractive-II horizon penalty
    std::optional<double> gamma;    // attractive-II drift term
    SolverReport solver;
    double postcheck_violation = std::numeric_limits<double>::quiet_NaN();
    double replay_violation = std::numeric_limits<double>::quiet_NaN();
    /// Conservative slack added to beta when the raw solution rode its
    /// active drift rows slightly past zero; 0 when no repair was needed.
    double beta_margin = 0.0;
    /// Solver accepted at the certification tolerances (feasibility 1e-8,
    /// sampled violation 1e-6).
    bool accepted = false;
};

/// One theorem program over a shared decision space. The decision named
/// beta is carried as beta/lambda, which keeps the sink rows unit-scale;
/// reported beta values are scaled back.
struct TheoremProgram {
    DecisionSpace decisions;
    std::vector<SosConstraint> constraints;
    Eigen::VectorXd objective;
    bool maximize = false;
    std::vector<Polynomial> v_basis;  // Chebyshev products on the box
    int v_offset = 0;
    int beta_tilde_index = 0;
};

TheoremProgram build_dissipative_program(const OccupationProblem& normalized, double lambda,
                                         int degree);
TheoremProgram build_attractive1_program(const OccupationProblem& normalized, double lambda,
                                         double m_bound, int degree);
TheoremProgram build_attractive2_program(const OccupationProblem& normalized, double lambda,
                                         double m_bound, int degree);

/// exp(-lambda K) (v0 + beta/lambda (e^{lambda H} - 1)); caller clamps.
double bound_upper(double v0, double lambda, double beta, double H, double K);
/// (v0 - |beta| H - delta) / (1 - delta), delta = M e^{-lambda (H-K)}.
double bound_lower1(double v0, double beta, double m_bound, double lambda, double H, double K);
/// (v0 + beta/lambda (1 - e^{-lambda K}) - delta_w) / (e^{lambda K} - delta_w).
double bound_lower2(double v0, double beta, double m_bound, double lambda, double H, double K);

struct GridPoint {
    double lambda = 0.0;
    std::optional<double> m_bound;
    std::string status;  // optimal | infeasible | rejected-precondition | ...
    std::optional<Certificate> certificate;
    double solve_seconds = 0.0;
};

struct GridReport {
    CertificateSpec spec;
    std::vector<GridPoint> points;
    std::optional<Certificate> best;
};

struct CertifyOptions {
    int jobs = 1;
    IpmOptions ipm;
    /// When set, every assembled SDP is dumped in SDPA sparse format here.
    std::string sdpa_dump_dir;
    int postcheck_samples = 10000;
    int replay_samples = 10000;
};

/// Solves one SDP per admissible grid point. Best certificate maximizes the
/// bound for lower theorems and minimizes it for the upper theorem, among
/// accepted points; ties prefer smaller lambda, then smaller M.
GridReport grid_search(const OccupationProblem& problem, const CertificateSpec& spec,
                       const CertifyOptions& options = {});

/// Re-evaluates every theorem side condition in original coordinates at
/// sampled region points; returns the worst violation. Independent of the
/// normalized assembly path.
double replay_certificate(const OccupationProblem& problem, const Certificate& cert,
                          int samples_per_region = 10000, std::uint64_t seed = 77);

}  // namespace occucert

#endif
