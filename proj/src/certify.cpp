#include "occucert/certify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace occucert {

std::string to_string(TheoremKind k) {
    switch (k) {
        case TheoremKind::DissipativeUpper: return "dissipative-upper";
        case TheoremKind::AttractiveILower: return "attractive-I-lower";
        case TheoremKind::AttractiveIILower: return "attractive-II-lower";
    }
    return "unknown";
}

std::optional<TheoremKind> parse_theorem(const std::string& name) {
    if (name == "dissipative-upper") return TheoremKind::DissipativeUpper;
    if (name == "attractive-I-lower") return TheoremKind::AttractiveILower;
    if (name == "attractive-II-lower") return TheoremKind::AttractiveIILower;
    return std::nullopt;
}

namespace {

struct ProgramPieces {
    SemialgebraicSet target;      // closed
    SemialgebraicSet offtarget;   // cl(safe) \ target representation
    SemialgebraicSet safe_bar;    // closed safe set with Archimedean ball
    std::vector<SemialgebraicSet> boundary;
    std::vector<Polynomial> v_basis;
    std::vector<Polynomial> Lv_basis;  // generator applied to each basis element
};

ProgramPieces make_pieces(const OccupationProblem& p, int degree) {
    ProgramPieces out;
    const int n = p.model.dimension;
    out.safe_bar = with_archimedean_ball(p.safe, p.box);
    out.safe_bar.kind = SemialgebraicSet::Kind::Closed;
    out.target = p.target;
    out.target.kind = SemialgebraicSet::Kind::Closed;
    out.offtarget = complement_within(out.safe_bar, p.target);
    out.boundary = boundary_of(out.safe_bar);
    out.v_basis = chebyshev_basis(n, degree);
    out.Lv_basis.reserve(out.v_basis.size());
    for (const auto& bpoly : out.v_basis) out.Lv_basis.push_back(generator(bpoly, p.model));
    return out;
}

int even_up(int d) { return d + (d % 2); }

/// residual = sum_k v_k * per_v[k] + beta_tilde * beta_poly + constant
AffinePolynomial affine_from(const ProgramPieces& pieces, int v_offset, int beta_index,
                             const std::vector<Polynomial>& per_v, const Polynomial& beta_poly,
                             const Polynomial& constant) {
    AffinePolynomial r(constant.dimension());
    r.constant = constant;
    for (std::size_t k = 0; k < pieces.v_basis.size(); ++k)
        r.add_linear(v_offset + static_cast<int>(k), per_v[k]);
    r.add_linear(beta_index, beta_poly);
    return r;
}

void push_constraint(std::vector<SosConstraint>& out, const std::string& label,
                     AffinePolynomial residual, const SemialgebraicSet& region) {
    const int cap = even_up(std::max(residual.degree(), 0));
    out.push_back(encode_nonneg_on(label, std::move(residual), region, cap));
}

struct CommonSetup {
    TheoremProgram prog;
    ProgramPieces pieces;
    Polynomial one;
    Polynomial zero;
    std::vector<Polynomial> v_polys;    // the decision basis elements
    std::vector<Polynomial> negv;       // negated basis elements
    std::vector<Polynomial> Lv;         // generator of each basis element
};

CommonSetup common_setup(const OccupationProblem& p, int degree, VarSign beta_sign) {
    if (degree <= 0 || degree % 2 != 0)
        throw std::invalid_argument("certificate degree must be a positive even integer");
    CommonSetup s;
    s.pieces = make_pieces(p, degree);
    s.one = Polynomial::constant(p.model.dimension, 1.0);
    s.zero = Polynomial(p.model.dimension);
    s.prog.v_basis = s.pieces.v_basis;
    s.prog.v_offset = 0;
    for (std::size_t k = 0; k < s.pieces.v_basis.size(); ++k)
        s.prog.decisions.add("v[" + std::to_string(k) + "]", VarSign::Free);
    s.prog.beta_tilde_index = s.prog.decisions.add("beta_over_lambda", beta_sign);
    for (const auto& bpoly : s.pieces.v_basis) s.v_polys.push_back(bpoly);
    for (const auto& bpoly : s.pieces.v_basis) s.negv.push_back(-bpoly);
    s.Lv = s.pieces.Lv_basis;
    return s;
}

Eigen::VectorXd v_at(const std::vector<Polynomial>& basis, const Eigen::VectorXd& point,
                     int total, int v_offset) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(total);
    for (std::size_t k = 0; k < basis.size(); ++k)
        out[v_offset + static_cast<int>(k)] = evaluate(basis[k], point);
    return out;
}

}  // namespace

TheoremProgram build_dissipative_program(const OccupationProblem& p, double lambda, int degree) {
    if (!(lambda > 0)) throw std::invalid_argument("lambda must be positive");
    CommonSetup s = common_setup(p, degree, VarSign::NonNegative);
    const auto& pc = s.pieces;
    const int n = p.model.dimension;
    const int bi = s.prog.beta_tilde_index;
    const Polynomial lam_c = Polynomial::constant(n, lambda);

    // (a) -Lv - lambda v + lambda beta~ >= 0 on T
    {
        std::vector<Polynomial> per_v;
        for (std::size_t k = 0; k < s.v_polys.size(); ++k)
            per_v.push_back(sub(-s.Lv[k], s.v_polys[k] * lambda));
        push_constraint(s.prog.constraints, "drift-on-target",
                        affine_from(pc, 0, bi, per_v, lam_c, s.zero), pc.target);
    }
    // (b) -Lv + lambda beta~ >= 0 off target
    {
        std::vector<Polynomial> per_v;
        for (std::size_t k = 0; k < s.v_polys.size(); ++k) per_v.push_back(-s.Lv[k]);
        push_constraint(s.prog.constraints, "drift-off-target",
                        affine_from(pc, 0, bi, per_v, lam_c, s.zero), pc.offtarget);
    }
    // (c) v - 1 >= 0 on T
    push_constraint(s.prog.constraints, "target-positivity",
                    affine_from(pc, 0, bi, s.v_polys, s.zero, Polynomial::constant(n, -1.0)),
                    pc.target);
    // (d) beta~ - v >= 0 on each boundary piece   [(-lambda v + beta)/lambda]
    for (std::size_t i = 0; i < pc.boundary.size(); ++i) {
        push_constraint(s.prog.constraints, "sink-" + std::to_string(i),
                        affine_from(pc, 0, bi, s.negv, s.one, s.zero), pc.boundary[i]);
    }
    // (e) v >= 0 on cl(X)
    push_constraint(s.prog.constraints, "nonnegative",
                    affine_from(pc, 0, bi, s.v_polys, s.zero, s.zero), pc.safe_bar);

    // minimize v(x0) + beta~ (e^{lambda H} - 1)
    s.prog.maximize = false;
    s.prog.objective = v_at(pc.v_basis, p.model.initial_state, s.prog.decisions.size(), 0);
    s.prog.objective[bi] = std::expm1(lambda * p.horizon);
    return std::move(s.prog);
}

TheoremProgram build_attractive1_program(const OccupationProblem& p, double lambda,
                                         double m_bound, int degree) {
    if (!(lambda > 0) || !(m_bound > 0))
        throw std::invalid_argument("lambda and M must be positive");
    CommonSetup s = common_setup(p, degree, VarSign::NonPositive);
    const auto& pc = s.pieces;
    const int n = p.model.dimension;
    const int bi = s.prog.beta_tilde_index;
    const Polynomial neg_lam = Polynomial::constant(n, -lambda);

    // (a) Lv - lambda beta~ >= 0 on T
    push_constraint(s.prog.constraints, "drift-on-target",
                    affine_from(pc, 0, bi, s.Lv, neg_lam, s.zero), pc.target);
    // (b) Lv - lambda v - lambda beta~ >= 0 off target
    {
        std::vector<Polynomial> per_v;
        for (std::size_t k = 0; k < s.v_polys.size(); ++k)
            per_v.push_back(sub(s.Lv[k], s.v_polys[k] * lambda));
        push_constraint(s.prog.constraints, "drift-off-target",
                        affine_from(pc, 0, bi, per_v, neg_lam, s.zero), pc.offtarget);
    }
    // (c) 1 - v >= 0 on T
    push_constraint(s.prog.constraints, "target-bound",
                    affine_from(pc, 0, bi, s.negv, s.zero, s.one), pc.target);
    // (d) -v - beta~ >= 0 on boundary pieces
    for (std::size_t i = 0; i < pc.boundary.size(); ++i) {
        push_constraint(s.prog.constraints, "sink-" + std::to_string(i),
                        affine_from(pc, 0, bi, s.negv, Polynomial::constant(n, -1.0), s.zero),
                        pc.boundary[i]);
    }
    // (e) M - v >= 0 and v + M >= 0 on cl(X)
    push_constraint(s.prog.constraints, "bounded-above",
                    affine_from(pc, 0, bi, s.negv, s.zero, Polynomial::constant(n, m_bound)),
                    pc.safe_bar);
    push_constraint(s.prog.constraints, "bounded-below",
                    affine_from(pc, 0, bi, s.v_polys, s.zero, Polynomial::constant(n, m_bound)),
                    pc.safe_bar);

    // maximize v(x0) + lambda beta~ H   [= v(x0) - |beta| H]
    s.prog.maximize = true;
    s.prog.objective = v_at(pc.v_basis, p.model.initial_state, s.prog.decisions.size(), 0);
    s.prog.objective[bi] = lambda * p.horizon;
    return std::move(s.prog);
}

TheoremProgram build_attractive2_program(const OccupationProblem& p, double lambda,
                                         double m_bound, int degree) {
    if (!(lambda > 0) || !(m_bound > 0))
        throw std::invalid_argument("lambda and M must be positive");
    CommonSetup s = common_setup(p, degree, VarSign::NonNegative);
    const auto& pc = s.pieces;
    const int n = p.model.dimension;
    const int bi = s.prog.beta_tilde_index;
    const Polynomial neg_lam = Polynomial::constant(n, -lambda);

    // (a) Lv + lambda v - lambda beta~ >= 0 on T
    {
        std::vector<Polynomial> per_v;
        for (std::size_t k = 0; k < s.v_polys.size(); ++k)
            per_v.push_back(add(s.Lv[k], s.v_polys[k] * lambda));
        push_constraint(s.prog.constraints, "drift-on-target",
                        affine_from(pc, 0, bi, per_v, neg_lam, s.zero), pc.target);
    }
    // (b) Lv - lambda v - lambda beta~ >= 0 off target
    {
        std::vector<Polynomial> per_v;
        for (std::size_t k = 0; k < s.v_polys.size(); ++k)
            per_v.push_back(sub(s.Lv[k], s.v_polys[k] * lambda));
        push_constraint(s.prog.constraints, "drift-off-target",
                        affine_from(pc, 0, bi, per_v, neg_lam, s.zero), pc.offtarget);
    }
    // (c) 1 - v >= 0 on T
    push_constraint(s.prog.constraints, "target-bound",
                    affine_from(pc, 0, bi, s.negv, s.zero, s.one), pc.target);
    // (d) -v - beta~ >= 0 on boundary pieces
    for (std::size_t i = 0; i < pc.boundary.size(); ++i) {
        push_constraint(s.prog.constraints, "sink-" + std::to_string(i),
                        affine_from(pc, 0, bi, s.negv, Polynomial::constant(n, -1.0), s.zero),
                        pc.boundary[i]);
    }
    // (e) |v| <= M on cl(X)
    push_constraint(s.prog.constraints, "bounded-above",
                    affine_from(pc, 0, bi, s.negv, s.zero, Polynomial::constant(n, m_bound)),
                    pc.safe_bar);
    push_constraint(s.prog.constraints, "bounded-below",
                    affine_from(pc, 0, bi, s.v_polys, s.zero, Polynomial::constant(n, m_bound)),
                    pc.safe_bar);

    // maximize v(x0) + beta~ (1 - e^{-lambda K})
    s.prog.maximize = true;
    s.prog.objective = v_at(pc.v_basis, p.model.initial_state, s.prog.decisions.size(), 0);
    s.prog.objective[bi] = -std::expm1(-lambda * p.threshold);
    return std::move(s.prog);
}

double bound_upper(double v0, double lambda, double beta, double H, double K) {
    if (!(lambda > 0)) throw std::invalid_argument("bound_upper: lambda must be positive");
    return std::exp(-lambda * K) * (v0 + beta / lambda * std::expm1(lambda * H));
}

double bound_lower1(double v0, double beta, double m_bound, double lambda, double H, double K) {
    const double delta = m_bound * std::exp(-lambda * (H - K));
    if (!(delta < 1.0)) throw std::invalid_argument("bound_lower1: delta must be below one");
    return (v0 - std::abs(beta) * H - delta) / (1.0 - delta);
}

double bound_lower2(double v0, double beta, double m_bound, double lambda, double H, double K) {
    const double delta_w = m_bound * std::exp(lambda * (2.0 * K - H));
    const double denom = std::exp(lambda * K) - delta_w;
    if (!(denom > 0.0)) throw std::invalid_argument("bound_lower2: nonpositive denominator");
    const double gamma = -beta / lambda * std::expm1(-lambda * K);
    return (v0 + gamma - delta_w) / denom;
}

namespace {

struct PointOutcome {
    GridPoint point;
};

PointOutcome solve_point(const OccupationProblem& problem, const OccupationProblem& normalized,
                         const CertificateSpec& spec, double lambda, std::optional<double> m_bound,
                         const CertifyOptions& opt, int point_index) {
    PointOutcome out;
    out.point.lambda = lambda;
    out.point.m_bound = m_bound;
    const double H = problem.horizon, K = problem.threshold;

    // Precondition screening for the lower-bound theorems.
    if (spec.theorem == TheoremKind::AttractiveILower) {
        const double delta = *m_bound * std::exp(-lambda * (H - K));
        if (!(delta < 1.0)) {
            out.point.status = "rejected-precondition";
            return out;
        }
    }
    if (spec.theorem == TheoremKind::AttractiveIILower) {
        const double delta_w = *m_bound * std::exp(lambda * (2.0 * K - H));
        if (!(std::exp(lambda * K) - delta_w > 0.0)) {
            out.point.status = "rejected-precondition";
            return out;
        }
    }

    TheoremProgram prog;
    switch (spec.theorem) {
        case TheoremKind::DissipativeUpper:
            prog = build_dissipative_program(normalized, lambda, spec.degree);
            break;
        case TheoremKind::AttractiveILower:
            prog = build_attractive1_program(normalized, lambda, *m_bound, spec.degree);
            break;
        case TheoremKind::AttractiveIILower:
            prog = build_attractive2_program(normalized, lambda, *m_bound, spec.degree);
            break;
    }

    const auto t0 = std::chrono::steady_clock::now();
    AssembledSdp sdp = assemble(prog.decisions, prog.constraints, prog.objective, prog.maximize);
    if (!opt.sdpa_dump_dir.empty()) {
        std::filesystem::create_directories(opt.sdpa_dump_dir);
        std::ostringstream name;
        name << "sdp_" << to_string(spec.theorem) << "_p" << point_index << ".dat-s";
        std::ofstream f(std::filesystem::path(opt.sdpa_dump_dir) / name.str());
        write_sdpa(sdp, f);
    }
    InteriorPointSolver solver(opt.ipm);
    SosSolution sol = solve_sos(sdp, solver);
    out.point.solve_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    switch (sol.report.status) {
        case SolveStatus::Optimal: break;
        case SolveStatus::Infeasible:
            out.point.status = "infeasible";
            return out;
        default:
            out.point.status = "numerical-failure";
            return out;
    }

    Certificate cert;
    cert.theorem = spec.theorem;
    cert.degree = spec.degree;
    cert.lambda = lambda;
    cert.m_bound = m_bound;
    cert.solver = sol.report;

    Polynomial v_norm(normalized.model.dimension);
    for (std::size_t k = 0; k < prog.v_basis.size(); ++k)
        v_norm = add(v_norm, prog.v_basis[k] * sol.decisions[prog.v_offset + static_cast<int>(k)]);
    cert.v = denormalize_polynomial(v_norm, problem.box);
    cert.beta = lambda * sol.decisions[prog.beta_tilde_index];
    cert.v0 = evaluate(v_norm, normalized.model.initial_state);

    switch (spec.theorem) {
        case TheoremKind::DissipativeUpper:
            cert.raw_bound = bound_upper(cert.v0, lambda, cert.beta, H, K);
            break;
        case TheoremKind::AttractiveILower:
            cert.raw_bound = bound_lower1(cert.v0, cert.beta, *m_bound, lambda, H, K);
            cert.delta = *m_bound * std::exp(-lambda * (H - K));
            break;
        case TheoremKind::AttractiveIILower:
            cert.raw_bound = bound_lower2(cert.v0, cert.beta, *m_bound, lambda, H, K);
            cert.delta_w = *m_bound * std::exp(lambda * (2.0 * K - H));
            cert.gamma = -cert.beta / lambda * std::expm1(-lambda * K);
            break;
    }
    cert.bound = std::clamp(cert.raw_bound, 0.0, 1.0);

    cert.postcheck_violation = postcheck(sdp, sol, normalized.box, opt.postcheck_samples);
    cert.solver.residual_sample_max_violation = cert.postcheck_violation;
    cert.replay_violation = replay_certificate(problem, cert, opt.replay_samples);

    // Active drift rows ride zero at solver accuracy; a conservative shift
    // of beta in the theorem's slack direction restores strict pointwise
    // validity at a bound cost proportional to the shift.
    for (int attempt = 0; attempt < 4 && cert.replay_violation > 1e-6; ++attempt) {
        const double margin = 3.0 * cert.replay_violation + 1e-9;
        Certificate trial = cert;
        switch (spec.theorem) {
            case TheoremKind::DissipativeUpper:
                trial.beta = cert.beta + margin;
                trial.raw_bound = bound_upper(trial.v0, lambda, trial.beta, H, K);
                break;
            case TheoremKind::AttractiveILower:
                trial.beta = cert.beta - margin;
                trial.raw_bound = bound_lower1(trial.v0, trial.beta, *m_bound, lambda, H, K);
                break;
            case TheoremKind::AttractiveIILower:
                trial.beta = cert.beta - margin;
                if (trial.beta < 0.0) trial.beta = 0.0;
                if (!(cert.beta - margin >= 0.0) && cert.beta > 0.0) {
                    // shrinking to zero still relaxes every condition by at
                    // least cert.beta, which may be less than the violation
                }
                trial.raw_bound = bound_lower2(trial.v0, trial.beta, *m_bound, lambda, H, K);
                trial.gamma = -trial.beta / lambda * std::expm1(-lambda * K);
                break;
        }
        trial.bound = std::clamp(trial.raw_bound, 0.0, 1.0);
        trial.beta_margin = cert.beta_margin + std::abs(trial.beta - cert.beta);
        // Fresh sample seed per attempt so the margin is validated on
        // points the measurement did not fit to.
        trial.replay_violation =
            replay_certificate(problem, trial, opt.replay_samples, 77 + 1000 * (attempt + 1));
        if (trial.replay_violation >= cert.replay_violation) break;
        cert = std::move(trial);
    }

    cert.accepted = cert.solver.primal_residual <= 1e-8 && cert.solver.dual_residual <= 1e-8 &&
                    cert.postcheck_violation <= 1e-6 && cert.replay_violation <= 1e-6;

    out.point.status = cert.accepted ? "optimal" : "postcheck-failed";
    out.point.certificate = std::move(cert);
    return out;
}

}  // namespace

GridReport grid_search(const OccupationProblem& problem, const CertificateSpec& spec,
                       const CertifyOptions& options) {
    if (spec.lambda_grid.empty())
        throw std::invalid_argument("grid_search: lambda grid must be non-empty");
    const bool uses_m = spec.theorem != TheoremKind::DissipativeUpper;
    if (uses_m && spec.m_grid.empty())
        throw std::invalid_argument("grid_search: M grid must be non-empty");

    const OccupationProblem normalized = normalize_to_box(problem);

    struct Task {
        double lambda;
        std::optional<double> m;
    };
    std::vector<Task> tasks;
    for (double lam : spec.lambda_grid) {
        if (uses_m) {
            for (double m : spec.m_grid) tasks.push_back({lam, m});
        } else {
            tasks.push_back({lam, std::nullopt});
        }
    }

    GridReport report;
    report.spec = spec;
    report.points.resize(tasks.size());

    const int jobs = std::max(1, options.jobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) break;
            report.points[i] = solve_point(problem, normalized, spec, tasks[i].lambda,
                                           tasks[i].m, options, static_cast<int>(i))
                                   .point;
        }
    };
    if (jobs == 1 || tasks.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < std::min<std::size_t>(jobs, tasks.size()); ++t)
            pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Deterministic best: bound order, ties to smaller lambda then smaller M.
    const bool minimize = spec.theorem == TheoremKind::DissipativeUpper;
    for (const auto& pt : report.points) {
        if (pt.status != "optimal" || !pt.certificate) continue;
        if (!report.best) {
            report.best = pt.certificate;
            continue;
        }
        const double a = pt.certificate->bound, b = report.best->bound;
        bool better = minimize ? a < b : a > b;
        if (a == b) {
            if (pt.certificate->lambda < report.best->lambda) better = true;
            else if (pt.certificate->lambda == report.best->lambda && pt.certificate->m_bound &&
                     report.best->m_bound && *pt.certificate->m_bound < *report.best->m_bound)
                better = true;
        }
        if (better) report.best = pt.certificate;
    }
    return report;
}

double replay_certificate(const OccupationProblem& problem, const Certificate& cert,
                          int samples_per_region, std::uint64_t seed) {
    const double lam = cert.lambda;
    const double beta = cert.beta;
    const Polynomial& v = cert.v;
    const Polynomial Lv = generator(v, problem.model);

    SemialgebraicSet safe_bar = with_archimedean_ball(problem.safe, problem.box);
    safe_bar.kind = SemialgebraicSet::Kind::Closed;
    SemialgebraicSet target = problem.target;
    target.kind = SemialgebraicSet::Kind::Closed;
    const SemialgebraicSet offtarget = complement_within(safe_bar, problem.target);
    const auto boundary = boundary_of(safe_bar);

    double worst = 0.0;
    auto check = [&](const SemialgebraicSet& region, auto&& condition, std::uint64_t s) {
        for (const auto& x : sample_region(region, problem.box, samples_per_region, s))
            worst = std::max(worst, condition(x));
        // Deterministic grid pass: random sampling alone can miss the peak
        // of a smooth violation by more than the repair margin.
        if (region.equalities.empty()) {
            for (const auto& x : grid_points(problem.box, samples_per_region)) {
                if (region.margin(x) >= 0.0) worst = std::max(worst, condition(x));
            }
        }
    };
    auto val = [&](const Polynomial& p, const Eigen::VectorXd& x) { return evaluate(p, x); };

    std::uint64_t s = seed;
    switch (cert.theorem) {
        case TheoremKind::DissipativeUpper:
            // Lv <= -lambda v + beta on T; Lv <= beta off T; v >= 1 on T;
            // -lambda v + beta >= 0 on boundary; v >= 0 on cl(X).
            check(target, [&](const auto& x) {
                return std::max(val(Lv, x) + lam * val(v, x) - beta, 1.0 - val(v, x));
            }, s++);
            check(offtarget, [&](const auto& x) { return val(Lv, x) - beta; }, s++);
            for (const auto& piece : boundary)
                check(piece, [&](const auto& x) { return lam * val(v, x) - beta; }, s++);
            check(safe_bar, [&](const auto& x) { return -val(v, x); }, s++);
            break;
        case TheoremKind::AttractiveILower:
            check(target, [&](const auto& x) {
                return std::max(beta - val(Lv, x), val(v, x) - 1.0);
            }, s++);
            check(offtarget, [&](const auto& x) {
                return lam * val(v, x) + beta - val(Lv, x);
            }, s++);
            for (const auto& piece : boundary)
                check(piece, [&](const auto& x) { return lam * val(v, x) + beta; }, s++);
            check(safe_bar, [&](const auto& x) {
                return std::abs(val(v, x)) - *cert.m_bound;
            }, s++);
            break;
        case TheoremKind::AttractiveIILower:
            check(target, [&](const auto& x) {
                return std::max(-lam * val(v, x) + beta - val(Lv, x), val(v, x) - 1.0);
            }, s++);
            check(offtarget, [&](const auto& x) {
                return lam * val(v, x) + beta - val(Lv, x);
            }, s++);
            for (const auto& piece : boundary)
                check(piece, [&](const auto& x) { return lam * val(v, x) + beta; }, s++);
            check(safe_bar, [&](const auto& x) {
                return std::abs(val(v, x)) - *cert.m_bound;
            }, s++);
            break;
    }
    return worst;
}

}  // namespace occucert
