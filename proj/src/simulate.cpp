#include "occucert/simulate.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace occucert {

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

constexpr double kThresholdSlack = 1e-12;

}  // namespace

PathRng::PathRng(std::uint64_t seed, std::uint64_t path_id) {
    state_ = mix64(seed ^ mix64(path_id + 0x51ED270B7A14C94Dull));
}

std::uint64_t PathRng::next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double PathRng::next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double PathRng::next_normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

Stepper::Stepper(const SdeModel& model, const SemialgebraicSet& safe,
                 const SemialgebraicSet& target)
    : n_(model.dimension), m_(model.brownian_dim) {
    model.check_shapes();
    max_deg_ = 0;
    auto compile = [&](const Polynomial& p) {
        max_deg_ = std::max(max_deg_, std::max(p.degree(), 0));
        return CompiledPolynomial(p);
    };
    for (const auto& f : model.drift) drift_.push_back(compile(f));
    for (const auto& row : model.diffusion) {
        for (const auto& s : row) diffusion_.push_back(compile(s));
    }
    for (const auto& g : safe.inequalities) safe_.push_back(compile(g));
    for (const auto& h : target.inequalities) target_.push_back(compile(h));
    pow_.resize(n_, max_deg_ + 1);
}

bool Stepper::in_target(const Eigen::VectorXd& x) const {
    pow_.col(0).setOnes();
    for (int k = 1; k <= max_deg_; ++k) pow_.col(k) = pow_.col(k - 1).cwiseProduct(x);
    for (const auto& h : target_) {
        if (h.eval_with_table(pow_) < 0.0) return false;
    }
    return true;
}

bool Stepper::outside_safe(const Eigen::VectorXd& x) const {
    pow_.col(0).setOnes();
    for (int k = 1; k <= max_deg_; ++k) pow_.col(k) = pow_.col(k - 1).cwiseProduct(x);
    for (const auto& g : safe_) {
        if (g.eval_with_table(pow_) < 0.0) return true;
    }
    return false;
}

void Stepper::step(PathState& state, double dt, const double* noise) const {
    if (state.frozen || state.failed) {
        // Frozen states sit on (or just past) the boundary, outside the
        // target, so the outside-clock keeps running.
        state.t += dt;
        state.i_out += dt;
        return;
    }
    pow_.col(0).setOnes();
    for (int k = 1; k <= max_deg_; ++k) pow_.col(k) = pow_.col(k - 1).cwiseProduct(state.x);

    bool in_t = true;
    for (const auto& h : target_) {
        if (h.eval_with_table(pow_) < 0.0) {
            in_t = false;
            break;
        }
    }
    if (in_t) state.occupied += dt;
    else state.i_out += dt;

    const double sq = std::sqrt(dt);
    Eigen::VectorXd xn = state.x;
    for (int i = 0; i < n_; ++i) {
        double v = drift_[i].eval_with_table(pow_) * dt;
        for (int k = 0; k < m_; ++k)
            v += diffusion_[i * m_ + k].eval_with_table(pow_) * sq * noise[k];
        xn[i] += v;
    }
    state.t += dt;
    if (!xn.allFinite()) {
        state.failed = true;
        state.frozen = true;
        return;
    }
    state.x = std::move(xn);
    if (outside_safe(state.x)) state.frozen = true;
}

PathState step(const PathState& state, const SdeModel& model, const OccupationProblem& problem,
               double dt, const Eigen::VectorXd& noise) {
    if (noise.size() != model.brownian_dim)
        throw std::invalid_argument("noise vector length must equal the Brownian dimension");
    Stepper stepper(model, problem.safe, problem.target);
    PathState out = state;
    stepper.step(out, dt, noise.data());
    return out;
}

namespace {

McEstimate wilson(long n, long success) {
    McEstimate est;
    est.n_paths = n;
    est.n_success = success;
    est.p_hat = n > 0 ? static_cast<double>(success) / static_cast<double>(n) : 0.0;
    const double z = 1.959963984540054;  // 95%
    if (n > 0) {
        const double p = est.p_hat;
        const double z2n = z * z / n;
        const double half =
            z * std::sqrt(p * (1.0 - p) / n + z2n / (4.0 * n)) / (1.0 + z2n);
        est.ci_halfwidth = half;
    }
    return est;
}

struct PathOutcome {
    bool success = false;
    bool violated = false;
    bool failed = false;
};

/// Each worker owns a Stepper copy (the power-table workspace is mutable);
/// per-path RNG streams make the outcome independent of the thread layout.
template <typename PerPath>
void run_paths(const Stepper& shared, long n_paths, int jobs, PerPath&& body) {
    if (jobs <= 1) {
        Stepper local(shared);
        for (long p = 0; p < n_paths; ++p) body(local, p);
        return;
    }
    std::atomic<long> next{0};
    auto worker = [&] {
        Stepper local(shared);
        while (true) {
            const long chunk = 256;
            const long start = next.fetch_add(chunk);
            if (start >= n_paths) break;
            const long end = std::min(n_paths, start + chunk);
            for (long p = start; p < end; ++p) body(local, p);
        }
    };
    std::vector<std::thread> pool;
    const int k = std::min<long>(jobs, std::max<long>(1, n_paths));
    for (int t = 0; t < k; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace

McEstimate estimate(const OccupationProblem& problem, const SimConfig& config) {
    if (!(config.dt > 0.0) || config.n_paths < 1)
        throw std::invalid_argument("simulation needs dt > 0 and at least one path");
    const Stepper shared(problem.model, problem.safe, problem.target);
    const long nsteps = static_cast<long>(std::llround(problem.horizon / config.dt));
    const double K = problem.threshold;

    if (problem.model.brownian_dim > 8)
        throw std::invalid_argument("at most 8 Brownian dimensions supported");
    std::atomic<long> n_success{0}, n_violated{0}, n_failed{0};
    run_paths(shared, config.n_paths, config.jobs, [&](Stepper& local, long p) {
        PathRng rng(config.seed, static_cast<std::uint64_t>(p));
        PathState st;
        st.x = problem.model.initial_state;
        double noise[8];
        const int m = problem.model.brownian_dim;
        for (long k = 0; k < nsteps; ++k) {
            if (st.occupied + kThresholdSlack >= K) break;
            if (st.frozen) break;  // occupation can no longer grow
            for (int j = 0; j < m; ++j) noise[j] = rng.next_normal();
            local.step(st, config.dt, noise);
        }
        if (st.occupied + kThresholdSlack >= K) n_success.fetch_add(1);
        if (st.frozen && !st.failed) n_violated.fetch_add(1);
        if (st.failed) n_failed.fetch_add(1);
    });

    McEstimate est = wilson(config.n_paths, n_success.load());
    est.n_safety_violations = n_violated.load();
    est.n_failed_numerical = n_failed.load();
    return est;
}

AuditResult audit_expectation(const OccupationProblem& problem, const Certificate& certificate,
                              const SimConfig& config) {
    const Stepper shared(problem.model, problem.safe, problem.target);
    const long nsteps = static_cast<long>(std::llround(problem.horizon / config.dt));
    const double K = problem.threshold;
    const double lam = certificate.lambda;
    const double beta = certificate.beta;
    const CompiledPolynomial v(certificate.v);
    const double v0 = evaluate(certificate.v, problem.model.initial_state);

    std::vector<double> z_values(config.n_paths);
    run_paths(shared, config.n_paths, config.jobs, [&](Stepper& local, long p) {
        PathRng rng(config.seed, static_cast<std::uint64_t>(p));
        PathState st;
        st.x = problem.model.initial_state;
        double noise[8];
        const int m = problem.model.brownian_dim;
        for (long k = 0; k < nsteps; ++k) {
            if (st.occupied + kThresholdSlack >= K) break;  // tau_K reached
            for (int j = 0; j < m; ++j) noise[j] = rng.next_normal();
            local.step(st, config.dt, noise);
        }
        const double vx = v.eval(st.x);
        double z = 0.0;
        switch (certificate.theorem) {
            case TheoremKind::DissipativeUpper:
                z = std::exp(lam * st.occupied) * vx;
                break;
            case TheoremKind::AttractiveILower:
                z = vx * std::exp(-lam * st.i_out);
                break;
            case TheoremKind::AttractiveIILower:
                z = vx * std::exp(lam * (2.0 * st.occupied - st.t));
                break;
        }
        z_values[p] = z;
    });

    AuditResult out;
    out.theorem = certificate.theorem;
    out.n_paths = config.n_paths;
    double mean = 0.0;
    for (double z : z_values) mean += z;
    mean /= static_cast<double>(config.n_paths);
    double var = 0.0;
    for (double z : z_values) var += (z - mean) * (z - mean);
    var /= std::max<long>(1, config.n_paths - 1);
    out.mean = mean;
    out.std_error = std::sqrt(var / static_cast<double>(config.n_paths));
    switch (certificate.theorem) {
        case TheoremKind::DissipativeUpper:
            out.expectation_bound = v0 + beta / lam * std::expm1(lam * problem.horizon);
            out.bound_is_upper = true;
            break;
        case TheoremKind::AttractiveILower:
            out.expectation_bound = v0 - std::abs(beta) * problem.horizon;
            out.bound_is_upper = false;
            break;
        case TheoremKind::AttractiveIILower:
            out.expectation_bound = v0 - beta / lam * std::expm1(-lam * K);
            out.bound_is_upper = false;
            break;
    }
    return out;
}

McEstimate run_with_observer(const OccupationProblem& problem, const SimConfig& config,
                             const StepObserver& observer) {
    const Stepper stepper(problem.model, problem.safe, problem.target);
    const long nsteps = static_cast<long>(std::llround(problem.horizon / config.dt));
    const double K = problem.threshold;
    long n_success = 0, n_violated = 0, n_failed = 0;
    double noise[8];
    const int m = problem.model.brownian_dim;
    for (long p = 0; p < config.n_paths; ++p) {
        PathRng rng(config.seed, static_cast<std::uint64_t>(p));
        PathState st;
        st.x = problem.model.initial_state;
        for (long k = 0; k < nsteps; ++k) {
            if (st.occupied + kThresholdSlack >= K) break;
            if (st.frozen) break;
            for (int j = 0; j < m; ++j) noise[j] = rng.next_normal();
            PathState before = st;
            stepper.step(st, config.dt, noise);
            if (observer) observer(p, before, st);
        }
        if (st.occupied + kThresholdSlack >= K) ++n_success;
        if (st.frozen && !st.failed) ++n_violated;
        if (st.failed) ++n_failed;
    }
    McEstimate est = wilson(config.n_paths, n_success);
    est.n_safety_violations = n_violated;
    est.n_failed_numerical = n_failed;
    return est;
}

namespace {

struct Traj {
    std::vector<double> t;
    std::vector<Eigen::VectorXd> x;
    std::vector<double> occ;
    std::vector<char> frozen;
    bool success = false;
};

std::string svg_color(bool success) { return success ? "#2e8b57" : "#c0392b"; }

}  // namespace

ExportResult export_paths(const OccupationProblem& problem, const SimConfig& config,
                          const std::string& csv_path, const std::string& svg_path) {
    ExportResult out;
    out.csv_path = csv_path;
    out.svg_path = svg_path;
    if (config.record_paths <= 0) return out;

    const Stepper stepper(problem.model, problem.safe, problem.target);
    const long nsteps = static_cast<long>(std::llround(problem.horizon / config.dt));
    const double K = problem.threshold;
    const int n = problem.model.dimension;
    const int m = problem.model.brownian_dim;

    std::vector<Traj> trajs(config.record_paths);
    double noise[8];
    for (int p = 0; p < config.record_paths; ++p) {
        PathRng rng(config.seed, static_cast<std::uint64_t>(p));
        PathState st;
        st.x = problem.model.initial_state;
        Traj& tr = trajs[p];
        tr.t.push_back(0.0);
        tr.x.push_back(st.x);
        tr.occ.push_back(0.0);
        tr.frozen.push_back(0);
        for (long k = 0; k < nsteps; ++k) {
            if (st.occupied + kThresholdSlack >= K) break;
            if (st.frozen) break;
            for (int j = 0; j < m; ++j) noise[j] = rng.next_normal();
            stepper.step(st, config.dt, noise);
            tr.t.push_back(st.t);
            tr.x.push_back(st.x);
            tr.occ.push_back(st.occupied);
            tr.frozen.push_back(st.frozen ? 1 : 0);
        }
        tr.success = st.occupied + kThresholdSlack >= K;
    }

    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot open " + csv_path);
    csv << "path_id,t";
    for (int i = 0; i < n; ++i) csv << ",x" << (i + 1);
    csv << ",occupied,frozen\n";
    char buf[64];
    for (int p = 0; p < config.record_paths; ++p) {
        const Traj& tr = trajs[p];
        for (std::size_t k = 0; k < tr.t.size(); ++k) {
            csv << p;
            std::snprintf(buf, sizeof(buf), ",%.6f", tr.t[k]);
            csv << buf;
            for (int i = 0; i < n; ++i) {
                std::snprintf(buf, sizeof(buf), ",%.8g", tr.x[k][i]);
                csv << buf;
            }
            std::snprintf(buf, sizeof(buf), ",%.6f,%d\n", tr.occ[k], int(tr.frozen[k]));
            csv << buf;
        }
    }
    csv.close();

    // Time-vs-first-coordinate rendering with the safe box band in gray and
    // the target band in green, as in the sample-trajectory figures.
    const double W = 760, Hpx = 420, ml = 55, mr = 15, mt = 15, mb = 40;
    const double x_lo = problem.box.lower[0], x_hi = problem.box.upper[0];
    const double pad = 0.08 * (x_hi - x_lo);
    const double y_lo = x_lo - pad, y_hi = x_hi + pad;
    auto X = [&](double t) { return ml + (W - ml - mr) * (t / problem.horizon); };
    auto Y = [&](double v) { return mt + (Hpx - mt - mb) * (1.0 - (v - y_lo) / (y_hi - y_lo)); };

    std::ofstream svg(svg_path);
    if (!svg) throw std::runtime_error("cannot open " + svg_path);
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << Hpx
        << "\" viewBox=\"0 0 " << W << " " << Hpx << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // safe band
    svg << "<rect x=\"" << X(0) << "\" y=\"" << Y(x_hi) << "\" width=\"" << X(problem.horizon) - X(0)
        << "\" height=\"" << Y(x_lo) - Y(x_hi) << "\" fill=\"#e8e8e8\"/>\n";
    // target band: bounding interval of the target along x1, found by scan
    {
        double tlo = x_hi, thi = x_lo;
        Eigen::VectorXd probe = problem.model.initial_state;
        for (int k = 0; k <= 2000; ++k) {
            const double v = x_lo + (x_hi - x_lo) * k / 2000.0;
            probe[0] = v;
            if (problem.target.margin(probe) >= 0.0) {
                tlo = std::min(tlo, v);
                thi = std::max(thi, v);
            }
        }
        if (tlo <= thi) {
            svg << "<rect x=\"" << X(0) << "\" y=\"" << Y(thi) << "\" width=\""
                << X(problem.horizon) - X(0) << "\" height=\"" << Y(tlo) - Y(thi)
                << "\" fill=\"#c8e6c9\"/>\n";
        }
    }
    for (const auto& tr : trajs) {
        svg << "<polyline fill=\"none\" stroke=\"" << svg_color(tr.success)
            << "\" stroke-width=\"0.8\" points=\"";
        const std::size_t stride = std::max<std::size_t>(1, tr.t.size() / 1500);
        for (std::size_t k = 0; k < tr.t.size(); k += stride) {
            std::snprintf(buf, sizeof(buf), "%.1f,%.1f ", X(tr.t[k]), Y(tr.x[k][0]));
            svg << buf;
        }
        svg << "\"/>\n";
    }
    // axes
    svg << "<line x1=\"" << ml << "\" y1=\"" << Hpx - mb << "\" x2=\"" << W - mr << "\" y2=\""
        << Hpx - mb << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << Hpx - mb
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << (W / 2) << "\" y=\"" << Hpx - 10
        << "\" font-size=\"13\" text-anchor=\"middle\">t</text>\n";
    svg << "<text x=\"15\" y=\"" << (Hpx / 2)
        << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 15 " << (Hpx / 2)
        << ")\">x</text>\n";
    svg << "</svg>\n";
    out.paths_written = config.record_paths;
    return out;
}

}  // namespace occucert
