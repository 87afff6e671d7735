#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <random>

#include "occucert/certify.hpp"

using namespace occucert;
using mp50 = boost::multiprecision::cpp_dec_float_50;

namespace {

Eigen::VectorXd pt(double v) { return Eigen::VectorXd::Constant(1, v); }

OccupationProblem frozen_problem(double x0) {
    OccupationProblem p;
    p.model.dimension = 1;
    p.model.brownian_dim = 1;
    p.model.drift = {Polynomial(1)};
    p.model.diffusion = {{Polynomial(1)}};
    p.model.initial_state = pt(x0);
    Polynomial x = Polynomial::variable(1, 0);
    p.safe.dimension = 1;
    p.safe.kind = SemialgebraicSet::Kind::OpenInterior;
    p.safe.inequalities = {Polynomial::constant(1, 1.0) - x * x};
    p.target.dimension = 1;
    p.target.kind = SemialgebraicSet::Kind::Closed;
    p.target.inequalities = {Polynomial::constant(1, 0.01) - x * x};
    p.box.lower = pt(-1.0);
    p.box.upper = pt(1.0);
    p.horizon = 10.0;
    p.threshold = 0.01;
    return p;
}

/// 50-digit reference evaluations of the three bound formulas.
double ref_upper(double v0, double lambda, double beta, double H, double K) {
    const mp50 l(lambda), b(beta), vv(v0);
    const mp50 val = exp(-l * mp50(K)) * (vv + b / l * (exp(l * mp50(H)) - 1));
    return val.convert_to<double>();
}
double ref_lower1(double v0, double beta, double M, double lambda, double H, double K) {
    const mp50 l(lambda);
    const mp50 delta = mp50(M) * exp(-l * (mp50(H) - mp50(K)));
    const mp50 val = (mp50(v0) - abs(mp50(beta)) * mp50(H) - delta) / (1 - delta);
    return val.convert_to<double>();
}
double ref_lower2(double v0, double beta, double M, double lambda, double H, double K) {
    const mp50 l(lambda);
    const mp50 dw = mp50(M) * exp(l * (2 * mp50(K) - mp50(H)));
    const mp50 gamma = mp50(beta) / l * (1 - exp(-l * mp50(K)));
    const mp50 val = (mp50(v0) + gamma - dw) / (exp(l * mp50(K)) - dw);
    return val.convert_to<double>();
}

}  // namespace

TEST_CASE("bound formulas: hand-checked values") {
    // beta = 0 reductions
    CHECK(bound_upper(1.0, 0.7, 0.0, 10.0, 2.0) == doctest::Approx(std::exp(-1.4)).epsilon(1e-15));
    CHECK(bound_upper(0.5, 1.0, 0.0, 10.0, 2.0) ==
          doctest::Approx(0.5 * std::exp(-2.0)).epsilon(1e-14));
    // lambda -> 0 limit of the drift term: (beta/lambda)(e^{lambda H}-1) -> beta H
    CHECK(bound_upper(0.0, 1e-9, 0.1, 10.0, 1e-9) == doctest::Approx(1.0).epsilon(1e-6));

    CHECK(bound_lower1(1.0, 0.0, 1e-9, 1.0, 10.0, 2.0) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(bound_lower1(0.8, 0.0, 1.0, 0.1, 10.0, 2.0) ==
          doctest::Approx((0.8 - std::exp(-0.8)) / (1.0 - std::exp(-0.8))).epsilon(1e-13));
    const double delta = std::exp(-0.8);
    CHECK(bound_lower1(delta, 0.0, 1.0, 0.1, 10.0, 2.0) == doctest::Approx(0.0));

    CHECK(bound_lower2(1.0, 0.0, 1.0, 1.0, 10.0, 2.0) ==
          doctest::Approx((1.0 - std::exp(-6.0)) / (std::exp(2.0) - std::exp(-6.0)))
              .epsilon(1e-13));
    // v0 = e^{lambda K} with delta_w -> 0 gives the maximal certificate.
    CHECK(bound_lower2(std::exp(2.0), 0.0, 1e-12, 1.0, 50.0, 2.0) ==
          doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("bound formulas match 50-digit reference within 1e-12 relative") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> ulam(-5.0, 0.3);   // log10 lambda
    std::uniform_real_distribution<double> uh(1.0, 20.0);
    std::uniform_real_distribution<double> uv(0.0, 2.0);
    std::uniform_real_distribution<double> ub(0.0, 0.5);
    std::uniform_real_distribution<double> um(0.5, 3.0);
    int tested = 0;
    while (tested < 100) {
        const double lambda = std::pow(10.0, ulam(rng));
        const double H = uh(rng);
        const double K = H * std::uniform_real_distribution<double>(0.05, 0.95)(rng);
        const double v0 = uv(rng);
        const double M = um(rng);
        const double b = ub(rng);

        const double up = bound_upper(v0, lambda, b, H, K);
        CHECK(up == doctest::Approx(ref_upper(v0, lambda, b, H, K)).epsilon(1e-12));

        const double delta = M * std::exp(-lambda * (H - K));
        if (delta < 0.999) {
            const double lo1 = bound_lower1(v0, -b, M, lambda, H, K);
            CHECK(lo1 == doctest::Approx(ref_lower1(v0, -b, M, lambda, H, K)).epsilon(1e-12));
        }
        const double denom = std::exp(lambda * K) - M * std::exp(lambda * (2 * K - H));
        if (denom > 1e-3) {
            const double lo2 = bound_lower2(v0, b, M, lambda, H, K);
            CHECK(lo2 == doctest::Approx(ref_lower2(v0, b, M, lambda, H, K)).epsilon(1e-12));
        }
        ++tested;
    }
}

TEST_CASE("bound formulas reject out-of-domain parameters") {
    CHECK_THROWS_AS((void)bound_upper(1.0, 0.0, 0.0, 1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS((void)bound_lower1(1.0, 0.0, 2.0, 1e-9, 1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS((void)bound_lower2(1.0, 0.0, 50.0, 1.0, 1.0, 0.999), std::invalid_argument);
}

TEST_CASE("frozen dynamics: dissipative program is feasible with a constant certificate") {
    // f = 0, sigma = 0, x0 in T: v = 1, beta = lambda is feasible, so the
    // grid point solves and the bound clamps to 1 as K -> 0.
    OccupationProblem p = frozen_problem(0.05);
    CertificateSpec spec;
    spec.theorem = TheoremKind::DissipativeUpper;
    spec.degree = 2;
    spec.lambda_grid = {0.01};
    CertifyOptions opt;
    opt.postcheck_samples = 1000;
    opt.replay_samples = 1000;
    auto report = grid_search(p, spec, opt);
    REQUIRE(report.best.has_value());
    CHECK(report.best->bound >= std::exp(-0.01 * p.threshold) - 1e-6);
    CHECK(report.best->bound == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("attractive-I precondition failures are rejected grid points") {
    OccupationProblem p = frozen_problem(0.05);
    CertificateSpec spec;
    spec.theorem = TheoremKind::AttractiveILower;
    spec.degree = 2;
    spec.lambda_grid = {1e-9};  // delta = M e^{-lambda (H-K)} ~ 1 >= 1 with M > 1
    spec.m_grid = {2.0};
    auto report = grid_search(p, spec, CertifyOptions{});
    REQUIRE(report.points.size() == 1);
    CHECK(report.points[0].status == "rejected-precondition");
    CHECK(!report.best.has_value());
}

TEST_CASE("single-point grids match a direct build-and-solve") {
    OccupationProblem p = frozen_problem(0.05);
    CertificateSpec spec;
    spec.theorem = TheoremKind::AttractiveILower;
    spec.degree = 2;
    spec.lambda_grid = {0.5};
    spec.m_grid = {1.0};
    CertifyOptions opt;
    opt.postcheck_samples = 500;
    opt.replay_samples = 500;
    auto report = grid_search(p, spec, opt);
    REQUIRE(report.points.size() == 1);
    REQUIRE(report.best.has_value());

    // Frozen dynamics from inside the target occupy forever: the true
    // probability is 1 and the certified lower bound must not exceed it.
    // At degree 2 with |v| <= 1, maximizing v(x0) over v(0.1) <= 0 and
    // v(1) >= -1 pins v = (1 - 100 x^2)/99 and v0 = 0.75/99.
    CHECK(report.best->bound <= 1.0);
    CHECK(report.best->bound > 0.0);
    CHECK(report.best->v0 == doctest::Approx(0.75 / 99.0).epsilon(1e-3));
    CHECK(report.best->replay_violation <= 1e-6);
}

TEST_CASE("grid report covers every point exactly once with deterministic ties") {
    OccupationProblem p = frozen_problem(0.05);
    CertificateSpec spec;
    spec.theorem = TheoremKind::AttractiveIILower;
    spec.degree = 2;
    spec.lambda_grid = {0.5, 0.25};
    spec.m_grid = {1.0, 2.0};
    CertifyOptions opt;
    opt.postcheck_samples = 300;
    opt.replay_samples = 300;
    opt.jobs = 2;
    auto report = grid_search(p, spec, opt);
    CHECK(report.points.size() == 4);
    int optimal = 0;
    for (const auto& ptn : report.points) {
        CHECK(!ptn.status.empty());
        if (ptn.status == "optimal") ++optimal;
    }
    CHECK(optimal >= 1);
}

TEST_CASE("certificate replay accepts a hand-built valid certificate") {
    // Frozen dynamics, v = 1, beta = lambda: every Theorem-1 condition holds
    // with equality or slack everywhere.
    OccupationProblem p = frozen_problem(0.05);
    Certificate cert;
    cert.theorem = TheoremKind::DissipativeUpper;
    cert.lambda = 0.1;
    cert.beta = 0.1;
    cert.v = Polynomial::constant(1, 1.0);
    CHECK(replay_certificate(p, cert, 2000) <= 1e-12);

    // Break the sink condition: beta = 0 with v = 1 violates by lambda.
    cert.beta = 0.0;
    CHECK(replay_certificate(p, cert, 2000) == doctest::Approx(0.1).epsilon(1e-6));
}
