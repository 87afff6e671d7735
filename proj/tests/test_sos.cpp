#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "occucert/sos.hpp"

using namespace occucert;

namespace {

BoundingBox unit_box(int dim = 1) {
    BoundingBox box;
    box.lower = Eigen::VectorXd::Constant(dim, -1.0);
    box.upper = Eigen::VectorXd::Constant(dim, 1.0);
    return box;
}

SemialgebraicSet interval_set() {
    SemialgebraicSet s;
    s.dimension = 1;
    Polynomial x = Polynomial::variable(1, 0);
    s.inequalities = {Polynomial::constant(1, 1.0) - x * x};
    return s;
}

SemialgebraicSet boundary_variety() {
    SemialgebraicSet s;
    s.dimension = 1;
    Polynomial x = Polynomial::variable(1, 0);
    s.equalities = {Polynomial::constant(1, 1.0) - x * x};
    return s;
}

}  // namespace

TEST_CASE("the generator itself is feasible on its own region") {
    // residual 1 - x^2 >= 0 on {1 - x^2 >= 0}: sigma_0 = 0, sigma_1 = 1.
    AffinePolynomial r(1);
    Polynomial x = Polynomial::variable(1, 0);
    r.constant = Polynomial::constant(1, 1.0) - x * x;
    auto con = encode_nonneg_on("gen", r, interval_set(), 2);
    DecisionSpace dec;
    auto sdp = assemble(dec, {con}, Eigen::VectorXd::Zero(0), false);
    InteriorPointSolver solver;
    auto sol = solve_sos(sdp, solver);
    REQUIRE(sol.report.status == SolveStatus::Optimal);
    CHECK(postcheck(sdp, sol, unit_box(), 2000) <= 1e-7);
}

TEST_CASE("variety constraints certify exactly the pointwise-nonnegative residuals") {
    // x^2 - 0.5 is negative inside (-0.7, 0.7) but nonnegative on the
    // variety {1 - x^2 = 0} = {-1, +1}; the free multiplier makes the
    // representation x^2 - 0.5 = 0.5 - (1 - x^2) reachable.
    DecisionSpace dec;
    InteriorPointSolver solver;
    Polynomial x = Polynomial::variable(1, 0);
    AffinePolynomial r(1);
    r.constant = x * x - Polynomial::constant(1, 0.5);
    auto con = encode_nonneg_on("var", r, boundary_variety(), 2);
    auto sdp = assemble(dec, {con}, Eigen::VectorXd::Zero(0), false);
    auto sol = solve_sos(sdp, solver);
    CHECK(sol.report.status == SolveStatus::Optimal);

    // x takes the value -1 on the variety, so no certificate exists.
    AffinePolynomial bad(1);
    bad.constant = x;
    auto bad_con = encode_nonneg_on("bad", bad, boundary_variety(), 2);
    auto bad_sdp = assemble(dec, {bad_con}, Eigen::VectorXd::Zero(0), false);
    auto bad_sol = solve_sos(bad_sdp, solver);
    CHECK(bad_sol.report.status == SolveStatus::Infeasible);
}

TEST_CASE("a negative constant residual is infeasible on any nonempty region") {
    AffinePolynomial r(1);
    r.constant = Polynomial::constant(1, -1.0);
    auto con = encode_nonneg_on("neg", r, interval_set(), 4);
    DecisionSpace dec;
    auto sdp = assemble(dec, {con}, Eigen::VectorXd::Zero(0), false);
    InteriorPointSolver solver;
    auto sol = solve_sos(sdp, solver);
    CHECK(sol.report.status == SolveStatus::Infeasible);
}

TEST_CASE("empty constraint list with zero objective is trivially optimal") {
    DecisionSpace dec;
    dec.add("t", VarSign::NonNegative);
    Eigen::VectorXd obj(1);
    obj << 1.0;
    auto sdp = assemble(dec, {}, obj, false);
    InteriorPointSolver solver;
    auto sol = solve_sos(sdp, solver);
    REQUIRE(sol.report.status == SolveStatus::Optimal);
    CHECK(sol.report.objective_value == doctest::Approx(0.0).epsilon(1e-5));
}

TEST_CASE("a free degree-2 certificate covers the constant-one case") {
    // v(x) - 1 >= 0 on T with v free of degree 2: v = 1 feasible; minimizing
    // v(0) pins the optimum at 1 on a target containing 0.
    SemialgebraicSet target;
    target.dimension = 1;
    Polynomial x = Polynomial::variable(1, 0);
    target.inequalities = {Polynomial::constant(1, 0.01) - x * x};

    DecisionSpace dec;
    std::vector<Polynomial> basis = chebyshev_basis(1, 2);
    for (int k = 0; k < 3; ++k) dec.add("v" + std::to_string(k), VarSign::Free);
    AffinePolynomial r(1);
    r.constant = Polynomial::constant(1, -1.0);
    for (int k = 0; k < 3; ++k) r.add_linear(k, basis[k]);
    auto con = encode_nonneg_on("tp", r, target, 2);
    Eigen::VectorXd obj(3);
    for (int k = 0; k < 3; ++k) obj[k] = evaluate(basis[k], Eigen::VectorXd::Zero(1));
    auto sdp = assemble(dec, {con}, obj, false);
    InteriorPointSolver solver;
    auto sol = solve_sos(sdp, solver);
    REQUIRE(sol.report.status == SolveStatus::Optimal);
    CHECK(sol.report.objective_value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("assembly is deterministic byte for byte") {
    SemialgebraicSet target;
    target.dimension = 1;
    Polynomial x = Polynomial::variable(1, 0);
    target.inequalities = {Polynomial::constant(1, 0.01) - x * x};
    auto build = [&] {
        DecisionSpace dec;
        std::vector<Polynomial> basis = chebyshev_basis(1, 4);
        for (int k = 0; k < 5; ++k) dec.add("v" + std::to_string(k), VarSign::Free);
        AffinePolynomial r(1);
        r.constant = Polynomial::constant(1, -1.0);
        for (int k = 0; k < 5; ++k) r.add_linear(k, basis[k]);
        auto con = encode_nonneg_on("tp", r, target, 4);
        Eigen::VectorXd obj = Eigen::VectorXd::Ones(5);
        auto sdp = assemble(dec, {con}, obj, true);
        std::ostringstream os;
        write_sdpa(sdp, os);
        return os.str();
    };
    const std::string first = build();
    CHECK(first == build());
    CHECK(first.find("mDIM") != std::string::npos);
}

TEST_CASE("postcheck flags a doctored Gram matrix") {
    AffinePolynomial r(1);
    Polynomial x = Polynomial::variable(1, 0);
    r.constant = Polynomial::constant(1, 1.0) - x * x;
    auto con = encode_nonneg_on("gen", r, interval_set(), 2);
    DecisionSpace dec;
    auto sdp = assemble(dec, {con}, Eigen::VectorXd::Zero(0), false);
    InteriorPointSolver solver;
    auto sol = solve_sos(sdp, solver);
    REQUIRE(sol.report.status == SolveStatus::Optimal);
    const double clean = postcheck(sdp, sol, unit_box(), 2000);
    CHECK(clean <= 1e-7);

    // Perturb one sigma_0 Gram diagonal entry by 1e-3: the identity breaks.
    SosSolution doctored = sol;
    doctored.raw_x[sdp.constraints[0].grams[0].column_offset] += 1e-3;
    CHECK(postcheck(sdp, doctored, unit_box(), 2000) > 1e-4);
}

TEST_CASE("region sampling respects membership and varieties") {
    auto pts = sample_region(interval_set(), unit_box(), 500, 3);
    CHECK(pts.size() == 500);
    for (const auto& p : pts) CHECK(interval_set().margin(p) >= 0.0);

    auto vpts = sample_region(boundary_variety(), unit_box(), 64, 4);
    CHECK(vpts.size() >= 32);
    for (const auto& p : vpts) CHECK(std::abs(p[0] * p[0] - 1.0) <= 1e-8);
}

TEST_CASE("SDPA export encodes block sizes and objective") {
    DecisionSpace dec;
    dec.add("u", VarSign::Free);
    AffinePolynomial r(1);
    Polynomial x = Polynomial::variable(1, 0);
    r.constant = Polynomial::constant(1, 1.0) - x * x;
    r.add_linear(0, Polynomial::constant(1, 1.0));
    auto con = encode_nonneg_on("c", r, interval_set(), 2);
    Eigen::VectorXd obj(1);
    obj << 1.0;
    auto sdp = assemble(dec, {con}, obj, false);
    std::ostringstream os;
    write_sdpa(sdp, os);
    const std::string text = os.str();
    CHECK(text.find("= mDIM") != std::string::npos);
    CHECK(text.find("= nBLOCK") != std::string::npos);
    // free column pairs appear as a negative (diagonal) block
    CHECK(text.find("-2") != std::string::npos);
}

TEST_CASE("monotonicity: higher multiplier degree keeps feasible problems feasible") {
    AffinePolynomial r(1);
    Polynomial x = Polynomial::variable(1, 0);
    r.constant = Polynomial::constant(1, 1.0) - x * x;
    DecisionSpace dec;
    InteriorPointSolver solver;
    for (int cap : {2, 4, 6}) {
        auto con = encode_nonneg_on("gen", r, interval_set(), cap);
        auto sdp = assemble(dec, {con}, Eigen::VectorXd::Zero(0), false);
        auto sol = solve_sos(sdp, solver);
        CHECK(sol.report.status == SolveStatus::Optimal);
    }
}
