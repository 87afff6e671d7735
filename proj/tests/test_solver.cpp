#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "occucert/solver.hpp"

using namespace occucert;

namespace {

ConicSolution run(const ConicProblem& p, IpmOptions opt = {}) {
    InteriorPointSolver solver(opt);
    return solver.solve(p);
}

}  // namespace

TEST_CASE("svec round trip preserves inner products") {
    std::mt19937 rng(7);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 1 + trial % 5;
        Eigen::MatrixXd X = Eigen::MatrixXd::NullaryExpr(d, d, [&] { return nd(rng); });
        Eigen::MatrixXd Y = Eigen::MatrixXd::NullaryExpr(d, d, [&] { return nd(rng); });
        X = (X + X.transpose()).eval();
        Y = (Y + Y.transpose()).eval();
        Eigen::VectorXd vx = sym_to_svec(X);
        Eigen::VectorXd vy = sym_to_svec(Y);
        CHECK(svec_to_sym(vx, d).isApprox(X, 1e-14));
        CHECK(vx.dot(vy) == doctest::Approx((X.array() * Y.array()).sum()).epsilon(1e-12));
    }
}

TEST_CASE("scalar bound: minimize t subject to t >= 1") {
    // t free, p in PSD(1), t - p = 1.
    ConicProblem prob;
    prob.cones.num_free = 1;
    prob.cones.psd_dims = {1};
    prob.A.resize(1, 2);
    prob.A << 1.0, -1.0;
    prob.b.resize(1);
    prob.b << 1.0;
    prob.c.resize(2);
    prob.c << 1.0, 0.0;
    auto sol = run(prob);
    REQUIRE(sol.report.status == SolveStatus::Optimal);
    CHECK(sol.report.objective_value == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(sol.report.primal_residual <= 1e-8);
    CHECK(sol.report.dual_residual <= 1e-8);
}

TEST_CASE("minimum eigenvalue SDP") {
    // min <C,X> s.t. tr X = 1, X psd. Optimum is lambda_min(C).
    Eigen::Matrix2d C;
    C << 2.0, 1.0, 1.0, 3.0;
    ConicProblem prob;
    prob.cones.num_free = 0;
    prob.cones.psd_dims = {2};
    prob.A.resize(1, 3);
    prob.A.row(0) = sym_to_svec(Eigen::Matrix2d::Identity().eval()).transpose();
    prob.b.resize(1);
    prob.b << 1.0;
    prob.c = sym_to_svec(C);
    auto sol = run(prob);
    REQUIRE(sol.report.status == SolveStatus::Optimal);
    const double expected = (5.0 - std::sqrt(5.0)) / 2.0;
    CHECK(sol.report.objective_value == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("free variables mix with PSD blocks") {
    // min u + tr X s.t. u = 3, X_11 = 1; optimum 4 at X = e1 e1'.
    ConicProblem prob;
    prob.cones.num_free = 1;
    prob.cones.psd_dims = {2};
    prob.A.setZero(2, 4);
    prob.A(0, 0) = 1.0;
    Eigen::Matrix2d E11 = Eigen::Matrix2d::Zero();
    E11(0, 0) = 1.0;
    prob.A.row(1).tail(3) = sym_to_svec(E11).transpose();
    prob.b.resize(2);
    prob.b << 3.0, 1.0;
    prob.c.resize(4);
    prob.c << 1.0, sym_to_svec(Eigen::Matrix2d::Identity().eval());
    auto sol = run(prob);
    REQUIRE(sol.report.status == SolveStatus::Optimal);
    CHECK(sol.report.objective_value == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("primal infeasibility is certified") {
    // x in PSD(1), x = -1.
    ConicProblem prob;
    prob.cones.num_free = 0;
    prob.cones.psd_dims = {1};
    prob.A.resize(1, 1);
    prob.A << 1.0;
    prob.b.resize(1);
    prob.b << -1.0;
    prob.c.resize(1);
    prob.c << 0.0;
    auto sol = run(prob);
    CHECK(sol.report.status == SolveStatus::Infeasible);
}

TEST_CASE("unbounded problem reports dual infeasibility") {
    // min -x1 with only x2 pinned; x1 can grow without bound.
    ConicProblem prob;
    prob.cones.num_free = 0;
    prob.cones.psd_dims = {1, 1};
    prob.A.resize(1, 2);
    prob.A << 0.0, 1.0;
    prob.b.resize(1);
    prob.b << 1.0;
    prob.c.resize(2);
    prob.c << -1.0, 0.0;
    auto sol = run(prob);
    CHECK(sol.report.status == SolveStatus::DualInfeasible);
}

TEST_CASE("random feasible problems satisfy strong duality and KKT") {
    std::mt19937 rng(42);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 12; ++trial) {
        const int nf = trial % 3;
        const std::vector<int> dims = {2 + trial % 3, 1 + trial % 2};
        ConeSpec cones;
        cones.num_free = nf;
        cones.psd_dims = dims;
        const int N = cones.total_size();
        const int m = 2 + trial % 4;

        Eigen::MatrixXd A = Eigen::MatrixXd::NullaryExpr(m, N, [&] { return nd(rng); });
        // Interior primal point.
        Eigen::VectorXd x0(N);
        for (int i = 0; i < nf; ++i) x0[i] = nd(rng);
        int off = nf;
        for (int d : dims) {
            Eigen::MatrixXd G = Eigen::MatrixXd::NullaryExpr(d, d, [&] { return nd(rng); });
            Eigen::MatrixXd P = G * G.transpose() + Eigen::MatrixXd::Identity(d, d);
            x0.segment(off, svec_size(d)) = sym_to_svec(P);
            off += svec_size(d);
        }
        // Interior dual point: c = A'y0 + s0 with s0 psd (zero on free part).
        Eigen::VectorXd y0 = Eigen::VectorXd::NullaryExpr(m, [&] { return nd(rng); });
        Eigen::VectorXd s0 = Eigen::VectorXd::Zero(N);
        off = nf;
        for (int d : dims) {
            Eigen::MatrixXd G = Eigen::MatrixXd::NullaryExpr(d, d, [&] { return nd(rng); });
            Eigen::MatrixXd P = G * G.transpose() + Eigen::MatrixXd::Identity(d, d);
            s0.segment(off, svec_size(d)) = sym_to_svec(P);
            off += svec_size(d);
        }
        ConicProblem prob;
        prob.cones = cones;
        prob.A = A;
        prob.b = A * x0;
        prob.c = A.transpose() * y0 + s0;

        auto sol = run(prob);
        REQUIRE(sol.report.status == SolveStatus::Optimal);
        CHECK(sol.report.primal_residual <= 1e-8);
        CHECK(sol.report.dual_residual <= 1e-8);
        CHECK(sol.report.duality_gap <= 1e-7);
        // Weak duality sandwich against the constructed feasible pair.
        CHECK(sol.report.objective_value <= prob.c.dot(x0) + 1e-6);
        CHECK(sol.report.objective_value >= prob.b.dot(y0) - 1e-6);
        for (double ev : sol.report.psd_min_eigenvalues) CHECK(ev >= -1e-9);
    }
}
