#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "occucert/model.hpp"

using namespace occucert;

namespace {

OccupationProblem example1() {
    OccupationProblem p;
    p.model.dimension = 1;
    p.model.brownian_dim = 1;
    Polynomial x = Polynomial::variable(1, 0);
    p.model.drift = {15.0 * x * x * x - 5.0 * x};
    p.model.diffusion = {{x}};
    p.model.initial_state = Eigen::VectorXd::Constant(1, 0.5);
    p.safe.dimension = 1;
    p.safe.kind = SemialgebraicSet::Kind::OpenInterior;
    p.safe.inequalities = {Polynomial::constant(1, 1.0) - x * x};
    p.target.dimension = 1;
    p.target.kind = SemialgebraicSet::Kind::Closed;
    p.target.inequalities = {Polynomial::constant(1, 0.01) - x * x};
    p.box.lower = Eigen::VectorXd::Constant(1, -1.0);
    p.box.upper = Eigen::VectorXd::Constant(1, 1.0);
    p.horizon = 10.0;
    p.threshold = 2.0;
    return p;
}

Eigen::VectorXd pt(double v) { return Eigen::VectorXd::Constant(1, v); }

}  // namespace

TEST_CASE("the bundled Example 1 setup validates cleanly") {
    CHECK(validate(example1()).empty());
}

TEST_CASE("threshold above horizon is a violation, not an exception") {
    OccupationProblem p = example1();
    p.threshold = p.horizon + 1.0;
    const auto violations = validate(p);
    REQUIRE(!violations.empty());
    bool found = false;
    for (const auto& v : violations) found = found || v.find("exceeds horizon") != std::string::npos;
    CHECK(found);
}

TEST_CASE("target poking outside the safe interior is caught by sampling") {
    OccupationProblem p = example1();
    Polynomial x = Polynomial::variable(1, 0);
    // T = [0.9, 1.1] as (1.1 - x)(x - 0.9)
    p.target.inequalities = {mul(Polynomial::constant(1, 1.1) - x, x - Polynomial::constant(1, 0.9))};
    const auto violations = validate(p);
    bool found = false;
    for (const auto& v : violations) found = found || v.find("target not inside") != std::string::npos;
    CHECK(found);
}

TEST_CASE("initial state must sit inside the safe interior") {
    OccupationProblem p = example1();
    p.model.initial_state = pt(1.5);
    const auto violations = validate(p);
    bool found = false;
    for (const auto& v : violations)
        found = found || v.find("initial state") != std::string::npos;
    CHECK(found);
}

TEST_CASE("multi-inequality targets are rejected as unsupported") {
    OccupationProblem p = example1();
    p.target.inequalities.push_back(p.target.inequalities[0]);
    const auto violations = validate(p);
    bool found = false;
    for (const auto& v : violations)
        found = found || v.find("single polynomial inequality") != std::string::npos;
    CHECK(found);
}

TEST_CASE("boundary pieces carry the defining equality") {
    SemialgebraicSet safe;
    safe.dimension = 1;
    Polynomial x = Polynomial::variable(1, 0);
    safe.inequalities = {Polynomial::constant(1, 1.0) - x * x};
    const auto pieces = boundary_of(safe);
    REQUIRE(pieces.size() == 1);
    CHECK(pieces[0].equalities.size() == 1);
    CHECK(pieces[0].inequalities.empty());
    CHECK(evaluate(pieces[0].equalities[0], pt(1.0)) == doctest::Approx(0.0));
    CHECK(evaluate(pieces[0].equalities[0], pt(-1.0)) == doctest::Approx(0.0));

    // Box with two inequalities gets a piece per face pair.
    SemialgebraicSet box2;
    box2.dimension = 2;
    Polynomial x1 = Polynomial::variable(2, 0);
    Polynomial x2 = Polynomial::variable(2, 1);
    box2.inequalities = {Polynomial::constant(2, 1.0) - x1 * x1,
                         Polynomial::constant(2, 1.0) - x2 * x2};
    CHECK(boundary_of(box2).size() == 2);
}

TEST_CASE("disc boundary piece evaluates to zero on the circle") {
    SemialgebraicSet disc;
    disc.dimension = 2;
    Polynomial x1 = Polynomial::variable(2, 0);
    Polynomial x2 = Polynomial::variable(2, 1);
    disc.inequalities = {Polynomial::constant(2, 1.0) - x1 * x1 - x2 * x2};
    const auto pieces = boundary_of(disc);
    REQUIRE(pieces.size() == 1);
    for (int k = 0; k < 32; ++k) {
        const double a = 2.0 * M_PI * k / 32.0;
        Eigen::VectorXd z(2);
        z << std::cos(a), std::sin(a);
        CHECK(std::abs(evaluate(pieces[0].equalities[0], z)) <= 1e-12);
    }
}

TEST_CASE("complement_within reproduces the Example 1 off-target region") {
    OccupationProblem p = example1();
    const auto comp = complement_within(p.safe, p.target);
    REQUIRE(comp.inequalities.size() == 2);
    // [-1,-0.1] u [0.1,1]
    CHECK(comp.contains(pt(0.5)));
    CHECK(comp.contains(pt(-0.5)));
    CHECK(comp.contains(pt(0.1)));
    CHECK(!comp.contains(pt(0.0)));
    CHECK(!comp.contains(pt(1.5)));
}

TEST_CASE("complement membership agrees with set difference off the surface") {
    OccupationProblem p = example1();
    const auto comp = complement_within(p.safe, p.target);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> unit(-1.2, 1.2);
    const Polynomial& h = p.target.inequalities[0];
    for (int k = 0; k < 1000; ++k) {
        const Eigen::VectorXd z = pt(unit(rng));
        if (std::abs(evaluate(h, z)) < 1e-9) continue;  // measure-zero surface
        const bool in_closure = p.safe.margin(z) >= 0.0;
        const bool in_target = p.target.contains(z);
        CHECK(comp.contains(z) == (in_closure && !in_target));
    }
}

TEST_CASE("complement requires a single-inequality target") {
    OccupationProblem p = example1();
    p.target.inequalities.push_back(p.target.inequalities[0]);
    CHECK_THROWS_AS((void)complement_within(p.safe, p.target), std::invalid_argument);
}

TEST_CASE("target covering the whole safe set empties the complement interior") {
    OccupationProblem p = example1();
    Polynomial x = Polynomial::variable(1, 0);
    p.target.inequalities = {Polynomial::constant(1, 4.0) - x * x};  // [-2,2] covers [-1,1]
    const auto comp = complement_within(p.safe, p.target);
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> unit(-0.999, 0.999);
    for (int k = 0; k < 300; ++k) CHECK(!comp.contains(pt(unit(rng))));
}

TEST_CASE("archimedean ball is appended once and skipped when present") {
    OccupationProblem p = example1();
    const auto with_ball = with_archimedean_ball(p.safe, p.box);
    // 1 - x^2 already is the covering ball in 1D.
    CHECK(with_ball.inequalities.size() == p.safe.inequalities.size());

    SemialgebraicSet strip;
    strip.dimension = 1;
    Polynomial x = Polynomial::variable(1, 0);
    strip.inequalities = {Polynomial::constant(1, 1.0) - x, x + Polynomial::constant(1, 1.0)};
    const auto strip_ball = with_archimedean_ball(strip, p.box);
    REQUIRE(strip_ball.inequalities.size() == 3);
    CHECK(evaluate(strip_ball.inequalities[2], pt(0.0)) == doctest::Approx(1.0));
    CHECK(evaluate(strip_ball.inequalities[2], pt(1.0)) == doctest::Approx(0.0));
}

TEST_CASE("normalization maps the problem onto the unit box and back") {
    OccupationProblem p = example1();
    p.box.lower = pt(-2.0);
    p.box.upper = pt(1.0);
    const auto norm = normalize_to_box(p);
    CHECK(norm.box.lower[0] == -1.0);
    CHECK(norm.box.upper[0] == 1.0);

    // Generator commutes with the change of variables.
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Polynomial v_norm = chebyshev_basis(1, 4)[4];
    const Polynomial v_orig = denormalize_polynomial(v_norm, p.box);
    const Polynomial lv_norm = generator(v_norm, norm.model);
    const Polynomial lv_orig = generator(v_orig, p.model);
    const Eigen::VectorXd c = p.box.center(), h = p.box.halfwidth();
    for (int k = 0; k < 100; ++k) {
        const double u = unit(rng);
        const double x = c[0] + h[0] * u;
        CHECK(evaluate(lv_norm, pt(u)) == doctest::Approx(evaluate(lv_orig, pt(x))).epsilon(1e-9));
        CHECK(evaluate(v_norm, pt(u)) == doctest::Approx(evaluate(v_orig, pt(x))).epsilon(1e-10));
    }
    // x0 maps consistently.
    CHECK(evaluate(v_norm, norm.model.initial_state) ==
          doctest::Approx(evaluate(v_orig, p.model.initial_state)).epsilon(1e-10));
}
