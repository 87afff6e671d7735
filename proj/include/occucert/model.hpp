#ifndef OCCUCERT_MODEL_HPP
#define OCCUCERT_MODEL_HPP

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "occucert/polynomial.hpp"

namespace occucert {

/// Basic semialgebraic region {x : g_i(x) >= 0, e_j(x) = 0}. Boundary
/// pieces produced by boundary_of carry equalities; plain sets do not.
struct SemialgebraicSet {
    enum class Kind { OpenInterior, Closed };

    int dimension = 1;
    std::vector<Polynomial> inequalities;
    std::vector<Polynomial> equalities;
    Kind kind = Kind::Closed;

    bool contains(const Eigen::VectorXd& x, double equality_tol = 1e-9) const;
    /// min_i g_i(x); membership margin for interior checks.
    double margin(const Eigen::VectorXd& x) const;
};

/// Polynomial Ito diffusion dX = f(X) dt + sigma(X) dW with X_0 = x0.
struct SdeModel {
    int dimension = 1;      // n
    int brownian_dim = 1;   // m
    std::vector<Polynomial> drift;                 // n entries
    std::vector<std::vector<Polynomial>> diffusion;  // n x m
    Eigen::VectorXd initial_state;

    void check_shapes() const;  // throws on inconsistent dimensions
};

/// Axis-aligned box; asserts boundedness of the safe set and provides the
/// normalization frame for SDP assembly.
struct BoundingBox {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    Eigen::VectorXd center() const { return 0.5 * (lower + upper); }
    Eigen::VectorXd halfwidth() const { return 0.5 * (upper - lower); }
};

struct OccupationProblem {
    SdeModel model;
    SemialgebraicSet safe;    // open interior
    SemialgebraicSet target;  // closed, single inequality
    BoundingBox box;          // bounding box of the safe set
    double horizon = 1.0;     // H
    double threshold = 1.0;   // K
};

/// Ito infinitesimal generator Lv = grad(v).f + 1/2 Tr(sigma^T H_v sigma),
/// exact in the polynomial ring.
Polynomial generator(const Polynomial& v, const SdeModel& model);

/// Every detected violation of the problem invariants; empty means admitted.
/// Containment and interiority are checked on a sampled grid per the
/// documented sampling policy (10^4 points, strict margin 1e-6).
std::vector<std::string> validate(const OccupationProblem& problem);

/// Per-inequality boundary pieces {g_i = 0, g_j >= 0 for j != i}. Their
/// union over-approximates the topological boundary, which is the sound
/// direction for sink conditions.
std::vector<SemialgebraicSet> boundary_of(const SemialgebraicSet& safe);

/// Closed superset of cl(safe) \ target: all safe inequalities plus the
/// negated target inequality. Requires a single-inequality target.
SemialgebraicSet complement_within(const SemialgebraicSet& safe, const SemialgebraicSet& target);

/// Appends the covering ball R^2 - |x - c|^2 >= 0 derived from the box
/// unless an identical inequality is already present (Archimedean
/// description for the Putinar encoding).
SemialgebraicSet with_archimedean_ball(const SemialgebraicSet& safe, const BoundingBox& box);

/// Problem mapped through x = center + halfwidth .* u onto [-1,1]^n.
/// Bounds are invariant under this change of variables; certificates are
/// mapped back with denormalize_polynomial.
OccupationProblem normalize_to_box(const OccupationProblem& problem);

/// Inverse coordinate change for polynomials produced in normalized space.
Polynomial denormalize_polynomial(const Polynomial& p_normalized, const BoundingBox& box);

/// Uniform grid over the box with roughly `budget` points total.
std::vector<Eigen::VectorXd> grid_points(const BoundingBox& box, int budget);

}  // namespace occucert

#endif
