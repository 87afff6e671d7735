#ifndef OCCUCERT_SOS_HPP
#define OCCUCERT_SOS_HPP

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "occucert/model.hpp"
#include "occucert/polynomial.hpp"
#include "occucert/solver.hpp"

namespace occucert {

/// Polynomial expression affine in the scalar decision variables:
/// constant(x) + sum_k dec_k * linear_k(x).
struct AffinePolynomial {
    Polynomial constant;
    std::vector<std::pair<int, Polynomial>> linear;

    explicit AffinePolynomial(int dimension = 1) : constant(dimension) {}
    int dimension() const { return constant.dimension(); }
    int degree() const;
    Polynomial instantiate(const Eigen::VectorXd& decisions) const;
    AffinePolynomial& add_linear(int decision, const Polynomial& p);
};

enum class VarSign { Free, NonNegative, NonPositive };

struct DecisionSpace {
    std::vector<std::string> names;
    std::vector<VarSign> signs;

    int add(std::string name, VarSign sign) {
        names.push_back(std::move(name));
        signs.push_back(sign);
        return static_cast<int>(names.size()) - 1;
    }
    int size() const { return static_cast<int>(names.size()); }
};

/// "residual(x) >= 0 on region" to be certified as
/// residual = sigma_0 + sum_i sigma_i g_i + sum_j t_j e_j with sigma SOS.
struct SosConstraint {
    std::string label;
    AffinePolynomial residual;
    SemialgebraicSet region;
    int multiplier_degree = 0;  // even cap on every multiplier block
};

/// Degree bookkeeping per the degree-matching rule: sigma_0 of degree D2,
/// sigma_i of degree 2*floor((D2 - deg g_i)/2), t_j of degree D2 - deg e_j,
/// where D2 is deg(residual) rounded up to even (capped by multiplier_degree).
SosConstraint encode_nonneg_on(std::string label, AffinePolynomial residual,
                               SemialgebraicSet region, int multiplier_degree);

/// Assembled SDP plus the bookkeeping needed to reconstruct multipliers,
/// post-check the identity by sampling, and export the problem.
struct AssembledSdp {
    ConicProblem conic;

    struct DecisionRef {
        int column;    // index into conic x
        double scale;  // decision value = scale * x[column]
    };
    struct GramInfo {
        std::vector<Polynomial> basis;  // Chebyshev products on the box
        Polynomial generator;           // g_i (constant 1 for sigma_0)
        int column_offset;              // into conic x (svec segment)
    };
    struct FreeMultInfo {
        std::vector<Polynomial> basis;
        Polynomial generator;  // e_j
        int column_offset;
    };
    struct ConstraintInfo {
        SosConstraint constraint;
        double scale = 1.0;  // identity was divided by this factor
        std::vector<GramInfo> grams;
        std::vector<FreeMultInfo> free_mults;
        std::vector<Monomial> rows;
        int row_offset = 0;
    };

    DecisionSpace decisions;
    std::vector<DecisionRef> decision_refs;
    std::vector<ConstraintInfo> constraints;
    bool maximize = false;
    Eigen::VectorXd objective;  // over decision variables, pre-flip
};

/// Deterministic coefficient-matching assembly in grlex row order.
/// Identical inputs produce bit-identical problems.
AssembledSdp assemble(const DecisionSpace& decisions,
                      const std::vector<SosConstraint>& constraints,
                      const Eigen::VectorXd& objective, bool maximize);

struct SosSolution {
    SolverReport report;
    Eigen::VectorXd decisions;
    Eigen::VectorXd raw_x;
};

SosSolution solve_sos(const AssembledSdp& sdp, const ConicSolver& solver);

/// Uniform samples from a semialgebraic region inside the box. Regions with
/// equalities are sampled by bisecting sign changes of the equality along
/// random chords, then filtering by the inequalities.
std::vector<Eigen::VectorXd> sample_region(const SemialgebraicSet& region,
                                           const BoundingBox& box, int count,
                                           std::uint64_t seed);

/// Worst signed violation over sampled points of (a) the instantiated
/// identity residual-minus-representation and (b) the residual's
/// nonnegativity on its region. Small values certify the solve.
double postcheck(const AssembledSdp& sdp, const SosSolution& solution, const BoundingBox& box,
                 int samples_per_region = 10000, std::uint64_t seed = 20240901);

/// Sparse SDPA (.dat-s) export of the assembled problem, LMI-dual form with
/// free columns handled as paired diagonal entries.
void write_sdpa(const AssembledSdp& sdp, std::ostream& out);

}  // namespace occucert

#endif
