#ifndef OCCUCERT_SOLVER_HPP
#define OCCUCERT_SOLVER_HPP

#include <Eigen/Core>
#include <memory>
#include <string>
#include <vector>

namespace occucert {

/// Symmetric vectorization: upper triangle stacked column-wise with
/// off-diagonal entries scaled by sqrt(2), so that <X,Y> = svec(X).svec(Y).
inline int svec_size(int d) { return d * (d + 1) / 2; }

template <typename Derived>
Eigen::Vector<typename Derived::Scalar, Eigen::Dynamic> sym_to_svec(
    const Eigen::MatrixBase<Derived>& X) {
    using Scalar = typename Derived::Scalar;
    const int d = static_cast<int>(X.rows());
    const Scalar rt2 = std::sqrt(Scalar(2));
    Eigen::Vector<Scalar, Eigen::Dynamic> v(svec_size(d));
    int k = 0;
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i <= j; ++i) {
            v[k++] = (i == j) ? X(i, j) : rt2 * Scalar(0.5) * (X(i, j) + X(j, i));
        }
    }
    return v;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> svec_to_sym(
    const Eigen::Vector<Scalar, Eigen::Dynamic>& v, int d) {
    const Scalar inv_rt2 = Scalar(1) / std::sqrt(Scalar(2));
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> X(d, d);
    int k = 0;
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i <= j; ++i) {
            if (i == j) X(i, j) = v[k];
            else X(i, j) = X(j, i) = v[k] * inv_rt2;
            ++k;
        }
    }
    return X;
}

/// Cone layout of the primal variable: free coordinates first, then one
/// svec segment per PSD block.
struct ConeSpec {
    int num_free = 0;
    std::vector<int> psd_dims;

    int total_size() const {
        int n = num_free;
        for (int d : psd_dims) n += svec_size(d);
        return n;
    }
    int psd_offset(int block) const {
        int off = num_free;
        for (int b = 0; b < block; ++b) off += svec_size(psd_dims[b]);
        return off;
    }
};

/// minimize <c,x>  subject to  A x = b,  x in R^free x PSD x ... x PSD.
struct ConicProblem {
    ConeSpec cones;
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::VectorXd c;
};

enum class SolveStatus { Optimal, Infeasible, DualInfeasible, NumericalFailure, IterationLimit };

std::string to_string(SolveStatus s);

struct SolverReport {
    SolveStatus status = SolveStatus::NumericalFailure;
    double objective_value = std::numeric_limits<double>::quiet_NaN();
    double dual_objective = std::numeric_limits<double>::quiet_NaN();
    double primal_residual = std::numeric_limits<double>::quiet_NaN();
    double dual_residual = std::numeric_limits<double>::quiet_NaN();
    double duality_gap = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    std::vector<double> psd_min_eigenvalues;
    /// Worst signed violation found by the sampling post-check; filled in
    /// by sosc::postcheck, NaN until then.
    double residual_sample_max_violation = std::numeric_limits<double>::quiet_NaN();
    std::string message;
};

struct ConicSolution {
    SolverReport report;
    Eigen::VectorXd x;  // primal (already divided by tau)
    Eigen::VectorXd y;  // equality multipliers
    Eigen::VectorXd s;  // dual slack
};

/// Abstract conic-solver backend.
class ConicSolver {
  public:
    virtual ~ConicSolver() = default;
    virtual ConicSolution solve(const ConicProblem& problem) const = 0;
};

struct IpmOptions {
    int max_iterations = 200;
    double feasibility_tol = 1e-8;
    double gap_tol = 5e-7;
    double infeasibility_tol = 1e-9;
    double step_fraction = 0.98;
    bool verbose = false;
};

/// Dense primal-dual interior-point method on the homogeneous self-dual
/// embedding with Nesterov-Todd scaling and Mehrotra predictor-corrector.
/// Iterations run in extended precision, which is what lets certificates
/// with 1e-5-scale feasibility margins resolve cleanly.
class InteriorPointSolver : public ConicSolver {
  public:
    explicit InteriorPointSolver(IpmOptions options = {}) : options_(options) {}
    ConicSolution solve(const ConicProblem& problem) const override;

  private:
    IpmOptions options_;
};

}  // namespace occucert

#endif
