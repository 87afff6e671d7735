#ifndef OCCUCERT_POLYNOMIAL_HPP
#define OCCUCERT_POLYNOMIAL_HPP

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace occucert {

/// Exponent tuple of a monomial; length equals the ambient dimension.
struct Monomial {
    std::vector<int> exponents;

    Monomial() = default;
    explicit Monomial(std::vector<int> e) : exponents(std::move(e)) {}
    static Monomial unit(int dim) { return Monomial(std::vector<int>(dim, 0)); }

    int dimension() const { return static_cast<int>(exponents.size()); }
    int degree() const;
    Monomial times(const Monomial& other) const;
    double eval(const Eigen::VectorXd& x) const;
};

/// Graded lexicographic order: total degree first, then lexicographic.
struct GrlexLess {
    bool operator()(const Monomial& a, const Monomial& b) const;
};

bool operator==(const Monomial& a, const Monomial& b);

/// Multivariate polynomial over a fixed number of variables, stored as a
/// canonical grlex-ordered term map. Zero coefficients are never stored,
/// so equality of term maps is equality of polynomials. Immutable in
/// spirit: all operations return new values.
class Polynomial {
  public:
    using TermMap = std::map<Monomial, double, GrlexLess>;

    explicit Polynomial(int dimension = 1);
    Polynomial(int dimension, TermMap terms);

    static Polynomial zero(int dimension) { return Polynomial(dimension); }
    static Polynomial constant(int dimension, double c);
    /// The variable x_i as a degree-1 polynomial.
    static Polynomial variable(int dimension, int i);
    static Polynomial monomial(Monomial m, double coeff);

    int dimension() const { return dim_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    int degree() const;  // -1 for the zero polynomial
    double coefficient(const Monomial& m) const;
    double max_abs_coefficient() const;

    double operator()(const Eigen::VectorXd& x) const;

    Polynomial& add_term(const Monomial& m, double coeff);  // builder helper

    Polynomial operator-() const;
    Polynomial operator*(double s) const;

    std::string str(const std::vector<std::string>& names = {}) const;

  private:
    int dim_;
    TermMap terms_;
};

bool operator==(const Polynomial& p, const Polynomial& q);
inline bool operator!=(const Polynomial& p, const Polynomial& q) { return !(p == q); }

Polynomial add(const Polynomial& p, const Polynomial& q);
Polynomial sub(const Polynomial& p, const Polynomial& q);
Polynomial mul(const Polynomial& p, const Polynomial& q);
inline Polynomial operator+(const Polynomial& p, const Polynomial& q) { return add(p, q); }
inline Polynomial operator-(const Polynomial& p, const Polynomial& q) { return sub(p, q); }
inline Polynomial operator*(const Polynomial& p, const Polynomial& q) { return mul(p, q); }
inline Polynomial operator*(double s, const Polynomial& p) { return p * s; }

/// Partial derivative with respect to variable i.
Polynomial differentiate(const Polynomial& p, int i);

/// Gradient as a vector of polynomials, one per variable.
std::vector<Polynomial> grad(const Polynomial& p);

/// Symmetric matrix of second partials, row-major dim x dim.
std::vector<std::vector<Polynomial>> hessian(const Polynomial& p);

double evaluate(const Polynomial& p, const Eigen::VectorXd& point);

/// Substitute x_i = offset_i + scale_i * u_i, returning a polynomial in u.
/// Exact coefficient arithmetic through binomial expansion.
Polynomial substitute_affine(const Polynomial& p, const Eigen::VectorXd& offset,
                             const Eigen::VectorXd& scale);

/// All monomials of the given dimension with total degree <= max_degree,
/// in grlex order. The canonical basis used for Gram matrices and SDP rows.
std::vector<Monomial> monomial_basis(int dimension, int max_degree);

/// Tensor-product Chebyshev basis on [-1,1]^n: element for exponent tuple e
/// is prod_i T_{e_i}(x_i), enumerated in the same grlex order as
/// monomial_basis. Spans the same space with far better conditioning.
std::vector<Polynomial> chebyshev_basis(int dimension, int max_degree);

/// Flattened evaluator for simulation hot loops: one shared power table per
/// evaluation point serves every polynomial compiled against it.
class CompiledPolynomial {
  public:
    CompiledPolynomial() = default;
    explicit CompiledPolynomial(const Polynomial& p);
    double eval(const Eigen::VectorXd& x) const;
    int max_degree() const { return max_deg_; }
    /// Evaluate using a precomputed power table pow(i, k) = x_i^k.
    double eval_with_table(const Eigen::MatrixXd& pow) const;

  private:
    int dim_ = 0;
    int max_deg_ = 0;
    std::vector<double> coeffs_;
    std::vector<std::vector<int>> expo_;
};

}  // namespace occucert

#endif
