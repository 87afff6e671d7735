#include "occucert/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace occucert {

int Monomial::degree() const {
    return std::accumulate(exponents.begin(), exponents.end(), 0);
}

Monomial Monomial::times(const Monomial& other) const {
    if (dimension() != other.dimension())
        throw std::invalid_argument("monomial dimension mismatch");
    Monomial out = *this;
    for (int i = 0; i < dimension(); ++i) out.exponents[i] += other.exponents[i];
    return out;
}

double Monomial::eval(const Eigen::VectorXd& x) const {
    double v = 1.0;
    for (int i = 0; i < dimension(); ++i) {
        for (int k = 0; k < exponents[i]; ++k) v *= x[i];
    }
    return v;
}

bool GrlexLess::operator()(const Monomial& a, const Monomial& b) const {
    const int da = a.degree(), db = b.degree();
    if (da != db) return da < db;
    return std::lexicographical_compare(b.exponents.begin(), b.exponents.end(),
                                        a.exponents.begin(), a.exponents.end());
}

bool operator==(const Monomial& a, const Monomial& b) { return a.exponents == b.exponents; }

Polynomial::Polynomial(int dimension) : dim_(dimension) {
    if (dimension <= 0) throw std::invalid_argument("polynomial dimension must be positive");
}

Polynomial::Polynomial(int dimension, TermMap terms) : Polynomial(dimension) {
    for (auto& [m, c] : terms) {
        if (m.dimension() != dim_) throw std::invalid_argument("monomial dimension mismatch");
        if (c != 0.0) terms_.emplace(m, c);
    }
}

Polynomial Polynomial::constant(int dimension, double c) {
    Polynomial p(dimension);
    p.add_term(Monomial::unit(dimension), c);
    return p;
}

Polynomial Polynomial::variable(int dimension, int i) {
    if (i < 0 || i >= dimension) throw std::invalid_argument("variable index out of range");
    Monomial m = Monomial::unit(dimension);
    m.exponents[i] = 1;
    return monomial(m, 1.0);
}

Polynomial Polynomial::monomial(Monomial m, double coeff) {
    Polynomial p(m.dimension());
    p.add_term(m, coeff);
    return p;
}

int Polynomial::degree() const {
    if (terms_.empty()) return -1;
    return terms_.rbegin()->first.degree();
}

double Polynomial::coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? 0.0 : it->second;
}

double Polynomial::max_abs_coefficient() const {
    double m = 0.0;
    for (const auto& [mono, c] : terms_) m = std::max(m, std::abs(c));
    return m;
}

double Polynomial::operator()(const Eigen::VectorXd& x) const { return evaluate(*this, x); }

Polynomial& Polynomial::add_term(const Monomial& m, double coeff) {
    if (m.dimension() != dim_) throw std::invalid_argument("monomial dimension mismatch");
    auto it = terms_.find(m);
    if (it == terms_.end()) {
        if (coeff != 0.0) terms_.emplace(m, coeff);
    } else {
        it->second += coeff;
        if (it->second == 0.0) terms_.erase(it);
    }
    return *this;
}

Polynomial Polynomial::operator-() const { return *this * -1.0; }

Polynomial Polynomial::operator*(double s) const {
    Polynomial out(dim_);
    if (s == 0.0) return out;
    for (const auto& [m, c] : terms_) out.terms_.emplace(m, c * s);
    return out;
}

std::string Polynomial::str(const std::vector<std::string>& names) const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    // Highest degree first reads better in reports.
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        const auto& [m, c] = *it;
        if (std::abs(c) < 1e-12) continue;  // print-time pruning only
        if (!first) os << (c < 0 ? " - " : " + ");
        else if (c < 0) os << "-";
        first = false;
        const double a = std::abs(c);
        bool printed_coeff = false;
        if (a != 1.0 || m.degree() == 0) {
            os << a;
            printed_coeff = true;
        }
        for (int i = 0; i < dim_; ++i) {
            if (m.exponents[i] == 0) continue;
            if (printed_coeff) os << "*";
            printed_coeff = true;
            if (static_cast<int>(names.size()) > i) os << names[i];
            else os << "x" << (dim_ > 1 ? std::to_string(i + 1) : "");
            if (m.exponents[i] > 1) os << "^" << m.exponents[i];
        }
    }
    if (first) return "0";
    return os.str();
}

bool operator==(const Polynomial& p, const Polynomial& q) {
    if (p.dimension() != q.dimension()) return false;
    const auto& a = p.terms();
    const auto& b = q.terms();
    if (a.size() != b.size()) return false;
    auto it = a.begin();
    auto jt = b.begin();
    for (; it != a.end(); ++it, ++jt) {
        if (!(it->first == jt->first) || it->second != jt->second) return false;
    }
    return true;
}

static void check_dims(const Polynomial& p, const Polynomial& q) {
    if (p.dimension() != q.dimension())
        throw std::invalid_argument("polynomial dimension mismatch");
}

Polynomial add(const Polynomial& p, const Polynomial& q) {
    check_dims(p, q);
    Polynomial out = p;
    for (const auto& [m, c] : q.terms()) out.add_term(m, c);
    return out;
}

Polynomial sub(const Polynomial& p, const Polynomial& q) {
    check_dims(p, q);
    Polynomial out = p;
    for (const auto& [m, c] : q.terms()) out.add_term(m, -c);
    return out;
}

Polynomial mul(const Polynomial& p, const Polynomial& q) {
    check_dims(p, q);
    Polynomial out(p.dimension());
    for (const auto& [mp, cp] : p.terms()) {
        for (const auto& [mq, cq] : q.terms()) {
            out.add_term(mp.times(mq), cp * cq);
        }
    }
    return out;
}

Polynomial differentiate(const Polynomial& p, int i) {
    if (i < 0 || i >= p.dimension()) throw std::invalid_argument("variable index out of range");
    Polynomial out(p.dimension());
    for (const auto& [m, c] : p.terms()) {
        if (m.exponents[i] == 0) continue;
        Monomial d = m;
        const int e = d.exponents[i]--;
        out.add_term(d, c * e);
    }
    return out;
}

std::vector<Polynomial> grad(const Polynomial& p) {
    std::vector<Polynomial> g;
    g.reserve(p.dimension());
    for (int i = 0; i < p.dimension(); ++i) g.push_back(differentiate(p, i));
    return g;
}

std::vector<std::vector<Polynomial>> hessian(const Polynomial& p) {
    const int n = p.dimension();
    std::vector<std::vector<Polynomial>> h(n, std::vector<Polynomial>(n, Polynomial(n)));
    for (int i = 0; i < n; ++i) {
        Polynomial di = differentiate(p, i);
        for (int j = i; j < n; ++j) {
            h[i][j] = differentiate(di, j);
            if (j != i) h[j][i] = h[i][j];
        }
    }
    return h;
}

double evaluate(const Polynomial& p, const Eigen::VectorXd& point) {
    if (point.size() != p.dimension())
        throw std::invalid_argument("evaluation point dimension mismatch");
    // Powers-table evaluation; exact up to floating point, cheap for the
    // desk-scale degrees this library targets.
    const int d = std::max(p.degree(), 0);
    Eigen::MatrixXd pow(p.dimension(), d + 1);
    pow.col(0).setOnes();
    for (int k = 1; k <= d; ++k) pow.col(k) = pow.col(k - 1).cwiseProduct(point);
    double acc = 0.0;
    for (const auto& [m, c] : p.terms()) {
        double t = c;
        for (int i = 0; i < p.dimension(); ++i) t *= pow(i, m.exponents[i]);
        acc += t;
    }
    return acc;
}

Polynomial substitute_affine(const Polynomial& p, const Eigen::VectorXd& offset,
                             const Eigen::VectorXd& scale) {
    const int n = p.dimension();
    if (offset.size() != n || scale.size() != n)
        throw std::invalid_argument("affine substitution dimension mismatch");
    // Precompute (offset_i + scale_i u_i)^k for each variable and power.
    const int d = std::max(p.degree(), 0);
    std::vector<std::vector<Polynomial>> pw(n);
    for (int i = 0; i < n; ++i) {
        pw[i].reserve(d + 1);
        pw[i].push_back(Polynomial::constant(n, 1.0));
        Polynomial lin = Polynomial::constant(n, offset[i]) + scale[i] * Polynomial::variable(n, i);
        for (int k = 1; k <= d; ++k) pw[i].push_back(mul(pw[i][k - 1], lin));
    }
    Polynomial out(n);
    for (const auto& [m, c] : p.terms()) {
        Polynomial term = Polynomial::constant(n, c);
        for (int i = 0; i < n; ++i) {
            if (m.exponents[i] > 0) term = mul(term, pw[i][m.exponents[i]]);
        }
        out = add(out, term);
    }
    return out;
}

static void enumerate_exponents(int dim, int i, int remaining, std::vector<int>& cur,
                                std::vector<Monomial>& out) {
    if (i == dim) {
        out.emplace_back(cur);
        return;
    }
    for (int e = 0; e <= remaining; ++e) {
        cur[i] = e;
        enumerate_exponents(dim, i + 1, remaining - e, cur, out);
    }
    cur[i] = 0;
}

std::vector<Monomial> monomial_basis(int dimension, int max_degree) {
    std::vector<Monomial> out;
    std::vector<int> cur(dimension, 0);
    enumerate_exponents(dimension, 0, max_degree, cur, out);
    std::sort(out.begin(), out.end(), GrlexLess{});
    return out;
}

std::vector<Polynomial> chebyshev_basis(int dimension, int max_degree) {
    // Univariate T_k by recurrence, exact integer coefficients.
    std::vector<std::vector<Polynomial>> T(dimension);
    for (int i = 0; i < dimension; ++i) {
        T[i].push_back(Polynomial::constant(dimension, 1.0));
        if (max_degree >= 1) T[i].push_back(Polynomial::variable(dimension, i));
        for (int k = 2; k <= max_degree; ++k) {
            T[i].push_back(sub(mul(Polynomial::variable(dimension, i) * 2.0, T[i][k - 1]),
                               T[i][k - 2]));
        }
    }
    std::vector<Polynomial> out;
    for (const auto& m : monomial_basis(dimension, max_degree)) {
        Polynomial b = Polynomial::constant(dimension, 1.0);
        for (int i = 0; i < dimension; ++i) {
            if (m.exponents[i] > 0) b = mul(b, T[i][m.exponents[i]]);
        }
        out.push_back(std::move(b));
    }
    return out;
}

CompiledPolynomial::CompiledPolynomial(const Polynomial& p)
    : dim_(p.dimension()), max_deg_(std::max(p.degree(), 0)) {
    for (const auto& [m, c] : p.terms()) {
        coeffs_.push_back(c);
        expo_.push_back(m.exponents);
    }
}

double CompiledPolynomial::eval(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd pow(dim_, max_deg_ + 1);
    pow.col(0).setOnes();
    for (int k = 1; k <= max_deg_; ++k) pow.col(k) = pow.col(k - 1).cwiseProduct(x);
    return eval_with_table(pow);
}

double CompiledPolynomial::eval_with_table(const Eigen::MatrixXd& pow) const {
    double acc = 0.0;
    for (std::size_t t = 0; t < coeffs_.size(); ++t) {
        double v = coeffs_[t];
        const auto& e = expo_[t];
        for (int i = 0; i < dim_; ++i) v *= pow(i, e[i]);
        acc += v;
    }
    return acc;
}

}  // namespace occucert
