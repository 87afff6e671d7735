#include "occucert/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace occucert {

bool SemialgebraicSet::contains(const Eigen::VectorXd& x, double equality_tol) const {
    for (const auto& e : equalities) {
        if (std::abs(evaluate(e, x)) > equality_tol) return false;
    }
    const double m = margin(x);
    return kind == Kind::OpenInterior ? m > 0.0 : m >= 0.0;
}

double SemialgebraicSet::margin(const Eigen::VectorXd& x) const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& g : inequalities) m = std::min(m, evaluate(g, x));
    return m;
}

void SdeModel::check_shapes() const {
    if (dimension <= 0 || brownian_dim <= 0)
        throw std::invalid_argument("model dimensions must be positive");
    if (static_cast<int>(drift.size()) != dimension)
        throw std::invalid_argument("drift must have one component per state variable");
    if (static_cast<int>(diffusion.size()) != dimension)
        throw std::invalid_argument("diffusion must have one row per state variable");
    for (const auto& f : drift) {
        if (f.dimension() != dimension) throw std::invalid_argument("drift component dimension mismatch");
    }
    for (const auto& row : diffusion) {
        if (static_cast<int>(row.size()) != brownian_dim)
            throw std::invalid_argument("diffusion must have one column per Brownian dimension");
        for (const auto& s : row) {
            if (s.dimension() != dimension)
                throw std::invalid_argument("diffusion entry dimension mismatch");
        }
    }
    if (initial_state.size() != dimension)
        throw std::invalid_argument("initial state dimension mismatch");
}

Polynomial generator(const Polynomial& v, const SdeModel& model) {
    model.check_shapes();
    if (v.dimension() != model.dimension)
        throw std::invalid_argument("generator: v dimension does not match model");
    const int n = model.dimension;
    const int m = model.brownian_dim;

    Polynomial out(n);
    const auto dv = grad(v);
    for (int i = 0; i < n; ++i) out = add(out, mul(dv[i], model.drift[i]));

    // 1/2 Tr(sigma^T H_v sigma) = 1/2 sum_k sum_{i,j} sigma_ik H_ij sigma_jk
    const auto h = hessian(v);
    for (int k = 0; k < m; ++k) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (h[i][j].is_zero()) continue;
                out = add(out, mul(mul(model.diffusion[i][k], h[i][j]), model.diffusion[j][k]) * 0.5);
            }
        }
    }
    return out;
}

std::vector<Eigen::VectorXd> grid_points(const BoundingBox& box, int budget) {
    const int n = static_cast<int>(box.lower.size());
    int per_axis = std::max(2, static_cast<int>(std::round(std::pow(double(budget), 1.0 / n))));
    std::vector<Eigen::VectorXd> pts;
    std::vector<int> idx(n, 0);
    while (true) {
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) {
            const double t = double(idx[i]) / double(per_axis - 1);
            x[i] = box.lower[i] + t * (box.upper[i] - box.lower[i]);
        }
        pts.push_back(x);
        int i = 0;
        for (; i < n; ++i) {
            if (++idx[i] < per_axis) break;
            idx[i] = 0;
        }
        if (i == n) break;
    }
    return pts;
}

std::vector<std::string> validate(const OccupationProblem& problem) {
    std::vector<std::string> out;
    try {
        problem.model.check_shapes();
    } catch (const std::exception& ex) {
        out.emplace_back(ex.what());
        return out;
    }
    const int n = problem.model.dimension;
    auto check_set = [&](const SemialgebraicSet& s, const char* name) {
        if (s.dimension != n) out.push_back(std::string(name) + " set dimension mismatch");
        if (s.inequalities.empty()) out.push_back(std::string(name) + " set needs at least one inequality");
        for (const auto& g : s.inequalities) {
            if (g.dimension() != n) out.push_back(std::string(name) + " set inequality dimension mismatch");
        }
    };
    check_set(problem.safe, "safe");
    check_set(problem.target, "target");
    if (problem.target.inequalities.size() != 1)
        out.emplace_back("target set must be described by a single polynomial inequality");
    if (problem.box.lower.size() != n || problem.box.upper.size() != n)
        out.emplace_back("bounding box dimension mismatch");
    else {
        for (int i = 0; i < n; ++i) {
            if (!(problem.box.lower[i] < problem.box.upper[i])) {
                out.emplace_back("bounding box must have positive extent in every coordinate");
                break;
            }
        }
    }
    if (!(problem.horizon > 0.0)) out.emplace_back("horizon must be positive");
    if (!(problem.threshold > 0.0)) out.emplace_back("threshold must be positive");
    if (problem.threshold > problem.horizon) out.emplace_back("threshold exceeds horizon");
    if (!out.empty()) return out;

    constexpr double kInteriorMargin = 1e-6;
    if (problem.safe.margin(problem.model.initial_state) <= 0.0)
        out.emplace_back("initial state not inside safe interior");

    // Containment T subset int(X), sampled on a grid covering T.
    const auto pts = grid_points(problem.box, 10000);
    int in_target = 0;
    bool containment_violated = false;
    for (const auto& x : pts) {
        if (problem.target.margin(x) < 0.0) continue;
        ++in_target;
        if (problem.safe.margin(x) < kInteriorMargin) containment_violated = true;
    }
    if (containment_violated) out.emplace_back("target not inside safe interior");
    if (in_target == 0) out.emplace_back("target appears empty at sampling resolution");

    // The box must actually cover the safe set's reach: x0 inside it.
    for (int i = 0; i < n; ++i) {
        if (problem.model.initial_state[i] < problem.box.lower[i] ||
            problem.model.initial_state[i] > problem.box.upper[i]) {
            out.emplace_back("initial state outside bounding box");
            break;
        }
    }
    return out;
}

std::vector<SemialgebraicSet> boundary_of(const SemialgebraicSet& safe) {
    std::vector<SemialgebraicSet> pieces;
    for (std::size_t i = 0; i < safe.inequalities.size(); ++i) {
        SemialgebraicSet piece;
        piece.dimension = safe.dimension;
        piece.kind = SemialgebraicSet::Kind::Closed;
        piece.equalities.push_back(safe.inequalities[i]);
        for (std::size_t j = 0; j < safe.inequalities.size(); ++j) {
            if (j != i) piece.inequalities.push_back(safe.inequalities[j]);
        }
        pieces.push_back(std::move(piece));
    }
    return pieces;
}

SemialgebraicSet complement_within(const SemialgebraicSet& safe, const SemialgebraicSet& target) {
    if (target.inequalities.size() != 1)
        throw std::invalid_argument(
            "complement_within: target must be a single polynomial inequality");
    SemialgebraicSet out;
    out.dimension = safe.dimension;
    out.kind = SemialgebraicSet::Kind::Closed;
    out.inequalities = safe.inequalities;
    out.inequalities.push_back(-target.inequalities[0]);
    return out;
}

SemialgebraicSet with_archimedean_ball(const SemialgebraicSet& safe, const BoundingBox& box) {
    const int n = safe.dimension;
    const Eigen::VectorXd c = box.center();
    const double r2 = box.halfwidth().squaredNorm();
    Polynomial ball = Polynomial::constant(n, r2);
    for (int i = 0; i < n; ++i) {
        Polynomial xi = Polynomial::variable(n, i) - Polynomial::constant(n, c[i]);
        ball = sub(ball, mul(xi, xi));
    }
    for (const auto& g : safe.inequalities) {
        if (g == ball) return safe;
    }
    SemialgebraicSet out = safe;
    out.inequalities.push_back(std::move(ball));
    return out;
}

static SemialgebraicSet normalize_set(const SemialgebraicSet& s, const Eigen::VectorXd& c,
                                      const Eigen::VectorXd& h) {
    SemialgebraicSet out = s;
    for (auto& g : out.inequalities) g = substitute_affine(g, c, h);
    for (auto& e : out.equalities) e = substitute_affine(e, c, h);
    return out;
}

OccupationProblem normalize_to_box(const OccupationProblem& problem) {
    const int n = problem.model.dimension;
    const Eigen::VectorXd c = problem.box.center();
    const Eigen::VectorXd h = problem.box.halfwidth();

    OccupationProblem out = problem;
    // du_i = dx_i / h_i with x = c + h .* u.
    for (int i = 0; i < n; ++i) {
        out.model.drift[i] = substitute_affine(problem.model.drift[i], c, h) * (1.0 / h[i]);
        for (int k = 0; k < problem.model.brownian_dim; ++k) {
            out.model.diffusion[i][k] =
                substitute_affine(problem.model.diffusion[i][k], c, h) * (1.0 / h[i]);
        }
    }
    out.model.initial_state = (problem.model.initial_state - c).cwiseQuotient(h);
    out.safe = normalize_set(problem.safe, c, h);
    out.target = normalize_set(problem.target, c, h);
    out.box.lower = Eigen::VectorXd::Constant(n, -1.0);
    out.box.upper = Eigen::VectorXd::Constant(n, 1.0);
    return out;
}

Polynomial denormalize_polynomial(const Polynomial& p_normalized, const BoundingBox& box) {
    // u = (x - c) ./ h  =>  substitute u_i = -c_i/h_i + (1/h_i) x_i.
    const Eigen::VectorXd c = box.center();
    const Eigen::VectorXd h = box.halfwidth();
    return substitute_affine(p_normalized, (-c.array() / h.array()).matrix(),
                             h.cwiseInverse());
}

}  // namespace occucert
