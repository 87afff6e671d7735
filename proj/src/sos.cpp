#include "occucert/sos.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <random>
#include <stdexcept>

namespace occucert {

int AffinePolynomial::degree() const {
    int d = constant.degree();
    for (const auto& [k, p] : linear) d = std::max(d, p.degree());
    return d;
}

Polynomial AffinePolynomial::instantiate(const Eigen::VectorXd& decisions) const {
    Polynomial out = constant;
    for (const auto& [k, p] : linear) {
        if (k < 0 || k >= decisions.size())
            throw std::invalid_argument("decision index out of range");
        out = add(out, p * decisions[k]);
    }
    return out;
}

AffinePolynomial& AffinePolynomial::add_linear(int decision, const Polynomial& p) {
    if (!p.is_zero()) linear.emplace_back(decision, p);
    return *this;
}

SosConstraint encode_nonneg_on(std::string label, AffinePolynomial residual,
                               SemialgebraicSet region, int multiplier_degree) {
    if (multiplier_degree < 0 || multiplier_degree % 2 != 0)
        throw std::invalid_argument("multiplier degree must be even and nonnegative");
    SosConstraint c;
    c.label = std::move(label);
    c.residual = std::move(residual);
    c.region = std::move(region);
    const int dres = std::max(c.residual.degree(), 0);
    c.multiplier_degree = std::min(multiplier_degree, dres + (dres % 2));
    return c;
}

namespace {

/// Expansion coefficients of x^k over T_0..T_k, exact dyadic rationals,
/// built by repeated multiply-by-x in Chebyshev space:
/// x T_j = (T_{j+1} + T_{|j-1|}) / 2.
const std::vector<double>& monomial_in_cheb(int k) {
    static std::vector<std::vector<double>> table = {{1.0}};
    while (static_cast<int>(table.size()) <= k) {
        const auto& prev = table.back();
        const int deg = static_cast<int>(table.size()) - 1;
        std::vector<double> next(deg + 2, 0.0);
        for (int j = 0; j <= deg; ++j) {
            const double cj = prev[j];
            if (cj == 0.0) continue;
            if (j == 0) {
                next[1] += cj;
            } else {
                next[j + 1] += 0.5 * cj;
                next[j - 1] += 0.5 * cj;
            }
        }
        table.push_back(std::move(next));
    }
    return table[k];
}

/// Coefficients of p over the tensor-Chebyshev basis, keyed by the T-index
/// tuple. Exact for the dyadic transform; this is what keeps high-degree
/// rows unit-scale in the assembled SDP.
std::map<Monomial, double, GrlexLess> cheb_coefficients(const Polynomial& p) {
    const int n = p.dimension();
    std::map<Monomial, double, GrlexLess> out;
    for (const auto& [mono, coef] : p.terms()) {
        std::vector<std::pair<Monomial, double>> acc = {{Monomial::unit(n), coef}};
        for (int i = 0; i < n; ++i) {
            const auto& expand = monomial_in_cheb(mono.exponents[i]);
            std::vector<std::pair<Monomial, double>> nxt;
            for (const auto& [idx, val] : acc) {
                for (int j = 0; j < static_cast<int>(expand.size()); ++j) {
                    if (expand[j] == 0.0) continue;
                    Monomial ext = idx;
                    ext.exponents[i] = j;
                    nxt.emplace_back(std::move(ext), val * expand[j]);
                }
            }
            acc = std::move(nxt);
        }
        for (const auto& [idx, val] : acc) {
            auto [it, inserted] = out.emplace(idx, val);
            if (!inserted) it->second += val;
        }
    }
    for (auto it = out.begin(); it != out.end();) {
        if (it->second == 0.0) it = out.erase(it);
        else ++it;
    }
    return out;
}

double max_abs_cheb(const Polynomial& p) {
    double m = 0.0;
    for (const auto& [idx, v] : cheb_coefficients(p)) m = std::max(m, std::abs(v));
    return m;
}

/// Coefficient column of one svec Gram coordinate times a generator:
/// contribution of svec entry (a,b) to sigma is (a==b ? 1 : sqrt(2)) z_a z_b.
Polynomial gram_unit_poly(const std::vector<Polynomial>& basis, int a, int b) {
    const double w = (a == b) ? 1.0 : std::sqrt(2.0);
    return mul(basis[a], basis[b]) * w;
}

}  // namespace

AssembledSdp assemble(const DecisionSpace& decisions,
                      const std::vector<SosConstraint>& constraints,
                      const Eigen::VectorXd& objective, bool maximize) {
    if (objective.size() != decisions.size())
        throw std::invalid_argument("objective length must match decision space");

    AssembledSdp out;
    out.decisions = decisions;
    out.maximize = maximize;
    out.objective = objective;

    // Column layout: [free decisions | free multiplier coeffs | PSD blocks].
    // Sign-constrained decisions become 1x1 PSD blocks.
    ConeSpec cones;
    std::vector<int> decision_free_col(decisions.size(), -1);
    int n_free = 0;
    for (int k = 0; k < decisions.size(); ++k) {
        if (decisions.signs[k] == VarSign::Free) decision_free_col[k] = n_free++;
    }

    int n_free_mult = 0;
    std::vector<AssembledSdp::ConstraintInfo> infos;
    int dim = constraints.empty() ? 1 : constraints.front().residual.dimension();
    for (const auto& sc : constraints) {
        if (sc.residual.dimension() != dim)
            throw std::invalid_argument("constraints share one ambient dimension");
        AssembledSdp::ConstraintInfo info;
        info.constraint = sc;
        const int d2 = sc.multiplier_degree;
        info.rows = monomial_basis(dim, d2);

        // sigma_0 always present.
        AssembledSdp::GramInfo g0;
        g0.basis = chebyshev_basis(dim, d2 / 2);
        g0.generator = Polynomial::constant(dim, 1.0);
        info.grams.push_back(std::move(g0));
        for (const auto& g : sc.region.inequalities) {
            const int dg = std::max(g.degree(), 0);
            if (dg > d2) continue;  // product cannot fit under the cap
            AssembledSdp::GramInfo gi;
            gi.basis = chebyshev_basis(dim, (d2 - dg) / 2);
            gi.generator = g;
            info.grams.push_back(std::move(gi));
        }
        for (const auto& e : sc.region.equalities) {
            const int de = std::max(e.degree(), 0);
            if (de > d2) continue;
            AssembledSdp::FreeMultInfo fm;
            fm.basis = chebyshev_basis(dim, d2 - de);
            fm.generator = e;
            fm.column_offset = -1;  // assigned below
            n_free_mult += static_cast<int>(fm.basis.size());
            info.free_mults.push_back(std::move(fm));
        }
        infos.push_back(std::move(info));
    }

    cones.num_free = n_free + n_free_mult;
    // Assign free-multiplier columns after the decision free columns.
    int fm_cursor = n_free;
    for (auto& info : infos) {
        for (auto& fm : info.free_mults) {
            fm.column_offset = fm_cursor;
            fm_cursor += static_cast<int>(fm.basis.size());
        }
    }
    // Sign-constrained decisions first among PSD blocks, then Grams.
    out.decision_refs.resize(decisions.size());
    for (int k = 0; k < decisions.size(); ++k) {
        if (decisions.signs[k] == VarSign::Free) {
            out.decision_refs[k] = {decision_free_col[k], 1.0};
        } else {
            cones.psd_dims.push_back(1);
        }
    }
    int block_index = 0;
    for (int k = 0; k < decisions.size(); ++k) {
        if (decisions.signs[k] == VarSign::Free) continue;
        const int column = cones.num_free + block_index;  // 1x1 blocks come first
        const double scale = decisions.signs[k] == VarSign::NonNegative ? 1.0 : -1.0;
        out.decision_refs[k] = {column, scale};
        ++block_index;
    }
    for (auto& info : infos) {
        for (auto& g : info.grams) cones.psd_dims.push_back(static_cast<int>(g.basis.size()));
    }
    // Fill gram column offsets now that the full block list is known.
    {
        int blk = block_index;
        for (auto& info : infos) {
            for (auto& g : info.grams) {
                int off = cones.num_free;
                for (int b = 0; b < blk; ++b) off += svec_size(cones.psd_dims[b]);
                g.column_offset = off;
                ++blk;
            }
        }
    }

    const int N = cones.total_size();
    int m = 0;
    for (auto& info : infos) m += static_cast<int>(info.rows.size());

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, N);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);

    int row0 = 0;
    for (auto& info : infos) {
        info.row_offset = row0;
        const auto& sc = info.constraint;
        // Normalize the identity by the residual's largest coefficient so
        // every constraint presents unit-scale data to the solver.
        double scale = max_abs_cheb(sc.residual.constant);
        for (const auto& [k, p] : sc.residual.linear) scale = std::max(scale, max_abs_cheb(p));
        if (!(scale > 0.0)) scale = 1.0;
        info.scale = scale;

        std::map<Monomial, int, GrlexLess> row_of;
        for (std::size_t r = 0; r < info.rows.size(); ++r)
            row_of.emplace(info.rows[r], row0 + static_cast<int>(r));

        // Rows are indexed by tensor-Chebyshev coefficients: same equations
        // as monomial matching, but high-degree rows stay unit-scale.
        auto stamp = [&](const Polynomial& p, int col, double factor) {
            for (const auto& [idx, coef] : cheb_coefficients(p)) {
                auto it = row_of.find(idx);
                if (it == row_of.end())
                    throw std::logic_error("assembly: coefficient escapes the row basis");
                A(it->second, col) += factor * coef;
            }
        };

        // Decision columns: + residual linear part / scale.
        for (const auto& [k, p] : sc.residual.linear) {
            const auto ref = out.decision_refs[k];
            stamp(p, ref.column, ref.scale / scale);
        }
        // rhs: -constant part / scale.
        for (const auto& [idx, coef] : cheb_coefficients(sc.residual.constant)) {
            auto it = row_of.find(idx);
            if (it == row_of.end())
                throw std::logic_error("assembly: coefficient escapes the row basis");
            b[it->second] -= coef / scale;
        }
        // Multiplier columns enter with minus sign: residual - sum(...) = 0.
        for (const auto& g : info.grams) {
            const int nb = static_cast<int>(g.basis.size());
            int sv = 0;
            for (int col_b = 0; col_b < nb; ++col_b) {
                for (int row_a = 0; row_a <= col_b; ++row_a, ++sv) {
                    Polynomial unit = mul(gram_unit_poly(g.basis, row_a, col_b), g.generator);
                    stamp(unit, g.column_offset + sv, -1.0);
                }
            }
        }
        for (const auto& fm : info.free_mults) {
            for (std::size_t t = 0; t < fm.basis.size(); ++t) {
                Polynomial unit = mul(fm.basis[t], fm.generator);
                stamp(unit, fm.column_offset + static_cast<int>(t), -1.0);
            }
        }
        row0 += static_cast<int>(info.rows.size());
    }

    // Objective over conic x; minimize internally.
    Eigen::VectorXd c = Eigen::VectorXd::Zero(N);
    for (int k = 0; k < decisions.size(); ++k) {
        const auto ref = out.decision_refs[k];
        c[ref.column] += objective[k] * ref.scale;
    }
    if (maximize) c = -c;

    out.constraints = std::move(infos);
    out.conic.cones = cones;
    out.conic.A = std::move(A);
    out.conic.b = std::move(b);
    out.conic.c = std::move(c);
    return out;
}

SosSolution solve_sos(const AssembledSdp& sdp, const ConicSolver& solver) {
    SosSolution sol;
    ConicSolution cs = solver.solve(sdp.conic);
    sol.report = cs.report;
    if (sdp.maximize && cs.report.status == SolveStatus::Optimal) {
        sol.report.objective_value = -cs.report.objective_value;
        sol.report.dual_objective = -cs.report.dual_objective;
    }
    sol.raw_x = cs.x;
    sol.decisions.resize(sdp.decisions.size());
    if (cs.x.size() > 0) {
        for (int k = 0; k < sdp.decisions.size(); ++k) {
            const auto ref = sdp.decision_refs[k];
            sol.decisions[k] = ref.scale * cs.x[ref.column];
        }
    } else {
        sol.decisions.setZero();
    }
    return sol;
}

std::vector<Eigen::VectorXd> sample_region(const SemialgebraicSet& region,
                                           const BoundingBox& box, int count,
                                           std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int n = static_cast<int>(box.lower.size());
    auto draw = [&] {
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) x[i] = box.lower[i] + unit(rng) * (box.upper[i] - box.lower[i]);
        return x;
    };
    // Varieties of the safe set's own inequalities sit on the box edge, so
    // chords for root bracketing must reach past it.
    auto draw_inflated = [&] {
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) {
            const double w = box.upper[i] - box.lower[i];
            x[i] = box.lower[i] - 0.25 * w + unit(rng) * 1.5 * w;
        }
        return x;
    };

    std::vector<Eigen::VectorXd> out;
    out.reserve(count);
    const int max_attempts = count * 400;
    if (region.equalities.empty()) {
        for (int a = 0; a < max_attempts && static_cast<int>(out.size()) < count; ++a) {
            Eigen::VectorXd x = draw();
            if (region.margin(x) >= 0.0) out.push_back(std::move(x));
        }
        return out;
    }

    // Variety sampling: bisect sign changes of each equality along random
    // chords of the box, then keep points satisfying the inequalities.
    for (const auto& e : region.equalities) {
        int found = 0;
        const int want = count;
        for (int a = 0; a < max_attempts && found < want; ++a) {
            Eigen::VectorXd p = draw_inflated(), q = draw_inflated();
            double fp = evaluate(e, p), fq = evaluate(e, q);
            if (fp == 0.0) {
                if (region.margin(p) >= -1e-9) {
                    out.push_back(p);
                    ++found;
                }
                continue;
            }
            if (fp * fq > 0.0) continue;
            for (int it = 0; it < 80; ++it) {
                Eigen::VectorXd mid = 0.5 * (p + q);
                const double fm = evaluate(e, mid);
                if (fm == 0.0 || (q - p).norm() < 1e-14) {
                    p = mid;
                    break;
                }
                if (fp * fm <= 0.0) {
                    q = mid;
                    fq = fm;
                } else {
                    p = mid;
                    fp = fm;
                }
            }
            Eigen::VectorXd root = 0.5 * (p + q);
            bool ok = std::abs(evaluate(e, root)) <= 1e-9;
            for (const auto& e2 : region.equalities) {
                if (&e2 != &e && std::abs(evaluate(e2, root)) > 1e-9) ok = false;
            }
            if (ok && region.margin(root) >= -1e-9) {
                out.push_back(std::move(root));
                ++found;
            }
        }
    }
    return out;
}

double postcheck(const AssembledSdp& sdp, const SosSolution& solution, const BoundingBox& box,
                 int samples_per_region, std::uint64_t seed) {
    double worst = 0.0;
    std::uint64_t s = seed;
    for (const auto& info : sdp.constraints) {
        const Polynomial residual = info.constraint.residual.instantiate(solution.decisions);
        // Reconstruct the multiplier side, rescaled back to residual units.
        Polynomial rep(residual.dimension());
        for (const auto& g : info.grams) {
            const int nb = static_cast<int>(g.basis.size());
            Eigen::MatrixXd G = svec_to_sym<double>(
                Eigen::VectorXd(solution.raw_x.segment(g.column_offset, svec_size(nb))), nb);
            Polynomial sigma(residual.dimension());
            for (int a = 0; a < nb; ++a) {
                for (int bcol = 0; bcol < nb; ++bcol) {
                    sigma = add(sigma, mul(g.basis[a], g.basis[bcol]) * G(a, bcol));
                }
            }
            rep = add(rep, mul(sigma, g.generator));
        }
        for (const auto& fm : info.free_mults) {
            Polynomial t(residual.dimension());
            for (std::size_t k = 0; k < fm.basis.size(); ++k) {
                t = add(t, fm.basis[k] * solution.raw_x[fm.column_offset + static_cast<int>(k)]);
            }
            rep = add(rep, mul(t, fm.generator));
        }
        const Polynomial identity_gap = sub(residual * (1.0 / info.scale), rep);

        const auto pts = sample_region(info.constraint.region, box, samples_per_region, s++);
        for (const auto& x : pts) {
            worst = std::max(worst, std::abs(evaluate(identity_gap, x)));
            // Direct check of the encoded inequality, in the same normalized
            // units the identity rows were assembled in.
            const double r = evaluate(residual, x) / info.scale;
            if (r < 0.0) worst = std::max(worst, -r);
        }
    }
    return worst;
}

void write_sdpa(const AssembledSdp& sdp, std::ostream& out) {
    const auto& P = sdp.conic;
    const int m = static_cast<int>(P.A.rows());
    const int nf = P.cones.num_free;
    const int npsd = static_cast<int>(P.cones.psd_dims.size());
    const bool has_lp = nf > 0;

    out << "\"occucert SOS program: LMI dual of the assembled conic problem\"\n";
    out << "\"blocks: PSD Gram blocks";
    if (has_lp) out << ", then one diagonal block of paired free-column equalities";
    out << "\"\n";
    out << m << " = mDIM\n";
    out << (npsd + (has_lp ? 1 : 0)) << " = nBLOCK\n";
    for (int j = 0; j < npsd; ++j) out << P.cones.psd_dims[j] << " ";
    if (has_lp) out << -(2 * nf);
    out << "\n";
    // SDPA primal: min c'y s.t. sum_i y_i F_i - F0 >= 0, with our b negated
    // so its optimum equals -(our optimum).
    char buf[64];
    for (int i = 0; i < m; ++i) {
        const double v = P.b[i] == 0.0 ? 0.0 : -P.b[i];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf << (i + 1 == m ? "" : " ");
    }
    out << "\n";

    auto emit = [&](int matno, int blk, int i, int j, double v) {
        if (v == 0.0) return;
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << matno << " " << blk << " " << i << " " << j << " " << buf << "\n";
    };

    // The file describes min c~'y s.t. sum_i y_i F_i - F0 >= 0. Our dual
    // max b'y s.t. mat(c) - sum y_i mat(A_i) >= 0, c_f - A_f'y = 0 maps to
    // c~ = -b, F_i = -mat(A_i), F0 = -mat(c), with the free-column
    // equalities written as +/- pairs in a trailing diagonal block.
    const double inv_rt2 = 1.0 / std::sqrt(2.0);
    for (int matno = 0; matno <= m; ++matno) {
        const double sgn = -1.0;  // both F0 and F_i carry a global minus
        int col = nf;
        for (int j = 0; j < npsd; ++j) {
            const int d = P.cones.psd_dims[j];
            int sv = 0;
            for (int cb = 0; cb < d; ++cb) {
                for (int ra = 0; ra <= cb; ++ra, ++sv) {
                    const double svec_val = (matno == 0) ? P.c[col + sv] : P.A(matno - 1, col + sv);
                    const double mat_entry = (ra == cb) ? svec_val : svec_val * inv_rt2;
                    emit(matno, j + 1, ra + 1, cb + 1, sgn * mat_entry);
                }
            }
            col += svec_size(d);
        }
        if (has_lp) {
            for (int k = 0; k < nf; ++k) {
                const double v = (matno == 0) ? P.c[k] : P.A(matno - 1, k);
                emit(matno, npsd + 1, k + 1, k + 1, -v);
                emit(matno, npsd + 1, nf + k + 1, nf + k + 1, v);
            }
        }
    }
}

}  // namespace occucert
