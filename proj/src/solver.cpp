#include "occucert/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <cstdio>
#include <limits>

namespace occucert {

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::DualInfeasible: return "dual-infeasible";
        case SolveStatus::NumericalFailure: return "numerical-failure";
        case SolveStatus::IterationLimit: return "iteration-limit";
    }
    return "unknown";
}

namespace {

// Homogeneous self-dual embedding with Nesterov-Todd scaling and Mehrotra
// predictor-corrector. Directions come from the NT-scaled augmented KKT
// system, whose leading block is exactly -I: the conditioning of the scaled
// constraint matrix enters linearly instead of squared, which is what the
// near-degenerate certificate programs need. Iterations run in extended
// precision; inputs and outputs are double.
template <typename Scalar>
class HsdIpm {
  public:
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Vector<Scalar, Eigen::Dynamic>;

    HsdIpm(const ConicProblem& prob, const IpmOptions& opt) : opt_(opt) {
        nf_ = prob.cones.num_free;
        dims_ = prob.cones.psd_dims;
        nb_ = static_cast<int>(dims_.size());
        m_ = static_cast<int>(prob.A.rows());
        N_ = prob.cones.total_size();
        nc_ = N_ - nf_;

        A_ = prob.A.template cast<Scalar>();
        b_ = prob.b.template cast<Scalar>();
        c_ = prob.c.template cast<Scalar>();
        Af_ = A_.leftCols(nf_);
        Ac_ = A_.rightCols(nc_);
        cf_ = c_.head(nf_);
        cc_ = c_.tail(nc_);

        nu_ = 1;  // tau*kappa pair
        for (int d : dims_) nu_ += d;
        int off = 0;
        for (int d : dims_) {
            offs_.push_back(off);
            off += svec_size(d);
        }
    }

    ConicSolution run() {
        xf_ = Vec::Zero(nf_);
        y_ = Vec::Zero(m_);
        X_.clear();
        S_.clear();
        for (int d : dims_) {
            X_.push_back(Mat::Identity(d, d));
            S_.push_back(Mat::Identity(d, d));
        }
        tau_ = Scalar(1);
        kappa_ = Scalar(1);

        const Scalar bnorm = Scalar(1) + b_.norm();
        const Scalar cnorm = Scalar(1) + c_.norm();
        int stall = 0;
        int last_iter = 0;

        for (int iter = 0; iter < opt_.max_iterations; ++iter) {
            last_iter = iter;
            Vec x = assemble_x();
            Vec s = assemble_s();
            Vec rp = A_ * x - b_ * tau_;
            Vec rd = A_.transpose() * y_ + s - c_ * tau_;
            Scalar rg = b_.dot(y_) - c_.dot(x) - kappa_;
            Scalar mu = complementarity() / Scalar(nu_);

            const Scalar pobj = c_.dot(x) / tau_;
            const Scalar dobj = b_.dot(y_) / tau_;
            const Scalar pres = (A_ * x / tau_ - b_).norm() / bnorm;
            const Scalar dres = (A_.transpose() * y_ / tau_ + s / tau_ - c_).norm() / cnorm;
            const Scalar relgap =
                abs_(pobj - dobj) / (Scalar(1) + max_(abs_(pobj), abs_(dobj)));

            if (opt_.verbose) {
                std::printf("it %3d  mu %.3Le  pres %.3Le  dres %.3Le  gap %.3Le  tau %.3Le\n",
                            iter, (long double)mu, (long double)pres, (long double)dres,
                            (long double)relgap, (long double)tau_);
            }

            // Track the best iterate seen; degenerate problems often peak in
            // accuracy and then bounce when mu hits the arithmetic floor.
            const Scalar merit = max_(max_(pres, dres), relgap);
            if (!have_best_ || merit < best_merit_) {
                save_best(merit);
                stall = 0;
            } else if (++stall >= 8) {
                return finish_from_best(iter, "progress stalled");
            }

            if (pres <= Scalar(opt_.feasibility_tol) && dres <= Scalar(opt_.feasibility_tol) &&
                relgap <= Scalar(opt_.gap_tol)) {
                polish(12);
                return finish(SolveStatus::Optimal, iter, "converged");
            }
            // Farkas certificates from the homogeneous iterate.
            if (b_.dot(y_) > Scalar(0)) {
                const Scalar q = (A_.transpose() * y_ + s).norm() / b_.dot(y_);
                if (q <= Scalar(opt_.infeasibility_tol))
                    return finish(SolveStatus::Infeasible, iter, "primal infeasibility certificate");
            }
            if (c_.dot(x) < Scalar(0)) {
                const Scalar q = (A_ * x).norm() / (-c_.dot(x));
                if (q <= Scalar(opt_.infeasibility_tol))
                    return finish(SolveStatus::DualInfeasible, iter, "dual infeasibility certificate");
            }
            if (tau_ < Scalar(1e-14) * max_(Scalar(1), kappa_)) {
                return finish_from_best(iter, "tau collapsed without a clean certificate");
            }

            if (!compute_scaling()) {
                return finish_from_best(iter, "NT scaling factorization failed");
            }
            build_kkt();

            // Predictor: pure Newton step toward complementarity zero.
            std::vector<Mat> rc(nb_);
            for (int j = 0; j < nb_; ++j) rc[j] = -X_[j];
            Direction aff = solve_direction(Scalar(1), rp, rd, rg, rc, -tau_ * kappa_);
            if (!aff.ok) return finish_from_best(iter, "singular KKT system");

            const Scalar alpha_aff = min_(Scalar(1), max_step(aff));
            const Scalar mu_aff = trial_mu(aff, alpha_aff);
            Scalar sigma = pow3_(mu_aff / mu);
            sigma = min_(max_(sigma, Scalar(0)), Scalar(1));

            // Corrector: recenter to sigma*mu with the Mehrotra second-order
            // term, assembled in the scaled frame where lambda is diagonal.
            for (int j = 0; j < nb_; ++j) {
                const int d = dims_[j];
                Mat dxt = Rinv_[j] * aff.dX[j] * Rinv_[j].transpose();
                Mat dst = R_[j].transpose() * aff.dS[j] * R_[j];
                Mat so = Scalar(0.5) * (dxt * dst + dst * dxt);
                Mat rct(d, d);
                for (int p = 0; p < d; ++p) {
                    for (int q = 0; q < d; ++q) {
                        const Scalar target =
                            (p == q) ? sigma * mu - lam_[j][p] * lam_[j][p] : Scalar(0);
                        rct(p, q) = Scalar(2) * (target - so(p, q)) / (lam_[j][p] + lam_[j][q]);
                    }
                }
                rc[j] = R_[j] * rct * R_[j].transpose();
                rc[j] = Scalar(0.5) * (rc[j] + rc[j].transpose().eval());
            }
            const Scalar rtk = sigma * mu - tau_ * kappa_ - aff.dtau * aff.dkappa;
            Direction dir = solve_direction(Scalar(1) - sigma, rp, rd, rg, rc, rtk);
            if (!dir.ok) return finish_from_best(iter, "singular KKT system");

            Scalar alpha = min_(Scalar(opt_.step_fraction) * max_step(dir), Scalar(1));
            if (alpha < Scalar(1e-10)) {
                return finish_from_best(iter, "step length collapsed");
            }
            take_step(dir, alpha);
        }
        return finish_from_best(last_iter, "iteration limit reached");
    }

  private:
    struct Direction {
        bool ok = false;
        Vec dxf, dy;
        std::vector<Mat> dX, dS;
        Scalar dtau = 0, dkappa = 0;
    };

    static Scalar abs_(Scalar v) { return v < 0 ? -v : v; }
    static Scalar max_(Scalar a, Scalar b) { return a > b ? a : b; }
    static Scalar min_(Scalar a, Scalar b) { return a < b ? a : b; }
    static Scalar pow3_(Scalar v) { return v * v * v; }

    Vec assemble_x() const {
        Vec x(N_);
        x.head(nf_) = xf_;
        for (int j = 0; j < nb_; ++j)
            x.segment(nf_ + offs_[j], svec_size(dims_[j])) = sym_to_svec(X_[j]);
        return x;
    }
    Vec assemble_s() const {
        Vec s = Vec::Zero(N_);
        for (int j = 0; j < nb_; ++j)
            s.segment(nf_ + offs_[j], svec_size(dims_[j])) = sym_to_svec(S_[j]);
        return s;
    }

    Scalar complementarity() const {
        Scalar v = tau_ * kappa_;
        for (int j = 0; j < nb_; ++j) v += (X_[j].array() * S_[j].array()).sum();
        return v;
    }

    /// Nesterov-Todd scaling point per block via the Cholesky/SVD route:
    /// X = L1 L1', S = L2 L2', L2'L1 = U Sig V', R = L1 V Sig^{-1/2}.
    /// Then R'SR = R^{-1}XR^{-T} = Sig and W = RR' satisfies WSW = X.
    bool compute_scaling() {
        R_.assign(nb_, Mat());
        Rinv_.assign(nb_, Mat());
        lam_.assign(nb_, Vec());
        for (int j = 0; j < nb_; ++j) {
            const int d = dims_[j];
            Eigen::LLT<Mat> lltX(X_[j]);
            Eigen::LLT<Mat> lltS(S_[j]);
            if (lltX.info() != Eigen::Success || lltS.info() != Eigen::Success) return false;
            Mat L1 = lltX.matrixL();
            Mat L2 = lltS.matrixL();
            Eigen::JacobiSVD<Mat> svd(L2.transpose() * L1,
                                      Eigen::ComputeFullU | Eigen::ComputeFullV);
            Vec sig = svd.singularValues();
            for (int i = 0; i < d; ++i) {
                if (!(sig[i] > Scalar(0))) return false;
            }
            Vec sighalf = sig.array().sqrt().matrix();
            R_[j] = L1 * svd.matrixV() * sighalf.cwiseInverse().asDiagonal();
            Mat L1inv = L1.template triangularView<Eigen::Lower>().solve(Mat::Identity(d, d));
            Rinv_[j] = sighalf.asDiagonal() * svd.matrixV().transpose() * L1inv;
            lam_[j] = sig;
        }
        return true;
    }

    /// svec matrix of the congruence V -> R V R' per block (block diagonal).
    Mat congruence_matrix(const std::vector<Mat>& F) const {
        Mat K = Mat::Zero(nc_, nc_);
        for (int j = 0; j < nb_; ++j) {
            const int d = dims_[j];
            const int t = svec_size(d);
            const Scalar rt2 = std::sqrt(Scalar(2));
            int k = 0;
            for (int col = 0; col < d; ++col) {
                for (int row = 0; row <= col; ++row, ++k) {
                    Mat E = Mat::Zero(d, d);
                    if (row == col) E(row, col) = Scalar(1);
                    else E(row, col) = E(col, row) = Scalar(1) / rt2;
                    Mat FE = F[j] * E * F[j].transpose();
                    K.block(offs_[j], offs_[j] + k, t, 1) = sym_to_svec(FE);
                }
            }
        }
        return K;
    }

    /// H(v) = svec(W mat(v) W) with W = RR', applied through the factors.
    Vec applyH(const Vec& v) const {
        Vec out(nc_);
        for (int j = 0; j < nb_; ++j) {
            const int d = dims_[j];
            const int t = svec_size(d);
            Mat V = svec_to_sym<Scalar>(Vec(v.segment(offs_[j], t)), d);
            Mat W = R_[j] * R_[j].transpose();
            out.segment(offs_[j], t) = sym_to_svec(Mat(W * V * W));
        }
        return out;
    }

    /// Scaled-frame maps: KR = (R x R), KRt = its adjoint (R' x R').
    Vec apply_KR(const Vec& v) const {  // svec(R mat(v) R')
        Vec out(nc_);
        for (int j = 0; j < nb_; ++j) {
            const int t = svec_size(dims_[j]);
            Mat V = svec_to_sym<Scalar>(Vec(v.segment(offs_[j], t)), dims_[j]);
            out.segment(offs_[j], t) = sym_to_svec(Mat(R_[j] * V * R_[j].transpose()));
        }
        return out;
    }
    Vec apply_KRt(const Vec& v) const {  // svec(R' mat(v) R)
        Vec out(nc_);
        for (int j = 0; j < nb_; ++j) {
            const int t = svec_size(dims_[j]);
            Mat V = svec_to_sym<Scalar>(Vec(v.segment(offs_[j], t)), dims_[j]);
            out.segment(offs_[j], t) = sym_to_svec(Mat(R_[j].transpose() * V * R_[j]));
        }
        return out;
    }
    Vec apply_KRinv(const Vec& v) const {  // svec(Rinv mat(v) Rinv')
        Vec out(nc_);
        for (int j = 0; j < nb_; ++j) {
            const int t = svec_size(dims_[j]);
            Mat V = svec_to_sym<Scalar>(Vec(v.segment(offs_[j], t)), dims_[j]);
            out.segment(offs_[j], t) = sym_to_svec(Mat(Rinv_[j] * V * Rinv_[j].transpose()));
        }
        return out;
    }
    Vec apply_KRinvT(const Vec& v) const {  // svec(Rinv' mat(v) Rinv)
        Vec out(nc_);
        for (int j = 0; j < nb_; ++j) {
            const int t = svec_size(dims_[j]);
            Mat V = svec_to_sym<Scalar>(Vec(v.segment(offs_[j], t)), dims_[j]);
            out.segment(offs_[j], t) = sym_to_svec(Mat(Rinv_[j].transpose() * V * Rinv_[j]));
        }
        return out;
    }

    /// NT-scaled augmented KKT:
    ///   [ -I    Act'  0  ] [dxt]   [ e2t - rct ]
    ///   [ Act   0     Af ] [dy ] = [ e1        ]
    ///   [ 0     Af'   0  ] [dxf]   [ e2f       ]
    /// where Act = Ac (R x R) and dxt, dst are the scaled cone steps.
    void build_kkt() {
        Act_ = Ac_ * congruence_matrix(R_);
        const int n = nc_ + m_ + nf_;
        kkt_.setZero(n, n);
        kkt_.topLeftCorner(nc_, nc_) = -Mat::Identity(nc_, nc_);
        kkt_.block(0, nc_, nc_, m_) = Act_.transpose();
        kkt_.block(nc_, 0, m_, nc_) = Act_;
        kkt_.block(nc_, nc_ + m_, m_, nf_) = Af_;
        kkt_.block(nc_ + m_, nc_, nf_, m_) = Af_.transpose();
        lu_.compute(kkt_);

        // tau-column solve is residual independent within the iteration.
        Vec rhs2(n);
        rhs2.segment(0, nc_) = apply_KRt(cc_);
        rhs2.segment(nc_, m_) = b_;
        rhs2.segment(nc_ + m_, nf_) = cf_;
        Vec z2 = kkt_solve(rhs2);
        xt2_ = z2.head(nc_);
        y2_ = z2.segment(nc_, m_);
        xf2_ = z2.tail(nf_);
    }

    Vec kkt_solve(const Vec& rhs) const {
        Vec z = lu_.solve(rhs);
        Vec r = rhs - kkt_ * z;
        z += lu_.solve(r);
        return z;
    }

    /// Newton system right-hand sides, one entry per equation group:
    ///   A dx - b dtau                = e1
    ///   A'dy + ds - c dtau           = e2   (free rows: ds = 0)
    ///   b'dy - c'dx - dkappa         = e3
    ///   dX_j + W_j dS_j W_j          = E4_j
    ///   kappa dtau + tau dkappa      = e5
    struct NewtonRhs {
        Vec e1, e2;
        Scalar e3 = 0;
        std::vector<Mat> E4;
        Scalar e5 = 0;
    };

    /// One pass of the scaled augmented reduction for a general RHS.
    Direction reduce_solve(const NewtonRhs& r) {
        Direction dir;
        Vec e2f = r.e2.head(nf_);
        Vec e2c = r.e2.tail(nc_);
        Vec rcv(nc_);
        for (int j = 0; j < nb_; ++j)
            rcv.segment(offs_[j], svec_size(dims_[j])) = sym_to_svec(r.E4[j]);

        const Vec rct = apply_KRinv(rcv);   // scaled complementarity rhs
        const Vec e2t = apply_KRt(e2c);     // scaled dual residual
        const int n = nc_ + m_ + nf_;
        Vec rhs1(n);
        rhs1.segment(0, nc_) = e2t - rct;
        rhs1.segment(nc_, m_) = r.e1;
        rhs1.segment(nc_ + m_, nf_) = e2f;
        Vec z1 = kkt_solve(rhs1);
        Vec xt1 = z1.head(nc_);
        Vec y1 = z1.segment(nc_, m_);
        Vec xf1 = z1.tail(nf_);

        // Scalar tau equation: b'dy - c'dx - dkappa = e3, kappa dtau + tau
        // dkappa = e5, with (dy, dxt, dxf) = part1 + dtau * part2.
        auto cdotx = [&](const Vec& xt, const Vec& xf) {
            return cf_.dot(xf) + cc_.dot(apply_KR(xt));
        };
        const Scalar denom = b_.dot(y2_) - cdotx(xt2_, xf2_) + kappa_ / tau_;
        const Scalar numer = r.e3 - b_.dot(y1) + cdotx(xt1, xf1) + r.e5 / tau_;
        if (!(abs_(denom) != Scalar(0))) return dir;
        const Scalar dtau = numer / denom;

        Vec dxt = xt1 + dtau * xt2_;
        dir.dy = y1 + dtau * y2_;
        dir.dxf = xf1 + dtau * xf2_;
        dir.dtau = dtau;
        dir.dkappa = (r.e5 - kappa_ * dtau) / tau_;
        Vec dst = rct - dxt;
        Vec dxc = apply_KR(dxt);
        Vec dsc = apply_KRinvT(dst);
        dir.dX.resize(nb_);
        dir.dS.resize(nb_);
        for (int j = 0; j < nb_; ++j) {
            const int d = dims_[j];
            const int t = svec_size(d);
            dir.dX[j] = svec_to_sym<Scalar>(Vec(dxc.segment(offs_[j], t)), d);
            dir.dS[j] = svec_to_sym<Scalar>(Vec(dsc.segment(offs_[j], t)), d);
        }
        dir.ok = std::isfinite(static_cast<double>(dtau));
        return dir;
    }

    /// Residual of the full Newton system at a candidate direction,
    /// evaluated from the original data. Refinement against it removes the
    /// error the scaled reduction introduces.
    NewtonRhs newton_residual(const NewtonRhs& r, const Direction& d) const {
        NewtonRhs res;
        Vec dx(N_), ds(N_);
        dx.head(nf_) = d.dxf;
        ds.head(nf_).setZero();
        for (int j = 0; j < nb_; ++j) {
            dx.segment(nf_ + offs_[j], svec_size(dims_[j])) = sym_to_svec(d.dX[j]);
            ds.segment(nf_ + offs_[j], svec_size(dims_[j])) = sym_to_svec(d.dS[j]);
        }
        res.e1 = r.e1 - (A_ * dx - b_ * d.dtau);
        res.e2 = r.e2 - (A_.transpose() * d.dy + ds - c_ * d.dtau);
        res.e3 = r.e3 - (b_.dot(d.dy) - c_.dot(dx) - d.dkappa);
        res.E4.resize(nb_);
        for (int j = 0; j < nb_; ++j) {
            Mat W = R_[j] * R_[j].transpose();
            res.E4[j] = r.E4[j] - (d.dX[j] + W * d.dS[j] * W);
            res.E4[j] = Scalar(0.5) * (res.E4[j] + res.E4[j].transpose().eval());
        }
        res.e5 = r.e5 - (kappa_ * d.dtau + tau_ * d.dkappa);
        return res;
    }

    static Scalar rhs_norm(const NewtonRhs& r) {
        Scalar n = r.e1.template lpNorm<Eigen::Infinity>();
        n = max_(n, r.e2.template lpNorm<Eigen::Infinity>());
        n = max_(n, abs_(r.e3));
        for (const auto& E : r.E4) n = max_(n, E.template lpNorm<Eigen::Infinity>());
        n = max_(n, abs_(r.e5));
        return n;
    }

    Direction solve_direction(Scalar eta, const Vec& rp, const Vec& rd, Scalar rg,
                              const std::vector<Mat>& rc, Scalar rtk) {
        NewtonRhs rhs;
        rhs.e1 = -eta * rp;
        rhs.e2 = -eta * rd;
        rhs.e3 = -eta * rg;
        rhs.E4 = rc;
        rhs.e5 = rtk;

        Direction dir = reduce_solve(rhs);
        if (!dir.ok) return dir;
        Scalar best = rhs_norm(newton_residual(rhs, dir));
        for (int pass = 0; pass < 3 && best > Scalar(1e-25); ++pass) {
            NewtonRhs res = newton_residual(rhs, dir);
            Direction corr = reduce_solve(res);
            if (!corr.ok) break;
            Direction trial = dir;
            trial.dxf += corr.dxf;
            trial.dy += corr.dy;
            for (int j = 0; j < nb_; ++j) {
                trial.dX[j] += corr.dX[j];
                trial.dS[j] += corr.dS[j];
            }
            trial.dtau += corr.dtau;
            trial.dkappa += corr.dkappa;
            const Scalar trial_norm = rhs_norm(newton_residual(rhs, trial));
            if (trial_norm >= best) break;
            dir = trial;
            best = trial_norm;
        }
        return dir;
    }

    /// Largest step keeping every block PD and tau, kappa positive.
    Scalar max_step(const Direction& dir) const {
        Scalar alpha = std::numeric_limits<Scalar>::max();
        for (int j = 0; j < nb_; ++j) {
            alpha = min_(alpha, block_step(X_[j], dir.dX[j]));
            alpha = min_(alpha, block_step(S_[j], dir.dS[j]));
        }
        if (dir.dtau < Scalar(0)) alpha = min_(alpha, -tau_ / dir.dtau);
        if (dir.dkappa < Scalar(0)) alpha = min_(alpha, -kappa_ / dir.dkappa);
        return alpha;
    }

    static Scalar block_step(const Mat& P, const Mat& dP) {
        Eigen::LLT<Mat> llt(P);
        if (llt.info() != Eigen::Success) return Scalar(0);
        Mat L = llt.matrixL();
        Mat T = L.template triangularView<Eigen::Lower>().solve(dP);
        Mat G = L.template triangularView<Eigen::Lower>()
                    .solve(T.transpose().eval())
                    .transpose();
        G = Scalar(0.5) * (G + G.transpose().eval());
        Eigen::SelfAdjointEigenSolver<Mat> es(G, Eigen::EigenvaluesOnly);
        const Scalar lo = es.eigenvalues().minCoeff();
        if (lo >= Scalar(0)) return std::numeric_limits<Scalar>::max();
        return -Scalar(1) / lo;
    }

    Scalar trial_mu(const Direction& dir, Scalar alpha) const {
        Scalar v = (tau_ + alpha * dir.dtau) * (kappa_ + alpha * dir.dkappa);
        for (int j = 0; j < nb_; ++j) {
            Mat Xt = X_[j] + alpha * dir.dX[j];
            Mat St = S_[j] + alpha * dir.dS[j];
            v += (Xt.array() * St.array()).sum();
        }
        return v / Scalar(nu_);
    }

    void take_step(const Direction& dir, Scalar alpha) {
        xf_ += alpha * dir.dxf;
        y_ += alpha * dir.dy;
        for (int j = 0; j < nb_; ++j) {
            X_[j] += alpha * dir.dX[j];
            S_[j] += alpha * dir.dS[j];
            X_[j] = Scalar(0.5) * (X_[j] + X_[j].transpose().eval());
            S_[j] = Scalar(0.5) * (S_[j] + S_[j].transpose().eval());
        }
        tau_ += alpha * dir.dtau;
        kappa_ += alpha * dir.dkappa;
    }

    void save_best(Scalar merit) {
        best_merit_ = merit;
        have_best_ = true;
        best_xf_ = xf_;
        best_y_ = y_;
        best_X_ = X_;
        best_S_ = S_;
        best_tau_ = tau_;
        best_kappa_ = kappa_;
    }

    /// Plain Newton correction on the tau-scaled point: residuals are
    /// attacked directly, without the 1/tau amplification the homogeneous
    /// embedding suffers when certificates have large coefficients.
    void polish(int max_steps) {
        xf_ /= tau_;
        y_ /= tau_;
        for (int j = 0; j < nb_; ++j) {
            X_[j] /= tau_;
            S_[j] /= tau_;
        }
        tau_ = Scalar(1);

        for (int step = 0; step < max_steps; ++step) {
            Vec x = assemble_x();
            Vec s = assemble_s();
            Vec rp = A_ * x - b_;
            Vec rd = A_.transpose() * y_ + s - c_;
            const Scalar pres = rp.norm() / (Scalar(1) + b_.norm());
            const Scalar dres = rd.norm() / (Scalar(1) + c_.norm());
            if (opt_.verbose)
                std::printf("  polish %d: pres %.3Le dres %.3Le\n", step, (long double)pres,
                            (long double)dres);
            // Deep target: certificates get re-checked pointwise in the
            // residual's natural units, so equality rows must be pushed to
            // the arithmetic floor, not just the acceptance tolerance.
            if (pres <= Scalar(1e-13) && dres <= Scalar(1e-13)) break;
            if (!compute_scaling()) break;
            build_kkt();

            Scalar nu = Scalar(0);
            for (int d : dims_) nu += Scalar(d);
            Scalar mu = Scalar(0);
            for (int j = 0; j < nb_; ++j) mu += (X_[j].array() * S_[j].array()).sum();
            mu = nu > Scalar(0) ? mu / nu : Scalar(0);

            // Recenter at the current mu while removing the residuals; the
            // tau/kappa rows are pinned by a huge artificial kappa so dtau
            // stays numerically zero.
            NewtonRhs rhs;
            rhs.e1 = -rp;
            rhs.e2 = -rd;
            rhs.e3 = 0;
            rhs.E4.resize(nb_);
            for (int j = 0; j < nb_; ++j) {
                Eigen::LLT<Mat> llt(S_[j]);
                if (llt.info() != Eigen::Success) return;
                Mat Sinv = llt.solve(Mat::Identity(dims_[j], dims_[j]));
                rhs.E4[j] = mu * Sinv - X_[j];
                rhs.E4[j] = Scalar(0.5) * (rhs.E4[j] + rhs.E4[j].transpose().eval());
            }
            rhs.e5 = 0;
            const Scalar kappa_saved = kappa_;
            kappa_ = Scalar(1e30);  // freezes dtau in the reduction
            Direction dir = reduce_solve(rhs);
            if (dir.ok) {
                Scalar best = rhs_norm(newton_residual(rhs, dir));
                for (int pass = 0; pass < 2; ++pass) {
                    NewtonRhs res = newton_residual(rhs, dir);
                    Direction corr = reduce_solve(res);
                    if (!corr.ok) break;
                    Direction trial = dir;
                    trial.dxf += corr.dxf;
                    trial.dy += corr.dy;
                    for (int j = 0; j < nb_; ++j) {
                        trial.dX[j] += corr.dX[j];
                        trial.dS[j] += corr.dS[j];
                    }
                    trial.dtau += corr.dtau;
                    trial.dkappa += corr.dkappa;
                    const Scalar tn = rhs_norm(newton_residual(rhs, trial));
                    if (tn >= best) break;
                    dir = trial;
                    best = tn;
                }
            }
            kappa_ = kappa_saved;
            if (!dir.ok) break;
            dir.dtau = 0;
            dir.dkappa = 0;

            const Scalar merit0 = max_(pres, dres);
            Scalar alpha = min_(Scalar(1), Scalar(0.98) * max_step(dir));
            bool improved = false;
            for (int bt = 0; bt < 4 && !improved; ++bt) {
                Vec sxf = xf_, sy = y_;
                std::vector<Mat> sX = X_, sS = S_;
                take_step(dir, alpha);
                tau_ = Scalar(1);
                Vec xx = assemble_x();
                Vec ss = assemble_s();
                const Scalar p2 = (A_ * xx - b_).norm() / (Scalar(1) + b_.norm());
                const Scalar d2 = (A_.transpose() * y_ + ss - c_).norm() / (Scalar(1) + c_.norm());
                if (max_(p2, d2) < merit0) {
                    improved = true;
                } else {
                    xf_ = sxf;
                    y_ = sy;
                    X_ = sX;
                    S_ = sS;
                    alpha *= Scalar(0.25);
                }
            }
            if (!improved) break;
        }
        kappa_ = Scalar(1e-30);
    }

    /// Restore the most accurate iterate and classify it against the
    /// optimality tolerances; a stalled run that already met them is a
    /// clean optimum, anything else surfaces as a numerical failure.
    ConicSolution finish_from_best(int iters, const std::string& msg) {
        if (have_best_) {
            xf_ = best_xf_;
            y_ = best_y_;
            X_ = best_X_;
            S_ = best_S_;
            tau_ = best_tau_;
            kappa_ = best_kappa_;
        }
        polish(12);
        Vec x = assemble_x();
        Vec s = assemble_s();
        const Scalar pres = (A_ * x / tau_ - b_).norm() / (Scalar(1) + b_.norm());
        const Scalar dres =
            (A_.transpose() * y_ / tau_ + s / tau_ - c_).norm() / (Scalar(1) + c_.norm());
        const Scalar pobj = c_.dot(x) / tau_;
        const Scalar dobj = b_.dot(y_) / tau_;
        const Scalar relgap = abs_(pobj - dobj) / (Scalar(1) + max_(abs_(pobj), abs_(dobj)));
        if (pres <= Scalar(opt_.feasibility_tol) && dres <= Scalar(opt_.feasibility_tol) &&
            relgap <= Scalar(opt_.gap_tol)) {
            return finish(SolveStatus::Optimal, iters, msg + " (best iterate within tolerance)");
        }
        return finish(SolveStatus::NumericalFailure, iters, msg);
    }

    ConicSolution finish(SolveStatus status, int iters, const std::string& msg) {
        ConicSolution sol;
        sol.report.status = status;
        sol.report.iterations = iters;
        sol.report.message = msg;

        Vec x = assemble_x();
        Vec s = assemble_s();
        const Scalar scale = (status == SolveStatus::Optimal) ? tau_ : Scalar(1);
        sol.x = (x / scale).template cast<double>();
        sol.y = (y_ / scale).template cast<double>();
        sol.s = (s / scale).template cast<double>();

        if (status == SolveStatus::Optimal) {
            sol.report.objective_value = static_cast<double>(c_.dot(x) / tau_);
            sol.report.dual_objective = static_cast<double>(b_.dot(y_) / tau_);
            sol.report.primal_residual =
                static_cast<double>((A_ * x / tau_ - b_).norm() / (Scalar(1) + b_.norm()));
            sol.report.dual_residual = static_cast<double>(
                (A_.transpose() * y_ / tau_ + s / tau_ - c_).norm() / (Scalar(1) + c_.norm()));
            sol.report.duality_gap =
                std::abs(sol.report.objective_value - sol.report.dual_objective) /
                (1.0 + std::abs(sol.report.objective_value));
            for (int j = 0; j < nb_; ++j) {
                Eigen::SelfAdjointEigenSolver<Mat> es(X_[j] / tau_, Eigen::EigenvaluesOnly);
                sol.report.psd_min_eigenvalues.push_back(
                    static_cast<double>(es.eigenvalues().minCoeff()));
            }
        }
        return sol;
    }

    IpmOptions opt_;
    int nf_ = 0, nb_ = 0, m_ = 0, N_ = 0, nc_ = 0, nu_ = 1;
    std::vector<int> dims_;
    std::vector<int> offs_;
    Mat A_, Af_, Ac_;
    Vec b_, c_, cf_, cc_;

    Vec xf_, y_;
    std::vector<Mat> X_, S_;
    Scalar tau_ = 1, kappa_ = 1;

    std::vector<Mat> R_, Rinv_;
    std::vector<Vec> lam_;
    Mat Act_, kkt_;
    Eigen::FullPivLU<Mat> lu_;
    Vec xt2_, y2_, xf2_;

    bool have_best_ = false;
    Scalar best_merit_ = 0;
    Vec best_xf_, best_y_;
    std::vector<Mat> best_X_, best_S_;
    Scalar best_tau_ = 1, best_kappa_ = 1;
};

}  // namespace

ConicSolution InteriorPointSolver::solve(const ConicProblem& problem) const {
    if (problem.A.cols() != problem.cones.total_size() || problem.A.rows() != problem.b.size() ||
        problem.c.size() != problem.cones.total_size()) {
        ConicSolution sol;
        sol.report.status = SolveStatus::NumericalFailure;
        sol.report.message = "inconsistent problem dimensions";
        return sol;
    }
    HsdIpm<long double> ipm(problem, options_);
    return ipm.run();
}

}  // namespace occucert
