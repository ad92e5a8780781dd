#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "resroute/program.hpp"

namespace resroute {

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterLimit };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::IterLimit: return "iteration_limit";
    }
    return "?";
}

struct SolverSettings {
    double eps_primal = 1e-6;
    double eps_dual = 1e-6;
    double eps_gap = 1e-6;
    double eps_infeas = 1e-7;
    int max_iters = 200000;
    bool scaling = true;
    double over_relaxation = 1.5;
    int check_interval = 25;
};

struct WarmStart {
    Eigen::VectorXd x, y, s;
};

struct SolveResult {
    SolveStatus status = SolveStatus::IterLimit;
    std::vector<double> x;          // program-variable values
    Eigen::VectorXd y, s;           // row duals / slacks (standard form)
    double objective = 0.0;         // sense of the caller's objective
    double res_primal = 0.0, res_dual = 0.0, res_gap = 0.0;
    int iterations = 0;
    double cone_tightness = 0.0;    // max over cones of (P^2+Q^2)/(v*l), clipped to [0,1]
};

// ---------------------------------------------------------------------------
// Cone projections
// ---------------------------------------------------------------------------

/// In-place Euclidean projection of (z_0, z_1..z_{d-1}) onto the second-order
/// cone z_0 >= ||z_1..||.
inline void project_soc(double* z, int d) {
    double t = z[0];
    double nw = 0;
    for (int i = 1; i < d; ++i) nw += z[i] * z[i];
    nw = std::sqrt(nw);
    if (nw <= t) return;
    if (nw <= -t) {
        for (int i = 0; i < d; ++i) z[i] = 0;
        return;
    }
    double a = 0.5 * (t + nw);
    z[0] = a;
    double scale = a / nw;
    for (int i = 1; i < d; ++i) z[i] *= scale;
}

/// Euclidean projection onto the rotated cone
/// { (u, v, w1, w2) : u, v >= 0, u*v >= (w1^2 + w2^2) / 2 }.
/// Uses the orthogonal rotation to a plain second-order cone.
inline std::array<double, 4> project_rotated_cone(double u, double v, double w1, double w2) {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    double z[4] = {(u + v) * inv_sqrt2, (u - v) * inv_sqrt2, w1, w2};
    project_soc(z, 4);
    return {(z[0] + z[1]) * inv_sqrt2, (z[0] - z[1]) * inv_sqrt2, z[2], z[3]};
}

// ---------------------------------------------------------------------------
// Standard form: min c'x  s.t.  A x + s = b,  s in {0}^n_eq x R+^n_ineq x SOC4...
// ---------------------------------------------------------------------------

struct BoundRows {
    std::vector<int> lb_row, ub_row;  // global row index or -1
};

struct StandardForm {
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd b, c;
    int n_eq = 0, n_ineq = 0;
    std::vector<int> soc_dims;
    BoundRows bounds;

    /// Re-point a variable box; only touches b, never the sparsity of A.
    void set_bounds(int col, double lo, double hi) {
        int lr = bounds.lb_row[col], ur = bounds.ub_row[col];
        if (lr < 0 || ur < 0) throw std::runtime_error("column has no bound rows");
        b[lr] = -lo;
        b[ur] = hi;
    }
};

/// Converts a ConicProgram (maximize) to minimization standard form. Row
/// layout: equalities, program inequalities, lower-bound rows, upper-bound
/// rows, then 4-row second-order cone blocks.
inline StandardForm to_standard(const ConicProgram& pr) {
    StandardForm sf;
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> b;
    int row = 0;

    for (int r = 0; r < pr.eq.size(); ++r, ++row) {
        for (const auto& [c, a] : pr.eq.rows[r]) trip.emplace_back(row, c, a);
        b.push_back(pr.eq.rhs[r]);
    }
    sf.n_eq = row;

    for (int r = 0; r < pr.ineq.size(); ++r, ++row) {
        for (const auto& [c, a] : pr.ineq.rows[r]) trip.emplace_back(row, c, a);
        b.push_back(pr.ineq.rhs[r]);
    }
    sf.bounds.lb_row.assign(pr.num_vars, -1);
    sf.bounds.ub_row.assign(pr.num_vars, -1);
    for (int c = 0; c < pr.num_vars; ++c) {
        bool integral = pr.is_integral_col(c);
        if (pr.lb[c] != -kInf || integral) {
            trip.emplace_back(row, c, -1.0);
            b.push_back(pr.lb[c] == -kInf ? kInf : -pr.lb[c]);
            sf.bounds.lb_row[c] = row++;
        }
        if (pr.ub[c] != kInf || integral) {
            trip.emplace_back(row, c, 1.0);
            b.push_back(pr.ub[c]);
            sf.bounds.ub_row[c] = row++;
        }
    }
    sf.n_ineq = row - sf.n_eq;

    for (const auto& cone : pr.cones) {
        trip.emplace_back(row, cone.v_col, -1.0);
        trip.emplace_back(row, cone.l_col, -1.0);
        ++row;
        trip.emplace_back(row, cone.v_col, -1.0);
        trip.emplace_back(row, cone.l_col, 1.0);
        ++row;
        trip.emplace_back(row, cone.p_col, -2.0);
        ++row;
        trip.emplace_back(row, cone.q_col, -2.0);
        ++row;
        for (int i = 0; i < 4; ++i) b.push_back(0.0);
        sf.soc_dims.push_back(4);
    }

    sf.A.resize(row, pr.num_vars);
    sf.A.setFromTriplets(trip.begin(), trip.end());
    sf.b = Eigen::Map<Eigen::VectorXd>(b.data(), (long)b.size());
    sf.c.resize(pr.num_vars);
    for (int c = 0; c < pr.num_vars; ++c) sf.c[c] = -pr.objective[c];  // maximize -> min
    return sf;
}

// ---------------------------------------------------------------------------
// First-order splitting solver with homogeneous self-dual embedding.
// The KKT factorization depends only on A, so one solver instance can serve
// many (b, c) pairs; branch-and-bound exploits this for bound changes.
// ---------------------------------------------------------------------------

class ConeSolver {
  public:
    ConeSolver(const Eigen::SparseMatrix<double>& A, int n_eq, int n_ineq,
               std::vector<int> soc_dims, SolverSettings settings = {})
        : A_(A), n_eq_(n_eq), n_ineq_(n_ineq), soc_dims_(std::move(soc_dims)),
          settings_(settings), n_((int)A.cols()), m_((int)A.rows()) {
        D_ = Eigen::VectorXd::Ones(m_);
        E_ = Eigen::VectorXd::Ones(n_);
        Ahat_ = A_;
        if (settings_.scaling) ruiz_equilibrate();
        factorize();
    }

    const SolverSettings& settings() const { return settings_; }

    /// Solves min c'x s.t. Ax + s = b, s in K. Thread-safe: all iteration
    /// state is local.
    SolveResult solve(const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                      const WarmStart* warm = nullptr) const {
        Eigen::VectorXd bhat = D_.cwiseProduct(b);
        Eigen::VectorXd chat = E_.cwiseProduct(c);

        // g = M^{-1} h with h = (chat, bhat), reused by every iteration.
        Eigen::VectorXd g = solve_m(chat, bhat);
        double hg = chat.dot(g.head(n_)) + bhat.dot(g.tail(m_));

        const int dim = n_ + m_ + 1;
        Eigen::VectorXd u = Eigen::VectorXd::Zero(dim), v = Eigen::VectorXd::Zero(dim);
        if (warm) {
            u.head(n_) = warm->x.cwiseQuotient(E_);
            u.segment(n_, m_) = warm->y.cwiseQuotient(D_);
            u[dim - 1] = 1.0;
            v.segment(n_, m_) = D_.cwiseProduct(warm->s);
        } else {
            u[dim - 1] = 1.0;
            v[dim - 1] = 1.0;
        }

        SolveResult res;
        const double alpha = settings_.over_relaxation;
        Eigen::VectorXd w(dim), ut(dim);

        for (int iter = 1; iter <= settings_.max_iters; ++iter) {
            w = u + v;
            // ut = (I+Q)^{-1} w
            Eigen::VectorXd p = solve_m(w.head(n_), w.segment(n_, m_));
            double hp = chat.dot(p.head(n_)) + bhat.dot(p.tail(m_));
            double zt = (w[dim - 1] + hp) / (1.0 + hg);
            ut.head(n_ + m_) = p - zt * g;
            ut[dim - 1] = zt;

            // over-relaxation, projection, dual update
            ut = alpha * ut + (1.0 - alpha) * u;
            Eigen::VectorXd z = ut - v;
            project_dual_cone(z);
            v += z - ut;
            u = z;

            if (iter % settings_.check_interval == 0 || iter == settings_.max_iters) {
                res.iterations = iter;
                if (check_termination(u, v, b, c, res)) return res;
            }
        }
        res.iterations = settings_.max_iters;
        res.status = SolveStatus::IterLimit;
        finalize_point(u, v, b, c, res);
        return res;
    }

  private:
    void ruiz_equilibrate() {
        for (int pass = 0; pass < 10; ++pass) {
            Eigen::VectorXd rnorm = Eigen::VectorXd::Zero(m_), cnorm = Eigen::VectorXd::Zero(n_);
            for (int k = 0; k < Ahat_.outerSize(); ++k)
                for (Eigen::SparseMatrix<double>::InnerIterator it(Ahat_, k); it; ++it) {
                    double a = std::abs(it.value());
                    rnorm[it.row()] = std::max(rnorm[it.row()], a);
                    cnorm[it.col()] = std::max(cnorm[it.col()], a);
                }
            // rows of one SOC block share a scale factor
            int row = n_eq_ + n_ineq_;
            for (int d : soc_dims_) {
                double mx = 0;
                for (int i = 0; i < d; ++i) mx = std::max(mx, rnorm[row + i]);
                for (int i = 0; i < d; ++i) rnorm[row + i] = mx;
                row += d;
            }
            for (int i = 0; i < m_; ++i)
                rnorm[i] = rnorm[i] > 1e-12 ? 1.0 / std::sqrt(rnorm[i]) : 1.0;
            for (int j = 0; j < n_; ++j)
                cnorm[j] = cnorm[j] > 1e-12 ? 1.0 / std::sqrt(cnorm[j]) : 1.0;
            for (int k = 0; k < Ahat_.outerSize(); ++k)
                for (Eigen::SparseMatrix<double>::InnerIterator it(Ahat_, k); it; ++it)
                    it.valueRef() *= rnorm[it.row()] * cnorm[it.col()];
            D_ = D_.cwiseProduct(rnorm);
            E_ = E_.cwiseProduct(cnorm);
        }
    }

    void factorize() {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(Ahat_.nonZeros() + n_ + m_);
        for (int i = 0; i < n_; ++i) trip.emplace_back(i, i, 1.0);
        for (int i = 0; i < m_; ++i) trip.emplace_back(n_ + i, n_ + i, -1.0);
        for (int k = 0; k < Ahat_.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(Ahat_, k); it; ++it) {
                trip.emplace_back(n_ + (int)it.row(), (int)it.col(), it.value());
                trip.emplace_back((int)it.col(), n_ + (int)it.row(), it.value());
            }
        Eigen::SparseMatrix<double> kkt(n_ + m_, n_ + m_);
        kkt.setFromTriplets(trip.begin(), trip.end());
        ldlt_.compute(kkt);
        if (ldlt_.info() != Eigen::Success)
            throw std::runtime_error("KKT factorization failed");
    }

    /// M^{-1}(a, b) with M = [[I, A'], [-A, I]], via the symmetric
    /// quasi-definite system [[I, A'], [A, -I]] (zx, zy) = (a, -b).
    Eigen::VectorXd solve_m(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
        Eigen::VectorXd rhs(n_ + m_);
        rhs.head(n_) = a;
        rhs.tail(m_) = -b;
        return ldlt_.solve(rhs);
    }

    /// Projects the (y, tau) part of z onto K* x R+; the x part is free.
    void project_dual_cone(Eigen::VectorXd& z) const {
        // equality-row duals are free; inequality-row duals nonnegative
        for (int i = 0; i < n_ineq_; ++i) {
            double& yi = z[n_ + n_eq_ + i];
            if (yi < 0) yi = 0;
        }
        int row = n_eq_ + n_ineq_;
        for (int d : soc_dims_) {
            project_soc(z.data() + n_ + row, d);
            row += d;
        }
        double& tau = z[n_ + m_];
        if (tau < 0) tau = 0;
    }

    bool check_termination(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                           const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                           SolveResult& res) const {
        const int dim = n_ + m_ + 1;
        double tau = u[dim - 1];
        if (tau > 1e-9 * std::max(1.0, u.norm())) {
            Eigen::VectorXd x = E_.cwiseProduct(u.head(n_)) / tau;
            Eigen::VectorXd y = D_.cwiseProduct(u.segment(n_, m_)) / tau;
            Eigen::VectorXd s = v.segment(n_, m_).cwiseQuotient(D_) / tau;
            double pres = (A_ * x + s - b).norm();
            double dres = (A_.transpose() * y + c).norm();
            double cx = c.dot(x), by = b.dot(y);
            double gap = std::abs(cx + by);
            if (pres <= settings_.eps_primal * (1 + b.norm()) &&
                dres <= settings_.eps_dual * (1 + c.norm()) &&
                gap <= settings_.eps_gap * (1 + std::abs(cx) + std::abs(by))) {
                res.status = SolveStatus::Optimal;
                res.x.assign(x.data(), x.data() + n_);
                res.y = y;
                res.s = s;
                res.objective = cx;
                res.res_primal = pres / (1 + b.norm());
                res.res_dual = dres / (1 + c.norm());
                res.res_gap = gap / (1 + std::abs(cx) + std::abs(by));
                return true;
            }
        }
        // certificates, from the unnormalized homogeneous iterate
        Eigen::VectorXd y = D_.cwiseProduct(u.segment(n_, m_));
        double nby = -b.dot(y);
        if (nby > 1e-12) {
            Eigen::VectorXd yc = y / nby;
            if ((A_.transpose() * yc).norm() <= settings_.eps_infeas) {
                res.status = SolveStatus::Infeasible;
                res.y = yc;
                res.res_primal = (A_.transpose() * yc).norm();
                return true;
            }
        }
        Eigen::VectorXd x = E_.cwiseProduct(u.head(n_));
        double ncx = -c.dot(x);
        if (ncx > 1e-12) {
            Eigen::VectorXd s = v.segment(n_, m_).cwiseQuotient(D_);
            Eigen::VectorXd xc = x / ncx, sc = s / ncx;
            if ((A_ * xc + sc).norm() <= settings_.eps_infeas) {
                res.status = SolveStatus::Unbounded;
                res.x.assign(xc.data(), xc.data() + n_);
                res.s = sc;
                return true;
            }
        }
        return false;
    }

    void finalize_point(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                        const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                        SolveResult& res) const {
        const int dim = n_ + m_ + 1;
        double tau = std::max(u[dim - 1], 1e-12);
        Eigen::VectorXd x = E_.cwiseProduct(u.head(n_)) / tau;
        Eigen::VectorXd y = D_.cwiseProduct(u.segment(n_, m_)) / tau;
        Eigen::VectorXd s = v.segment(n_, m_).cwiseQuotient(D_) / tau;
        res.x.assign(x.data(), x.data() + n_);
        res.y = y;
        res.s = s;
        res.objective = c.dot(x);
        res.res_primal = (A_ * x + s - b).norm() / (1 + b.norm());
        res.res_dual = (A_.transpose() * y + c).norm() / (1 + c.norm());
        double cx = c.dot(x), by = b.dot(y);
        res.res_gap = std::abs(cx + by) / (1 + std::abs(cx) + std::abs(by));
    }

    Eigen::SparseMatrix<double> A_, Ahat_;
    int n_eq_, n_ineq_;
    std::vector<int> soc_dims_;
    SolverSettings settings_;
    int n_, m_;
    Eigen::VectorXd D_, E_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

/// Computes the cone-tightness metric of a candidate point in program space.
inline double cone_tightness(const ConicProgram& pr, const std::vector<double>& x) {
    double worst = 0.0;
    for (const auto& cone : pr.cones) {
        double num = x[cone.p_col] * x[cone.p_col] + x[cone.q_col] * x[cone.q_col];
        double den = x[cone.v_col] * x[cone.l_col];
        double t = den > 1e-14 ? num / den : 1.0;
        worst = std::max(worst, std::min(t, 1.0));
    }
    return worst;
}

/// Solves the continuous relaxation of a ConicProgram (integrality dropped).
/// Result objective is in the program's maximize sense.
inline SolveResult solve_relaxation(const ConicProgram& pr, SolverSettings settings = {}) {
    StandardForm sf = to_standard(pr);
    ConeSolver solver(sf.A, sf.n_eq, sf.n_ineq, sf.soc_dims, settings);
    SolveResult res = solver.solve(sf.b, sf.c);
    res.objective = -res.objective;
    if (!res.x.empty()) res.cone_tightness = cone_tightness(pr, res.x);
    return res;
}

}  // namespace resroute
