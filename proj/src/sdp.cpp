#include "tpqkd/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "tpqkd/errors.hpp"

namespace tpqkd::sdp {

namespace {

// svec with sqrt(2) off-diagonal scaling, so svec(A).dot(svec(B)) = tr(AB).
RVector svec(const RMatrix& a) {
    const int n = static_cast<int>(a.rows());
    RVector v(n * (n + 1) / 2);
    const double r2 = std::sqrt(2.0);
    int idx = 0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i <= j; ++i) {
            v(idx++) = (i == j) ? a(i, j) : r2 * a(i, j);
        }
    }
    return v;
}

struct Reduced {
    std::vector<int> keep;   // indices of retained constraints
    bool inconsistent = false;
};

// Rank-revealing pass over the constraint set. Dependent rows must agree with
// the value implied by the independent ones.
Reduced deduplicate(const Problem& p) {
    const int m = static_cast<int>(p.constraints.size());
    const int n = static_cast<int>(p.objective.rows());
    const int nv = n * (n + 1) / 2;
    RMatrix basis(nv, m);
    for (int k = 0; k < m; ++k) basis.col(k) = svec(p.constraints[k]);

    Reduced red;
    RMatrix kept(nv, 0);
    RVector kept_b(0);
    for (int k = 0; k < m; ++k) {
        const RVector v = basis.col(k);
        const double scale = std::max(1.0, v.norm());
        if (kept.cols() == 0) {
            if (v.norm() <= 1e-12) {
                if (std::abs(p.targets(k)) > 1e-9) red.inconsistent = true;
                continue;
            }
            kept.conservativeResize(nv, 1);
            kept.col(0) = v;
            kept_b.conservativeResize(1);
            kept_b(0) = p.targets(k);
            red.keep.push_back(k);
            continue;
        }
        Eigen::ColPivHouseholderQR<RMatrix> qr(kept);
        const RVector w = qr.solve(v);
        const double resid = (kept * w - v).norm();
        if (resid > 1e-10 * scale) {
            const int c = static_cast<int>(kept.cols());
            kept.conservativeResize(nv, c + 1);
            kept.col(c) = v;
            kept_b.conservativeResize(c + 1);
            kept_b(c) = p.targets(k);
            red.keep.push_back(k);
        } else {
            const double implied = kept_b.dot(w);
            if (std::abs(implied - p.targets(k)) > 1e-8 * (1.0 + std::abs(p.targets(k))))
                red.inconsistent = true;
        }
    }
    return red;
}

// Cholesky factor with an eigenvalue-clamped fallback for nearly singular
// iterates late in the path.
RMatrix robust_cholesky(const RMatrix& p) {
    Eigen::LLT<RMatrix> llt(p);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    Eigen::SelfAdjointEigenSolver<RMatrix> es(p);
    RVector lam = es.eigenvalues();
    const double floor = std::max(lam.maxCoeff(), 1.0) * 1e-14;
    for (int i = 0; i < lam.size(); ++i) lam(i) = std::max(lam(i), floor);
    RMatrix l = es.eigenvectors() * lam.cwiseSqrt().asDiagonal();
    // Re-triangularize via QR of l^T so callers can treat it as lower Cholesky.
    Eigen::HouseholderQR<RMatrix> qr(l.transpose());
    RMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    return r.transpose();
}

// Largest alpha in (0, 1e30] with p + alpha*dp >= 0.
double max_step(const RMatrix& p, const RMatrix& dp) {
    const RMatrix l = robust_cholesky(p);
    RMatrix w = l.triangularView<Eigen::Lower>().solve(dp);
    w = l.triangularView<Eigen::Lower>().solve(w.transpose()).transpose();
    Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (w + w.transpose()), Eigen::EigenvaluesOnly);
    const double lam_min = es.eigenvalues().minCoeff();
    if (lam_min >= -1e-14) return 1e30;
    return -1.0 / lam_min;
}

}  // namespace

Solution solve(const Problem& problem, const Options& options) {
    const int n = static_cast<int>(problem.objective.rows());
    if (n == 0) throw ValidationError("sdp::solve: empty problem");
    if (problem.targets.size() != static_cast<Eigen::Index>(problem.constraints.size()))
        throw ValidationError("sdp::solve: constraint/target count mismatch");
    for (const auto& a : problem.constraints)
        if (a.rows() != n || a.cols() != n)
            throw ValidationError("sdp::solve: constraint dimension mismatch");

    Solution sol;
    const Reduced red = deduplicate(problem);
    if (red.inconsistent) {
        sol.status = Status::Infeasible;
        return sol;
    }
    const int m = static_cast<int>(red.keep.size());
    std::vector<RMatrix> a(m);
    RVector b(m);
    for (int k = 0; k < m; ++k) {
        a[k] = problem.constraints[red.keep[k]];
        b(k) = problem.targets(red.keep[k]);
    }
    const RMatrix& c = problem.objective;

    const double b_scale = 1.0 + (m > 0 ? b.cwiseAbs().maxCoeff() : 0.0);
    RMatrix x = RMatrix::Identity(n, n) * std::max(1.0, b_scale);
    RMatrix s = RMatrix::Identity(n, n) * std::max(1.0, c.norm());
    RVector y = RVector::Zero(m);

    const double tol = options.tolerance;
    const double tau = 0.98;

    auto apply_adjoint = [&](const RVector& v) {
        RMatrix out = RMatrix::Zero(n, n);
        for (int k = 0; k < m; ++k) out += v(k) * a[k];
        return out;
    };

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        // Residuals.
        RVector rp(m);
        for (int k = 0; k < m; ++k) rp(k) = b(k) - (a[k].array() * x.array()).sum();
        RMatrix rd = c - apply_adjoint(y) + s;
        const double mu = (x.array() * s.array()).sum() / n;

        const double pobj = (c.array() * x.array()).sum();
        const double dobj = b.dot(y);
        const double rel_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
        const double pinf = rp.norm() / (1.0 + b.norm());
        const double dinf = rd.norm() / (1.0 + c.norm());

        sol.objective_value = pobj;
        sol.x = x;
        sol.y = y;
        sol.duality_gap = rel_gap;
        sol.iterations = iter - 1;
        sol.primal_residual = pinf;
        sol.dual_residual = dinf;

        if (rel_gap <= tol && pinf <= tol && dinf <= tol) {
            sol.status = Status::Optimal;
            return sol;
        }
        // Dual unboundedness heuristic: primal infeasible.
        if (y.size() > 0 && y.cwiseAbs().maxCoeff() > 1e10) {
            sol.status = Status::Infeasible;
            return sol;
        }
        if (mu < 1e-13 && pinf > std::sqrt(tol)) {
            sol.status = Status::Infeasible;
            return sol;
        }

        // Shared factorizations for this iteration.
        const RMatrix ls = robust_cholesky(s);
        auto sinv_apply = [&](const RMatrix& rhs) {
            RMatrix t = ls.triangularView<Eigen::Lower>().solve(rhs);
            return ls.transpose().triangularView<Eigen::Upper>().solve(t).eval();
        };
        const RMatrix sinv = sinv_apply(RMatrix::Identity(n, n));

        // Schur complement M_kl = tr(A_k X A_l Sinv).
        std::vector<RMatrix> xasv(m);
        for (int k = 0; k < m; ++k) xasv[k] = x * a[k] * sinv;
        RMatrix schur(m, m);
        for (int k = 0; k < m; ++k)
            for (int l = 0; l < m; ++l)
                schur(k, l) = (a[k].array() * xasv[l].array()).sum();
        Eigen::PartialPivLU<RMatrix> schur_lu(schur);

        const RMatrix xrd_sinv = x * rd * sinv;
        RVector rhs_base(m);
        for (int k = 0; k < m; ++k)
            rhs_base(k) = (a[k].array() * xrd_sinv.array()).sum() - rp(k);

        auto direction = [&](const RMatrix& rc, RMatrix& dx, RVector& dy, RMatrix& ds) {
            const RMatrix rc_sinv = rc * sinv;
            RVector rhs = rhs_base;
            for (int k = 0; k < m; ++k) rhs(k) += (a[k].array() * rc_sinv.array()).sum();
            dy = schur_lu.solve(rhs);
            ds = apply_adjoint(dy) - rd;
            dx = rc_sinv - x * ds * sinv;
            dx = 0.5 * (dx + dx.transpose()).eval();
        };

        // Predictor.
        RMatrix dx_a, ds_a;
        RVector dy_a;
        direction(-x * s, dx_a, dy_a, ds_a);
        const double ap_a = std::min(1.0, tau * max_step(x, dx_a));
        const double ad_a = std::min(1.0, tau * max_step(s, ds_a));
        const double mu_aff =
            ((x + ap_a * dx_a).array() * (s + ad_a * ds_a).array()).sum() / n;
        double sigma = std::pow(std::max(mu_aff, 0.0) / mu, 3.0);
        sigma = std::clamp(sigma, 1e-8, 1.0);

        // Corrector.
        RMatrix dx, ds;
        RVector dy;
        const RMatrix rc = sigma * mu * RMatrix::Identity(n, n) - x * s - dx_a * ds_a;
        direction(rc, dx, dy, ds);
        const double ap = std::min(1.0, tau * max_step(x, dx));
        const double ad = std::min(1.0, tau * max_step(s, ds));

        x += ap * dx;
        y += ad * dy;
        s += ad * ds;
    }

    sol.status = Status::MaxIterations;
    return sol;
}

}  // namespace tpqkd::sdp
