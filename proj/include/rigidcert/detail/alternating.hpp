#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rigidcert/rng.hpp"
#include "rigidcert/symmat.hpp"

namespace rigidcert::detail {

/// Budget knobs for one alternating-projection run between the PSD cone and
/// an affine set. A run is declared stuck when the gap stops improving well
/// above the target, which is the observable signature of an empty
/// intersection (and of tangential intersections, which the exactification
/// pass below finishes off).
struct ApOptions {
    int max_iter = 5000;
    double gap_tol = 1e-10;
    int plateau_window = 200;
    double plateau_factor = 0.995;
};

/// Symmetric pseudo-inverse solver with the eigen-decomposition computed once
/// so repeated solves against the same matrix are cheap.
class PinvSolver {
public:
    explicit PinvSolver(const SymMatrix& a, double rel_cut = 1e-12) {
        d_ = spectral(a);
        double scale = 0.0;
        for (double v : d_.eigenvalues) scale = std::max(scale, std::fabs(v));
        cut_ = rel_cut * std::max(scale, 1e-300);
    }

    std::vector<double> solve(const std::vector<double>& rhs) const {
        const int n = d_.eigenvectors.rows();
        std::vector<double> x(n, 0.0);
        for (int k = 0; k < n; ++k) {
            const double lam = d_.eigenvalues[k];
            if (std::fabs(lam) <= cut_) continue;
            double proj = 0.0;
            for (int i = 0; i < n; ++i) proj += d_.eigenvectors(i, k) * rhs[i];
            proj /= lam;
            for (int i = 0; i < n; ++i) x[i] += proj * d_.eigenvectors(i, k);
        }
        return x;
    }

private:
    SpectralDecomp d_;
    double cut_ = 0.0;
};

inline SymMatrix combine(const std::vector<SymMatrix>& basis, const std::vector<double>& x) {
    Matrix acc(basis.front().order(), basis.front().order());
    for (std::size_t k = 0; k < basis.size(); ++k) {
        if (x[k] == 0.0) continue;
        acc = acc + x[k] * basis[k].as_matrix();
    }
    return SymMatrix(acc);
}

/// Cholesky solve for SPD systems; returns false on a breakdown.
inline bool cholesky_solve(Matrix a, std::vector<double> rhs, std::vector<double>& out) {
    const int n = a.rows();
    for (int j = 0; j < n; ++j) {
        for (int kk = 0; kk < j; ++kk) a(j, j) -= a(j, kk) * a(j, kk);
        if (a(j, j) <= 0.0) return false;
        a(j, j) = std::sqrt(a(j, j));
        for (int i = j + 1; i < n; ++i) {
            for (int kk = 0; kk < j; ++kk) a(i, j) -= a(i, kk) * a(j, kk);
            a(i, j) /= a(j, j);
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int kk = 0; kk < i; ++kk) rhs[i] -= a(i, kk) * rhs[kk];
        rhs[i] /= a(i, i);
    }
    out.assign(n, 0.0);
    for (int i = n - 1; i >= 0; --i) {
        double v = rhs[i];
        for (int kk = i + 1; kk < n; ++kk) v -= a(kk, i) * out[kk];
        out[i] = v / a(i, i);
    }
    return true;
}

/// Coefficient-space projection machinery for the set
///   { sum_k x_k B_k  :  E x = c }.
/// Solves the KKT system of min ||sum x B - T||_F subject to E x = c. With an
/// inconsistent or deficient system the pseudo-inverse yields a least-squares
/// compromise, so callers must check equality_residual before trusting a
/// result.
class SpanProjector {
public:
    SpanProjector(std::vector<SymMatrix> basis, Matrix eq, std::vector<double> eq_rhs)
        : basis_(std::move(basis)), eq_(std::move(eq)), eq_rhs_(std::move(eq_rhs)) {
        const int d = static_cast<int>(basis_.size());
        const int ne = eq_.rows();
        Matrix kkt(d + ne, d + ne);
        for (int k = 0; k < d; ++k)
            for (int l = k; l < d; ++l) {
                kkt(k, l) = inner(basis_[k], basis_[l]);
                kkt(l, k) = kkt(k, l);
            }
        for (int e = 0; e < ne; ++e)
            for (int k = 0; k < d; ++k) {
                kkt(k, d + e) = eq_(e, k);
                kkt(d + e, k) = eq_(e, k);
            }
        solver_.emplace(SymMatrix(kkt));
        rhs_scale_ = 1.0;
        for (double v : eq_rhs_) rhs_scale_ = std::max(rhs_scale_, std::fabs(v));
    }

    int dim() const { return static_cast<int>(basis_.size()); }
    const std::vector<SymMatrix>& basis() const { return basis_; }
    const Matrix& equalities() const { return eq_; }
    const std::vector<double>& equality_rhs() const { return eq_rhs_; }
    double rhs_scale() const { return rhs_scale_; }

    /// Coefficients of the constrained least-squares fit to target T.
    std::vector<double> project(const SymMatrix& t) const {
        const int d = dim();
        std::vector<double> rhs(d + eq_.rows(), 0.0);
        for (int k = 0; k < d; ++k) rhs[k] = inner(basis_[k], t);
        for (int e = 0; e < eq_.rows(); ++e) rhs[d + e] = eq_rhs_[e];
        std::vector<double> xl = solver_->solve(rhs);
        xl.resize(d);
        return xl;
    }

    std::vector<double> enforce_equalities(const std::vector<double>& x) const {
        return project(combine(basis_, x));
    }

    double equality_residual(const std::vector<double>& x) const {
        double worst = 0.0;
        for (int e = 0; e < eq_.rows(); ++e) {
            double acc = 0.0;
            for (int k = 0; k < dim(); ++k) acc += eq_(e, k) * x[k];
            worst = std::max(worst, std::fabs(acc - eq_rhs_[e]));
        }
        return worst;
    }

private:
    std::vector<SymMatrix> basis_;
    Matrix eq_;
    std::vector<double> eq_rhs_;
    std::optional<PinvSolver> solver_;
    double rhs_scale_ = 1.0;
};

struct SpanApResult {
    bool converged = false;
    std::vector<double> x;
    double gap = 0.0;
};

/// Alternating projections between the PSD cone and an affine subset of a
/// matrix span, tracked in coefficient space. Convergence requires both a
/// small projection gap and satisfied equality constraints.
inline SpanApResult span_psd_ap(const SpanProjector& proj, std::vector<double> x,
                                const ApOptions& opt = {}) {
    SpanApResult out;
    x = proj.enforce_equalities(x);
    const double eq_tol = 1e-8 * proj.rhs_scale();
    double checkpoint_gap = -1.0;
    bool reached = false;
    int extra = 0;
    for (int iter = 0; iter < opt.max_iter; ++iter) {
        const SymMatrix m = combine(proj.basis(), x);
        const SymMatrix t = project_psd(m);
        x = proj.project(t);
        const double gap = (combine(proj.basis(), x) - t).frobenius_norm();
        out.gap = gap;
        if (gap <= opt.gap_tol && proj.equality_residual(x) <= eq_tol) {
            reached = true;
            if (gap <= opt.gap_tol * 1e-3 || ++extra >= 2000) break;
            continue;
        }
        if (iter % opt.plateau_window == opt.plateau_window - 1) {
            if (checkpoint_gap >= 0.0 && gap > opt.plateau_factor * checkpoint_gap &&
                gap > 100.0 * opt.gap_tol) {
                break;  // stalled far from the target
            }
            checkpoint_gap = gap;
        }
    }
    out.converged = reached;
    out.x = std::move(x);
    return out;
}

/// Machine-precision refinement with the kernel as explicit unknowns:
/// damped Levenberg-Marquardt on the square bilinear system
///   M(x) N = 0,  triu(N^T N - I) = 0,  E x = c
/// with N an s x (s - rho) kernel basis. The factorized form Y Y^T cannot
/// resolve tangent displacement of the kernel (its residual is quartic in
/// the displacement); these equations are linear in it, so the converged x
/// carries a machine-accurate kernel, which downstream faces inherit.
inline std::optional<std::vector<double>> kernel_system_refine(const SpanProjector& proj,
                                                               const std::vector<double>& x0,
                                                               int rho, int max_iter = 80) {
    const std::vector<SymMatrix>& basis = proj.basis();
    const int d = proj.dim();
    const int s = basis.front().order();
    const int nn = s - rho;
    if (nn <= 0) return std::nullopt;
    const Matrix& eq = proj.equalities();
    const std::vector<double>& c = proj.equality_rhs();
    const int ne = eq.rows();
    const int nvars = d + s * nn;
    const int nres = s * nn + nn * (nn + 1) / 2 + ne;

    std::vector<double> x = x0;
    const SpectralDecomp dec = spectral(combine(basis, x));
    Matrix n(s, nn);
    for (int col = 0; col < nn; ++col)
        for (int i = 0; i < s; ++i) n(i, col) = dec.eigenvectors(i, rho + col);

    auto eval = [&](const std::vector<double>& xx, const Matrix& nb, std::vector<double>& f) {
        const SymMatrix m = combine(basis, xx);
        f.assign(nres, 0.0);
        int idx = 0;
        double cost = 0.0;
        const Matrix mn = m.as_matrix() * nb;
        for (int i = 0; i < s; ++i)
            for (int col = 0; col < nn; ++col, ++idx) {
                f[idx] = mn(i, col);
                cost += f[idx] * f[idx];
            }
        const Matrix ntn = nb.transpose() * nb;
        for (int a = 0; a < nn; ++a)
            for (int b = a; b < nn; ++b, ++idx) {
                f[idx] = ntn(a, b) - (a == b ? 1.0 : 0.0);
                cost += f[idx] * f[idx];
            }
        for (int e = 0; e < ne; ++e, ++idx) {
            double acc = -c[e];
            for (int k = 0; k < d; ++k) acc += eq(e, k) * xx[k];
            f[idx] = acc;
            cost += f[idx] * f[idx];
        }
        return cost;
    };

    const double scale = std::max({1.0, proj.rhs_scale(), eig_scale(dec.eigenvalues)});
    const double target = 1e-13 * scale;

    std::vector<double> f;
    double cost = eval(x, n, f);
    double lambda = 1e-8;
    for (int iter = 0; iter < max_iter && cost > target * target; ++iter) {
        const SymMatrix m = combine(basis, x);
        Matrix jac(nres, nvars);
        int idx = 0;
        for (int i = 0; i < s; ++i)
            for (int col = 0; col < nn; ++col, ++idx) {
                for (int k = 0; k < d; ++k) {
                    double acc = 0.0;
                    for (int l = 0; l < s; ++l) acc += basis[k](i, l) * n(l, col);
                    jac(idx, k) = acc;
                }
                for (int l = 0; l < s; ++l) jac(idx, d + l * nn + col) += m(i, l);
            }
        for (int a = 0; a < nn; ++a)
            for (int b = a; b < nn; ++b, ++idx)
                for (int l = 0; l < s; ++l) {
                    jac(idx, d + l * nn + b) += n(l, a);
                    jac(idx, d + l * nn + a) += n(l, b);
                }
        for (int e = 0; e < ne; ++e, ++idx)
            for (int k = 0; k < d; ++k) jac(idx, k) = eq(e, k);

        const Matrix jtj = jac.transpose() * jac;
        std::vector<double> minus_jtf(nvars, 0.0);
        for (int a = 0; a < nvars; ++a) {
            double acc = 0.0;
            for (int q = 0; q < nres; ++q) acc += jac(q, a) * f[q];
            minus_jtf[a] = -acc;
        }

        bool improved = false;
        for (int attempt = 0; attempt < 10; ++attempt) {
            Matrix damped = jtj;
            for (int a = 0; a < nvars; ++a) damped(a, a) += lambda * (1.0 + jtj(a, a));
            std::vector<double> delta;
            if (!cholesky_solve(damped, minus_jtf, delta)) {
                lambda *= 10.0;
                continue;
            }
            std::vector<double> xt = x;
            Matrix nt = n;
            for (int k = 0; k < d; ++k) xt[k] += delta[k];
            for (int l = 0; l < s; ++l)
                for (int col = 0; col < nn; ++col) nt(l, col) += delta[d + l * nn + col];
            std::vector<double> ft;
            const double ct = eval(xt, nt, ft);
            if (ct < cost) {
                x = std::move(xt);
                n = std::move(nt);
                f = std::move(ft);
                cost = ct;
                lambda = std::max(lambda / 5.0, 1e-14);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!improved) break;
    }
    if (cost > target * target) return std::nullopt;
    return x;
}

/// Distinct candidate ranks read off the eigenvalue profile of a stalled
/// iterate, from the sharpest support split to the loosest.
inline std::vector<int> candidate_ranks(const SymMatrix& m) {
    const SpectralDecomp d = spectral(m);
    const double scale = eig_scale(d.eigenvalues);
    std::vector<int> out;
    for (double tau : {1e-1, 1e-2, 1e-4, 1e-6}) {
        int rho = 0;
        for (double v : d.eigenvalues)
            if (v > tau * scale) ++rho;
        if (rho >= 1 && (out.empty() || out.back() != rho)) out.push_back(rho);
    }
    return out;
}

/// Local low-rank refinement of an exposing candidate: solves
///   M(x) = Y Y^T,  E x = c
/// by Levenberg-Marquardt in (x, Y) from the warm start. Plain alternating
/// projections contract uselessly slowly when the feasible set touches the
/// PSD cone tangentially (singleton targets); this factorized solve is
/// locally fast and lands on an exactly-PSD candidate.
inline std::optional<std::vector<double>> lowrank_span_refine(const SpanProjector& proj,
                                                              const std::vector<double>& x0,
                                                              int rho, int max_iter = 120) {
    const std::vector<SymMatrix>& basis = proj.basis();
    const int d = proj.dim();
    const int s = basis.front().order();
    const Matrix& eq = proj.equalities();
    const std::vector<double>& c = proj.equality_rhs();
    const int ne = eq.rows();
    const int nvars = d + s * rho;
    const int nres = s * (s + 1) / 2 + ne;
    const double root2 = std::sqrt(2.0);

    const SymMatrix m0 = combine(basis, x0);
    const SpectralDecomp dec = spectral(m0);
    Matrix y(s, rho);
    for (int k = 0; k < rho; ++k) {
        const double lam = std::max(dec.eigenvalues[k], 1e-12);
        for (int i = 0; i < s; ++i) y(i, k) = std::sqrt(lam) * dec.eigenvectors(i, k);
    }
    std::vector<double> x = x0;

    auto eval = [&](const std::vector<double>& xx, const Matrix& yy, std::vector<double>& r) {
        const SymMatrix m = combine(basis, xx);
        const Matrix yyt = yy * yy.transpose();
        r.resize(nres);
        int idx = 0;
        double cost = 0.0;
        for (int i = 0; i < s; ++i)
            for (int j = i; j < s; ++j, ++idx) {
                const double w = (i == j) ? 1.0 : root2;
                r[idx] = w * (m(i, j) - yyt(i, j));
                cost += r[idx] * r[idx];
            }
        for (int e = 0; e < ne; ++e, ++idx) {
            double acc = -c[e];
            for (int k = 0; k < d; ++k) acc += eq(e, k) * xx[k];
            r[idx] = acc;
            cost += r[idx] * r[idx];
        }
        return cost;
    };

    const double scale = std::max({1.0, proj.rhs_scale(), eig_scale(dec.eigenvalues)});
    const double target = 1e-12 * scale;

    std::vector<double> r;
    double cost = eval(x, y, r);
    double lambda = 1e-6;
    for (int iter = 0; iter < max_iter && cost > target * target; ++iter) {
        Matrix jac(nres, nvars);
        int idx = 0;
        for (int i = 0; i < s; ++i)
            for (int j = i; j < s; ++j, ++idx) {
                const double w = (i == j) ? 1.0 : root2;
                for (int k = 0; k < d; ++k) jac(idx, k) = w * basis[k](i, j);
                for (int kc = 0; kc < rho; ++kc) {
                    jac(idx, d + i * rho + kc) += -w * y(j, kc);
                    jac(idx, d + j * rho + kc) += -w * y(i, kc);
                }
            }
        for (int e = 0; e < ne; ++e, ++idx)
            for (int k = 0; k < d; ++k) jac(idx, k) = eq(e, k);

        const Matrix jtj = jac.transpose() * jac;
        std::vector<double> minus_jtr(nvars, 0.0);
        for (int a = 0; a < nvars; ++a) {
            double acc = 0.0;
            for (int q = 0; q < nres; ++q) acc += jac(q, a) * r[q];
            minus_jtr[a] = -acc;
        }

        bool improved = false;
        for (int attempt = 0; attempt < 8; ++attempt) {
            Matrix damped = jtj;
            for (int a = 0; a < nvars; ++a) damped(a, a) += lambda * (1.0 + jtj(a, a));
            std::vector<double> delta;
            if (!cholesky_solve(damped, minus_jtr, delta)) {
                lambda *= 10.0;
                continue;
            }
            std::vector<double> xt = x;
            Matrix yt = y;
            for (int k = 0; k < d; ++k) xt[k] += delta[k];
            for (int i = 0; i < s; ++i)
                for (int kc = 0; kc < rho; ++kc) yt(i, kc) += delta[d + i * rho + kc];
            std::vector<double> rt;
            const double ct = eval(xt, yt, rt);
            if (ct < cost) {
                x = std::move(xt);
                y = std::move(yt);
                r = std::move(rt);
                cost = ct;
                lambda = std::max(lambda / 3.0, 1e-12);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!improved) break;
    }
    if (cost > target * target) return std::nullopt;
    return x;
}

/// Exactification of an exposing-search iterate: a coarse factorized solve to
/// reach the right rank stratum, then the kernel-system refinement so the
/// candidate's kernel is machine-accurate. Every returned candidate is
/// verified PSD with satisfied equalities.
inline std::optional<std::vector<double>> exactify_span_candidate(const SpanProjector& proj,
                                                                  const std::vector<double>& x0,
                                                                  const Tolerances& tol) {
    auto verified = [&](const std::vector<double>& x) -> bool {
        if (proj.equality_residual(x) > 1e-8 * proj.rhs_scale()) return false;
        return is_psd(combine(proj.basis(), x), tol);
    };

    const int s = proj.basis().front().order();
    for (int rho : candidate_ranks(combine(proj.basis(), x0))) {
        std::vector<double> warm = x0;
        if (const auto coarse = lowrank_span_refine(proj, x0, rho)) warm = *coarse;
        if (rho >= s) {
            // Full-rank candidate: no kernel to pin; the coarse solve decides.
            if (warm != x0 && verified(warm)) return warm;
            continue;
        }
        const auto fine = kernel_system_refine(proj, warm, rho);
        if (fine && verified(*fine)) return fine;
    }
    return std::nullopt;
}

/// Projects M onto the affine set { X : <A_i, X> = b_i } using a precomputed
/// pseudo-inverse of the constraint Gram matrix.
class AffineProjector {
public:
    AffineProjector(std::vector<SymMatrix> constraints, std::vector<double> rhs)
        : constraints_(std::move(constraints)), rhs_(std::move(rhs)) {
        const int m = static_cast<int>(constraints_.size());
        Matrix g(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = i; j < m; ++j) {
                g(i, j) = inner(constraints_[i], constraints_[j]);
                g(j, i) = g(i, j);
            }
        solver_.emplace(SymMatrix(g));
    }

    const std::vector<SymMatrix>& constraints() const { return constraints_; }
    const std::vector<double>& rhs() const { return rhs_; }

    double worst_rhs_scale() const {
        double s = 1.0;
        for (double v : rhs_) s = std::max(s, std::fabs(v));
        return s;
    }

    double worst_residual(const SymMatrix& m) const {
        double worst = 0.0;
        for (std::size_t i = 0; i < constraints_.size(); ++i)
            worst = std::max(worst, std::fabs(inner(constraints_[i], m) - rhs_[i]));
        return worst;
    }

    SymMatrix project(const SymMatrix& m) const {
        std::vector<double> r(constraints_.size());
        for (std::size_t i = 0; i < constraints_.size(); ++i)
            r[i] = inner(constraints_[i], m) - rhs_[i];
        const std::vector<double> mu = solver_->solve(r);
        Matrix out = m.as_matrix();
        for (std::size_t i = 0; i < constraints_.size(); ++i) {
            if (mu[i] == 0.0) continue;
            out = out - mu[i] * constraints_[i].as_matrix();
        }
        return SymMatrix(out);
    }

private:
    std::vector<SymMatrix> constraints_;
    std::vector<double> rhs_;
    std::optional<PinvSolver> solver_;
};

struct AffineApResult {
    bool converged = false;
    SymMatrix m;
    double gap = 0.0;
};

/// Alternating projections between the PSD cone and the affine constraint set
/// in full matrix space.
inline AffineApResult affine_psd_ap(const AffineProjector& proj, SymMatrix m,
                                    const ApOptions& opt = {}) {
    AffineApResult out;
    m = proj.project(m);
    double checkpoint_gap = -1.0;
    bool reached = false;
    int extra = 0;
    for (int iter = 0; iter < opt.max_iter; ++iter) {
        const SymMatrix t = project_psd(m);
        m = proj.project(t);
        const double gap = (m - t).frobenius_norm();
        out.gap = gap;
        if (gap <= opt.gap_tol) {
            reached = true;
            if (gap <= opt.gap_tol * 1e-3 || ++extra >= 2000) break;
            continue;
        }
        if (iter % opt.plateau_window == opt.plateau_window - 1) {
            if (checkpoint_gap >= 0.0 && gap > opt.plateau_factor * checkpoint_gap &&
                gap > 100.0 * opt.gap_tol) {
                break;
            }
            checkpoint_gap = gap;
        }
    }
    out.converged = reached;
    out.m = std::move(m);
    return out;
}

/// Support-restricted refinement of a near-feasible PSD point: restricts to
/// the span of the eigenvectors above the support threshold and re-solves the
/// affine constraints exactly there. Returns nothing if the refined point
/// stops being PSD or feasible.
inline std::optional<SymMatrix> polish_on_support(const SymMatrix& m,
                                                  const std::vector<SymMatrix>& constraints,
                                                  const std::vector<double>& rhs,
                                                  const Tolerances& tol,
                                                  double support_rel = 1e-6) {
    const SpectralDecomp d = spectral(m);
    const double scale = eig_scale(d.eigenvalues);
    std::vector<int> keep;
    for (int j = 0; j < m.order(); ++j)
        if (d.eigenvalues[j] > support_rel * scale) keep.push_back(j);
    if (keep.empty()) return std::nullopt;

    const int rho = static_cast<int>(keep.size());
    Matrix w(m.order(), rho);
    for (int j = 0; j < rho; ++j)
        for (int i = 0; i < m.order(); ++i) w(i, j) = d.eigenvectors(i, keep[j]);

    std::vector<SymMatrix> reduced;
    reduced.reserve(constraints.size());
    for (const SymMatrix& a : constraints)
        reduced.emplace_back(w.transpose() * a.as_matrix() * w);

    AffineProjector rp(reduced, rhs);
    const SymMatrix s0(w.transpose() * m.as_matrix() * w);
    const SymMatrix s = rp.project(s0);
    if (!is_psd(s, tol)) return std::nullopt;

    SymMatrix lifted(w * s.as_matrix() * w.transpose());
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        const double res = inner(constraints[i], lifted) - rhs[i];
        if (std::fabs(res) > tol.feas_residual * std::max(1.0, std::fabs(rhs[i]))) {
            return std::nullopt;
        }
    }
    return lifted;
}

/// Local low-rank refinement of a feasibility iterate: solves
/// <A_i, Y Y^T> = b_i by Levenberg-Marquardt in Y from the warm start. The
/// result Y Y^T is PSD by construction.
inline std::optional<SymMatrix> lowrank_affine_refine(const AffineProjector& proj,
                                                      const SymMatrix& m0, int rho,
                                                      int max_iter = 120) {
    const std::vector<SymMatrix>& constraints = proj.constraints();
    const std::vector<double>& b = proj.rhs();
    const int s = m0.order();
    const int m = static_cast<int>(constraints.size());
    const int nvars = s * rho;

    const SpectralDecomp dec = spectral(m0);
    Matrix y(s, rho);
    for (int k = 0; k < rho; ++k) {
        const double lam = std::max(dec.eigenvalues[k], 1e-12);
        for (int i = 0; i < s; ++i) y(i, k) = std::sqrt(lam) * dec.eigenvectors(i, k);
    }

    auto eval = [&](const Matrix& yy, std::vector<double>& r) {
        const SymMatrix x(yy * yy.transpose());
        r.resize(m);
        double cost = 0.0;
        for (int e = 0; e < m; ++e) {
            r[e] = inner(constraints[e], x) - b[e];
            cost += r[e] * r[e];
        }
        return cost;
    };

    double bscale = 1.0;
    for (double v : b) bscale = std::max(bscale, std::fabs(v));
    const double target = 1e-12 * bscale;

    std::vector<double> r;
    double cost = eval(y, r);
    double lambda = 1e-6;
    for (int iter = 0; iter < max_iter && cost > target * target; ++iter) {
        Matrix jac(m, nvars);
        for (int e = 0; e < m; ++e) {
            const Matrix ay = constraints[e].as_matrix() * y;
            for (int i = 0; i < s; ++i)
                for (int kc = 0; kc < rho; ++kc) jac(e, i * rho + kc) = 2.0 * ay(i, kc);
        }
        const Matrix jtj = jac.transpose() * jac;
        std::vector<double> minus_jtr(nvars, 0.0);
        for (int a = 0; a < nvars; ++a) {
            double acc = 0.0;
            for (int e = 0; e < m; ++e) acc += jac(e, a) * r[e];
            minus_jtr[a] = -acc;
        }

        bool improved = false;
        for (int attempt = 0; attempt < 8; ++attempt) {
            Matrix damped = jtj;
            for (int a = 0; a < nvars; ++a) damped(a, a) += lambda * (1.0 + jtj(a, a));
            std::vector<double> delta;
            if (!cholesky_solve(damped, minus_jtr, delta)) {
                lambda *= 10.0;
                continue;
            }
            Matrix yt = y;
            for (int i = 0; i < s; ++i)
                for (int kc = 0; kc < rho; ++kc) yt(i, kc) += delta[i * rho + kc];
            std::vector<double> rt;
            const double ct = eval(yt, rt);
            if (ct < cost) {
                y = std::move(yt);
                r = std::move(rt);
                cost = ct;
                lambda = std::max(lambda / 3.0, 1e-12);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!improved) break;
    }
    if (cost > target * target) return std::nullopt;
    return SymMatrix(y * y.transpose());
}

/// Exactification of a feasibility iterate: support polish when the iterate
/// is already clean, otherwise factorized low-rank solves over the candidate
/// ranks. Returned points satisfy the constraints to feasibility tolerance
/// and are PSD.
inline std::optional<SymMatrix> exactify_affine_candidate(const AffineProjector& proj,
                                                          const SymMatrix& m0,
                                                          const Tolerances& tol) {
    const std::vector<SymMatrix>& constraints = proj.constraints();
    const std::vector<double>& rhs = proj.rhs();

    if (auto direct = polish_on_support(m0, constraints, rhs, tol, 1e-7)) {
        const SpectralDecomp d = spectral(*direct);
        const double scale = eig_scale(d.eigenvalues);
        bool junk_free = true;
        for (double v : d.eigenvalues)
            if (std::fabs(v) > 1e-12 * scale && std::fabs(v) <= 1e-7 * scale) junk_free = false;
        if (junk_free) return direct;
    }

    for (int rho : candidate_ranks(m0)) {
        const auto refined = lowrank_affine_refine(proj, m0, rho);
        if (!refined) continue;
        if (auto out = polish_on_support(*refined, constraints, rhs, tol, 1e-6)) return out;
        if (proj.worst_residual(*refined) <=
            tol.feas_residual * std::max(1.0, proj.worst_rhs_scale())) {
            return refined;
        }
    }
    return std::nullopt;
}

}  // namespace rigidcert::detail
