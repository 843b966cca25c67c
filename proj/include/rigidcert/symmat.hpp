#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rigidcert/matrix.hpp"
#include "rigidcert/tolerances.hpp"

namespace rigidcert {

/// Symmetric matrix. Construction symmetrizes via (M + M^T)/2 so downstream
/// code can rely on exact symmetry, and rejects non-finite entries.
class SymMatrix {
public:
    SymMatrix() = default;

    explicit SymMatrix(int order) : m_(order, order) {}

    explicit SymMatrix(const Matrix& m) {
        if (m.rows() != m.cols()) throw ShapeError("SymMatrix requires a square matrix");
        if (!m.all_finite()) throw NumericInputError("SymMatrix: non-finite entries");
        m_ = Matrix(m.rows(), m.cols());
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j < m.cols(); ++j) m_(i, j) = 0.5 * (m(i, j) + m(j, i));
    }

    SymMatrix(std::initializer_list<std::initializer_list<double>> rows)
        : SymMatrix(Matrix(rows)) {}

    int order() const { return m_.rows(); }

    double operator()(int i, int j) const { return m_(i, j); }

    /// Symmetric write: sets (i,j) and (j,i).
    void set(int i, int j, double v) {
        m_(i, j) = v;
        m_(j, i) = v;
    }

    const Matrix& as_matrix() const { return m_; }

    double frobenius_norm() const { return m_.frobenius_norm(); }
    double max_abs() const { return m_.max_abs(); }

    double trace() const {
        double t = 0.0;
        for (int i = 0; i < order(); ++i) t += m_(i, i);
        return t;
    }

private:
    Matrix m_;
};

inline SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
    return SymMatrix(a.as_matrix() + b.as_matrix());
}

inline SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
    return SymMatrix(a.as_matrix() - b.as_matrix());
}

inline SymMatrix operator*(double s, const SymMatrix& a) {
    return SymMatrix(s * a.as_matrix());
}

/// Frobenius inner product.
inline double inner(const SymMatrix& a, const SymMatrix& b) {
    if (a.order() != b.order()) throw ShapeError("inner: order mismatch");
    double s = 0.0;
    for (int i = 0; i < a.order(); ++i)
        for (int j = 0; j < a.order(); ++j) s += a(i, j) * b(i, j);
    return s;
}

/// Eigen-decomposition M = Q diag(lambda) Q^T with eigenvalues sorted
/// descending and column i of Q paired with eigenvalue i.
struct SpectralDecomp {
    std::vector<double> eigenvalues;
    Matrix eigenvectors;
};

/// Matrix with orthonormal columns (possibly zero columns for the empty basis).
struct Basis {
    Matrix m;

    int rows() const { return m.rows(); }
    int cols() const { return m.cols(); }
    bool empty() const { return m.cols() == 0; }

    static Basis empty_basis(int rows) { return Basis{Matrix(rows, 0)}; }
    static Basis identity(int n) { return Basis{Matrix::identity(n)}; }
};

inline double orthonormality_defect(const Matrix& b) {
    Matrix g = b.transpose() * b;
    return (g - Matrix::identity(b.cols())).frobenius_norm();
}

namespace detail {

/// Fixes the overall sign of each column: first coordinate of magnitude above
/// 1e-12 is made positive. Keeps basis output reproducible across runs.
inline void fix_column_signs(Matrix& q) {
    for (int j = 0; j < q.cols(); ++j) {
        double sign = 0.0;
        for (int i = 0; i < q.rows(); ++i) {
            if (std::fabs(q(i, j)) > 1e-12) {
                sign = q(i, j) > 0.0 ? 1.0 : -1.0;
                break;
            }
        }
        if (sign < 0.0)
            for (int i = 0; i < q.rows(); ++i) q(i, j) = -q(i, j);
    }
}

}  // namespace detail

/// Cyclic Jacobi eigensolver. Sweeps rotate away off-diagonal mass until the
/// off-diagonal Frobenius norm drops below 1e-12 * ||M||_F.
inline SpectralDecomp spectral(const SymMatrix& sym) {
    const int n = sym.order();
    Matrix a = sym.as_matrix();
    Matrix q = Matrix::identity(n);
    const double norm = a.frobenius_norm();
    const double stop = 1e-12 * norm;

    auto off_norm = [&]() {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps && off_norm() > stop; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int r = p + 1; r < n; ++r) {
                const double apq = a(p, r);
                if (std::fabs(apq) <= 1e-300) continue;
                const double theta = (a(r, r) - a(p, p)) / (2.0 * apq);
                double t = 1.0 / (std::fabs(theta) + std::sqrt(1.0 + theta * theta));
                if (theta < 0.0) t = -t;
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                const double app = a(p, p);
                const double arr = a(r, r);
                a(p, p) = app - t * apq;
                a(r, r) = arr + t * apq;
                a(p, r) = 0.0;
                a(r, p) = 0.0;
                for (int i = 0; i < n; ++i) {
                    if (i == p || i == r) continue;
                    const double aip = a(i, p);
                    const double air = a(i, r);
                    a(i, p) = c * aip - s * air;
                    a(p, i) = a(i, p);
                    a(i, r) = s * aip + c * air;
                    a(r, i) = a(i, r);
                }
                for (int i = 0; i < n; ++i) {
                    const double qip = q(i, p);
                    const double qir = q(i, r);
                    q(i, p) = c * qip - s * qir;
                    q(i, r) = s * qip + c * qir;
                }
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return a(i, i) > a(j, j); });

    SpectralDecomp d;
    d.eigenvalues.resize(n);
    d.eigenvectors = Matrix(n, n);
    for (int j = 0; j < n; ++j) {
        d.eigenvalues[j] = a(order[j], order[j]);
        for (int i = 0; i < n; ++i) d.eigenvectors(i, j) = q(i, order[j]);
    }
    detail::fix_column_signs(d.eigenvectors);
    return d;
}

namespace detail {

inline double eig_scale(const std::vector<double>& eigenvalues) {
    double m = 0.0;
    for (double v : eigenvalues) m = std::max(m, std::fabs(v));
    return std::max(1.0, m);
}

}  // namespace detail

/// Number of eigenvalues with |lambda| above the relative rank threshold.
inline int rank_of(const SymMatrix& m, const Tolerances& tol = {}) {
    const SpectralDecomp d = spectral(m);
    const double cut = tol.rank_cut * detail::eig_scale(d.eigenvalues);
    int r = 0;
    for (double v : d.eigenvalues)
        if (std::fabs(v) > cut) ++r;
    return r;
}

/// Orthonormal basis of the numerical kernel. Full-rank input yields the
/// empty basis.
inline Basis nullspace(const SymMatrix& m, const Tolerances& tol = {}) {
    const SpectralDecomp d = spectral(m);
    const double cut = tol.rank_cut * detail::eig_scale(d.eigenvalues);
    std::vector<int> keep;
    for (int j = 0; j < m.order(); ++j)
        if (std::fabs(d.eigenvalues[j]) <= cut) keep.push_back(j);

    Matrix b(m.order(), static_cast<int>(keep.size()));
    for (int j = 0; j < static_cast<int>(keep.size()); ++j)
        for (int i = 0; i < m.order(); ++i) b(i, j) = d.eigenvectors(i, keep[j]);
    detail::fix_column_signs(b);
    return Basis{std::move(b)};
}

/// Orthonormal basis of the intersection of the block kernels, i.e. the
/// kernel of the vertical stack [B_1; B_2; ...]. Computed from the normal
/// matrix of the (per-block normalized) stack.
inline Basis stacked_nullspace(const std::vector<Matrix>& blocks, const Tolerances& tol = {}) {
    if (blocks.empty()) throw ShapeError("stacked_nullspace: need at least one block");
    const int n = blocks.front().cols();
    Matrix normal(n, n);
    for (const Matrix& b : blocks) {
        if (b.cols() != n) throw ShapeError("stacked_nullspace: column-count mismatch");
        const double s = b.frobenius_norm();
        if (s == 0.0) continue;  // zero block constrains nothing
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                double acc = 0.0;
                for (int k = 0; k < b.rows(); ++k) acc += b(k, i) * b(k, j);
                normal(i, j) += acc / (s * s);
                if (i != j) normal(j, i) = normal(i, j);
            }
        }
    }
    return nullspace(SymMatrix(normal), tol);
}

/// True iff lambda_min >= -psd_slack * max(1, |lambda|_max).
inline bool is_psd(const SymMatrix& m, const Tolerances& tol = {}) {
    const SpectralDecomp d = spectral(m);
    if (d.eigenvalues.empty()) return true;
    const double scale = detail::eig_scale(d.eigenvalues);
    return d.eigenvalues.back() >= -tol.psd_slack * scale;
}

/// Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped).
inline SymMatrix project_psd(const SymMatrix& m) {
    const SpectralDecomp d = spectral(m);
    const int n = m.order();
    Matrix out(n, n);
    for (int k = 0; k < n; ++k) {
        const double lam = d.eigenvalues[k];
        if (lam <= 0.0) continue;
        for (int i = 0; i < n; ++i) {
            const double w = lam * d.eigenvectors(i, k);
            for (int j = i; j < n; ++j) {
                out(i, j) += w * d.eigenvectors(j, k);
            }
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) out(j, i) = out(i, j);
    return SymMatrix(out);
}

/// Orthonormal basis W of the range of a PSD matrix A, so that the minimal
/// face containing A is {W Y W^T : Y PSD}. Rejects non-PSD input.
inline Basis face_from(const SymMatrix& a, const Tolerances& tol = {}) {
    const SpectralDecomp d = spectral(a);
    const double scale = detail::eig_scale(d.eigenvalues);
    if (!d.eigenvalues.empty() && d.eigenvalues.back() < -tol.psd_slack * scale) {
        throw DomainError("face_from: matrix is not PSD");
    }
    std::vector<int> keep;
    for (int j = 0; j < a.order(); ++j)
        if (std::fabs(d.eigenvalues[j]) > tol.rank_cut * scale) keep.push_back(j);

    Matrix w(a.order(), static_cast<int>(keep.size()));
    for (int j = 0; j < static_cast<int>(keep.size()); ++j)
        for (int i = 0; i < a.order(); ++i) w(i, j) = d.eigenvectors(i, keep[j]);
    detail::fix_column_signs(w);
    return Basis{std::move(w)};
}

/// Minimum-norm solution of the symmetric system A x = rhs via spectral
/// pseudo-inverse. Eigenvalues below rel_cut * |lambda|_max are treated as zero.
inline std::vector<double> solve_sym_pinv(const SymMatrix& a, const std::vector<double>& rhs,
                                          double rel_cut = 1e-12) {
    const int n = a.order();
    if (static_cast<int>(rhs.size()) != n) throw ShapeError("solve_sym_pinv: rhs size mismatch");
    const SpectralDecomp d = spectral(a);
    double scale = 0.0;
    for (double v : d.eigenvalues) scale = std::max(scale, std::fabs(v));
    const double cut = rel_cut * std::max(scale, 1e-300);

    std::vector<double> x(n, 0.0);
    for (int k = 0; k < n; ++k) {
        const double lam = d.eigenvalues[k];
        if (std::fabs(lam) <= cut) continue;
        double proj = 0.0;
        for (int i = 0; i < n; ++i) proj += d.eigenvectors(i, k) * rhs[i];
        proj /= lam;
        for (int i = 0; i < n; ++i) x[i] += proj * d.eigenvectors(i, k);
    }
    return x;
}

}  // namespace rigidcert
