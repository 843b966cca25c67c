#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rigidcert/facial_reduction.hpp"
#include "rigidcert/framework.hpp"
#include "rigidcert/stress.hpp"

// Rigidity decisions for bar frameworks via facial reduction over the Gram
// spectrahedron
//   F = { B PSD : Be = 0, <F_ij, B> = |p_i - p_j|^2 for every edge },
// encoded with initial face V (the orthonormal complement of the all-ones
// vector). A reduction chain re-expressed over [P rho] bases is the
// certificate of dimensional rigidity: a PSD stress matrix Omega^0 followed
// by quasi-stress matrices whose reduced ranks sum to n - r - 1. A feasible
// Gram matrix of rank > r factors into an equivalent higher-dimensional
// witness framework instead.

namespace rigidcert {

/// One certificate step beyond the PSD stress matrix.
struct CertStep {
    SymMatrix omega;                                  // quasi-stress matrix
    Matrix rho;                                       // current rho_j basis
    std::optional<Matrix> xi;                         // kernel recursion, absent on the last step
    int rank_contrib = 0;
    std::vector<std::pair<int, int>> forced_zero_edges;
};

/// Dimensional-rigidity certificate: Omega^0 plus the quasi-stress steps.
/// A framework of full affine span (r = n-1) gets the trivial certificate
/// with no matrices and an explanatory note.
struct RigidityCertificate {
    int n = 0;
    int r = 0;
    std::optional<SymMatrix> omega0;
    std::vector<CertStep> steps;
    std::vector<int> ledger;  // rank of Omega^0 first, then one entry per step
    std::string note;

    bool trivial() const { return !omega0.has_value(); }

    int ledger_sum() const {
        int s = 0;
        for (int v : ledger) s += v;
        return s;
    }
};

enum class Verdict { Rigid, Flexible, Undecided };

/// Outcome of the dimensional-rigidity decision. Rigid outcomes carry both
/// the certificate and the raw engine chain so either form can be re-checked
/// independently; flexible outcomes carry the witness framework and its Gram
/// matrix.
struct RigidityOutcome {
    Verdict verdict = Verdict::Undecided;
    std::optional<RigidityCertificate> certificate;
    std::optional<ReductionChain> chain;
    std::optional<Framework> witness;
    std::optional<SymMatrix> witness_gram;
    std::string diagnostics;
};

/// Constraint system of the equivalent-framework spectrahedron: one edge
/// functional per edge, squared lengths on the right-hand side, and the
/// centering face V as the initial face.
inline SpectrahedronSpec build_spec(const Framework& f) {
    const int n = f.vertex_count();
    std::vector<SymMatrix> constraints;
    constraints.reserve(f.graph.edges.size());
    for (auto [i, j] : f.graph.edges) constraints.push_back(edge_functional(n, i, j));
    return SpectrahedronSpec(n, std::move(constraints), lengths(f).d2, v_basis(n));
}

/// Greedy split of the edges at a reduction face: an edge is redundant when
/// its face-restricted functional depends linearly on the kept predecessors.
/// The face may be any full-column-rank matrix; the split only depends on its
/// range.
inline std::pair<std::vector<std::pair<int, int>>, std::vector<std::pair<int, int>>>
redundant_edges(const Framework& f, const Matrix& face, const Tolerances& tol = {}) {
    std::vector<SymMatrix> constraints;
    constraints.reserve(f.graph.edges.size());
    for (auto [i, j] : f.graph.edges)
        constraints.push_back(edge_functional(f.vertex_count(), i, j));
    const ConstraintScan scan =
        scan_redundant_constraints(constraints, Basis{face}, tol.rank_cut);
    std::pair<std::vector<std::pair<int, int>>, std::vector<std::pair<int, int>>> out;
    for (int k : scan.kept) out.first.push_back(f.graph.edges[k]);
    for (int k : scan.redundant) out.second.push_back(f.graph.edges[k]);
    return out;
}

/// Factors a PSD matrix with zero row sums into a centered configuration:
/// rows of the result are coordinates with Q Q^T = B and dim = rank B.
inline Framework realize(const SymMatrix& b, const Graph& g, const Tolerances& tol = {}) {
    if (b.order() != g.n) throw ShapeError("realize: order does not match graph");
    double row_worst = 0.0;
    for (int i = 0; i < b.order(); ++i) {
        double row = 0.0;
        for (int j = 0; j < b.order(); ++j) row += b(i, j);
        row_worst = std::max(row_worst, std::fabs(row));
    }
    if (row_worst > 1e-6 * std::max(1.0, b.frobenius_norm())) {
        throw DomainError("realize: row sums do not vanish");
    }
    const SpectralDecomp d = spectral(b);
    const double scale = detail::eig_scale(d.eigenvalues);
    if (d.eigenvalues.back() < -tol.psd_slack * scale) {
        throw DomainError("realize: matrix is not PSD");
    }
    std::vector<int> keep;
    for (int k = 0; k < b.order(); ++k)
        if (d.eigenvalues[k] > tol.rank_cut * scale) keep.push_back(k);

    Matrix q(b.order(), static_cast<int>(keep.size()));
    for (int c = 0; c < static_cast<int>(keep.size()); ++c) {
        const double w = std::sqrt(d.eigenvalues[keep[c]]);
        for (int i = 0; i < b.order(); ++i) q(i, c) = w * d.eigenvectors(i, keep[c]);
    }
    // Snap the centering exactly; the column means are already ~0.
    for (int c = 0; c < q.cols(); ++c) {
        double mean = 0.0;
        for (int i = 0; i < q.rows(); ++i) mean += q(i, c);
        mean /= q.rows();
        for (int i = 0; i < q.rows(); ++i) q(i, c) -= mean;
    }
    Framework out;
    out.graph = g;
    out.dim = q.cols();
    out.config = std::move(q);
    return out;
}

/// Dimension of the space of symmetric matrices Phi with
/// (p_i - p_j)^T Phi (p_i - p_j) = 0 on every edge. A nonzero Phi scales to
/// A^T A - I of a nonsingular affine map preserving all edge lengths, so a
/// positive dimension is exactly the existence of a non-congruent affine
/// image.
inline int affine_flex_kernel_dim(const Framework& f, const Tolerances& tol = {}) {
    const int r = f.dim;
    if (r == 0) return 0;
    const int unknowns = r * (r + 1) / 2;
    Matrix system(f.graph.edge_count(), unknowns);
    for (int e = 0; e < f.graph.edge_count(); ++e) {
        const auto [i, j] = f.graph.edges[e];
        int col = 0;
        for (int k = 0; k < r; ++k) {
            for (int l = k; l < r; ++l, ++col) {
                const double dk = f.config(i, k) - f.config(j, k);
                const double dl = f.config(i, l) - f.config(j, l);
                system(e, col) = (k == l ? 1.0 : 2.0) * dk * dl;
            }
        }
    }
    return stacked_nullspace({system}, tol).cols();
}

inline bool affine_flex_exists(const Framework& f, const Tolerances& tol = {}) {
    return affine_flex_kernel_dim(f, tol) >= 1;
}

namespace detail {

inline Matrix ones_row(int n) {
    Matrix e(1, n);
    for (int j = 0; j < n; ++j) e(0, j) = 1.0;
    return e;
}

/// Re-expresses an engine chain over the faces [P rho_j], following the
/// kernel recursion rho_{j+1} = rho_j xi_j. Throws UndecidedError if the
/// re-expression drifts from the engine faces.
inline RigidityCertificate reexpress_chain(const Framework& f, const ReductionChain& chain,
                                           const Tolerances& tol) {
    RigidityCertificate cert;
    cert.n = f.vertex_count();
    cert.r = f.dim;
    if (chain.steps.empty()) {
        throw UndecidedError("cannot re-express an empty chain", 0.0, 0.0);
    }

    const SymMatrix& omega0 = chain.steps.front().omega;
    if (!is_psd(omega0, tol)) {
        throw UndecidedError("first exposing matrix is not PSD in full space", 0.0, 0.0);
    }
    cert.omega0 = omega0;
    cert.ledger.push_back(chain.steps.front().rank_contrib);

    const int k = static_cast<int>(chain.steps.size()) - 1;
    if (k == 0) return cert;

    Matrix rho = stacked_nullspace(
                     {omega0.as_matrix(), f.config.transpose(), ones_row(cert.n)}, tol)
                     .m;
    for (int j = 1; j <= k; ++j) {
        const ReductionStep& st = chain.steps[j];
        const Matrix u_paper = hcat(f.config, rho);
        // The engine face and [P rho_j] must have the same range.
        const Basis& u_engine = st.u_before;
        if (u_paper.cols() != u_engine.cols()) {
            throw UndecidedError("face width mismatch while re-expressing the chain", 0.0, 0.0);
        }
        const Matrix proj = u_engine.m * (u_engine.m.transpose() * u_paper);
        if ((proj - u_paper).frobenius_norm() > 1e-6 * std::max(1.0, u_paper.frobenius_norm())) {
            throw UndecidedError("face drift while re-expressing the chain", 0.0, 0.0);
        }

        CertStep step;
        step.omega = st.omega;
        step.rho = rho;
        step.rank_contrib = st.rank_contrib;
        for (int idx : st.redundant_constraints)
            step.forced_zero_edges.push_back(f.graph.edges[idx]);

        const SymMatrix reduced(rho.transpose() * st.omega.as_matrix() * rho);
        if (rank_of(reduced, tol) != st.rank_contrib) {
            throw UndecidedError("rank mismatch while re-expressing the chain", 0.0, 0.0);
        }
        if (j < k) {
            const Basis xi = nullspace(reduced, tol);
            step.xi = xi.m;
            rho = rho * xi.m;
        }
        cert.ledger.push_back(st.rank_contrib);
        cert.steps.push_back(std::move(step));
    }
    return cert;
}

}  // namespace detail

/// Independent deterministic check of a dimensional-rigidity certificate
/// against a framework. Never searches; rejects with the first failed
/// condition named.
inline VerifyResult verify_certificate(const Framework& f, const RigidityCertificate& cert,
                                       const Tolerances& tol = {}) {
    const int n = f.vertex_count();
    const int r = f.dim;
    if (cert.n != n || cert.r != r) {
        return VerifyResult::reject("malformed: certificate dimensions do not match framework");
    }
    if (cert.trivial()) {
        if (r == n - 1) return VerifyResult::accept();
        return VerifyResult::reject("trivial certificate only valid for full-span frameworks");
    }
    if (r > n - 2) {
        return VerifyResult::reject("malformed: nontrivial certificate for full-span framework");
    }
    if (cert.ledger.size() != cert.steps.size() + 1) {
        return VerifyResult::reject("malformed: ledger length");
    }

    const SymMatrix& omega0 = *cert.omega0;
    if (omega0.order() != n) return VerifyResult::reject("malformed: omega0 order");

    // Omega^0 must be a nonzero PSD stress matrix.
    if (!is_quasi_stress(omega0, f, tol)) {
        return VerifyResult::reject("omega0 violates the quasi-stress conditions");
    }
    if (!is_psd(omega0, tol)) return VerifyResult::reject("omega0 not PSD");
    const double omega0_p =
        (omega0.as_matrix() * f.config).frobenius_norm();
    if (omega0_p > tol.feas_residual * std::max(1.0, omega0.frobenius_norm()) *
                       std::max(1.0, f.config.frobenius_norm())) {
        return VerifyResult::reject("omega0 does not annihilate the configuration");
    }
    const int rank0 = rank_of(omega0, tol);
    if (rank0 < 1) return VerifyResult::reject("omega0 vanishes");
    if (rank0 != cert.ledger[0]) return VerifyResult::reject("ledger entry 0 is wrong");

    const int k = static_cast<int>(cert.steps.size());
    Matrix rho_expected;
    if (k > 0) {
        const Basis rho1 = stacked_nullspace(
            {omega0.as_matrix(), f.config.transpose(), detail::ones_row(n)}, tol);
        const CertStep& first = cert.steps.front();
        if (first.rho.rows() != n || first.rho.cols() != rho1.cols()) {
            return VerifyResult::reject("rho_1 has the wrong dimensions");
        }
        const Matrix stack = vcat(vcat(omega0.as_matrix(), f.config.transpose()),
                                  detail::ones_row(n));
        if ((stack * first.rho).frobenius_norm() >
            tol.feas_residual * std::max(1.0, first.rho.frobenius_norm()) *
                std::max(1.0, stack.frobenius_norm())) {
            return VerifyResult::reject("rho_1 is not in the kernel of [omega0; P^T; e^T]");
        }
        if (rank_of(SymMatrix(first.rho.transpose() * first.rho), tol) != first.rho.cols()) {
            return VerifyResult::reject("rho_1 is column-rank deficient");
        }
        rho_expected = first.rho;
    }

    for (int j = 0; j < k; ++j) {
        const CertStep& st = cert.steps[j];
        const std::string tag = "step " + std::to_string(j + 1);
        if (st.omega.order() != n || st.rho.rows() != n) {
            return VerifyResult::reject("malformed: " + tag + " dimensions");
        }
        if ((st.rho - rho_expected).frobenius_norm() >
            1e-8 * std::max(1.0, rho_expected.frobenius_norm())) {
            return VerifyResult::reject(tag + ": rho does not follow the kernel recursion");
        }
        if (!is_quasi_stress(st.omega, f, tol)) {
            return VerifyResult::reject(tag + ": omega violates the quasi-stress conditions");
        }
        for (auto [a, b] : st.forced_zero_edges) {
            if (!f.graph.has_edge(a, b)) {
                return VerifyResult::reject(tag + ": forced-zero entry is not an edge");
            }
            if (std::fabs(st.omega(a, b)) > 1e-12 * std::max(1.0, st.omega.max_abs())) {
                return VerifyResult::reject(tag + ": forced-zero stress entry is nonzero");
            }
        }

        const Matrix u = hcat(f.config, st.rho);
        const SymMatrix block(u.transpose() * st.omega.as_matrix() * u);
        if (!is_psd(block, tol)) return VerifyResult::reject(tag + ": reduced block not PSD");
        const int rank_red = rank_of(block, tol);
        if (rank_red < 1) return VerifyResult::reject(tag + ": reduced block vanishes");
        if (rank_red != cert.ledger[j + 1]) {
            return VerifyResult::reject(tag + ": ledger entry is wrong");
        }

        const Matrix cross = f.config.transpose() * st.omega.as_matrix() * st.rho;
        if (cross.frobenius_norm() >
            tol.feas_residual * std::max(1.0, st.omega.frobenius_norm()) *
                std::max(1.0, f.config.frobenius_norm()) *
                std::max(1.0, st.rho.frobenius_norm())) {
            return VerifyResult::reject(tag + ": configuration-rho orthogonality fails");
        }

        if (j + 1 < k) {
            if (!st.xi.has_value()) return VerifyResult::reject(tag + ": missing xi");
            const SymMatrix rr(st.rho.transpose() * st.omega.as_matrix() * st.rho);
            const Basis ker = nullspace(rr, tol);
            if (st.xi->cols() != ker.cols() || st.xi->rows() != st.rho.cols()) {
                return VerifyResult::reject(tag + ": xi has the wrong dimensions");
            }
            if ((rr.as_matrix() * *st.xi).frobenius_norm() >
                1e-7 * std::max(1.0, rr.frobenius_norm()) *
                    std::max(1.0, st.xi->frobenius_norm())) {
                return VerifyResult::reject(tag + ": xi is not in the kernel of rho^T omega rho");
            }
            if (rank_of(SymMatrix(st.xi->transpose() * *st.xi), tol) != st.xi->cols()) {
                return VerifyResult::reject(tag + ": xi is column-rank deficient");
            }
            rho_expected = st.rho * *st.xi;
        }
    }

    if (cert.ledger_sum() != n - r - 1) {
        return VerifyResult::reject("ledger does not sum to n - r - 1");
    }
    return VerifyResult::accept();
}

/// Decides dimensional rigidity. Full-span inputs (r = n-1) short-circuit to
/// rigid: the centering constraint caps every feasible rank at n-1. All other
/// inputs run the facial-reduction engine on the Gram spectrahedron with the
/// framework's own Gram matrix as the feasible reference point.
inline RigidityOutcome check_dimensional_rigidity(const Framework& f, std::uint64_t seed,
                                                  const Tolerances& tol = {},
                                                  const EngineOptions& opts = {}) {
    RigidityOutcome out;
    const int n = f.vertex_count();
    const int r = f.dim;

    if (r >= n - 1) {
        RigidityCertificate cert;
        cert.n = n;
        cert.r = r;
        cert.note =
            "full affine span: no equivalent framework can exceed rank n-1, rigid by centering";
        out.verdict = Verdict::Rigid;
        out.certificate = std::move(cert);
        return out;
    }

    const SpectrahedronSpec spec = build_spec(f);
    FeasiblePoint x_star;
    x_star.matrix = gram(f);
    x_star.rank = r;
    x_star.residuals.assign(spec.constraint_count(), 0.0);

    try {
        ReduceResult res = reduce(spec, x_star, seed, tol, opts);
        if (std::holds_alternative<MaxRankWitness>(res)) {
            FeasiblePoint& w = std::get<MaxRankWitness>(res).point;
            out.witness = realize(w.matrix, f.graph, tol);
            out.witness_gram = w.matrix;
            out.verdict = Verdict::Flexible;
            return out;
        }
        ReductionChain& chain = std::get<ReductionChain>(res);
        RigidityCertificate cert = detail::reexpress_chain(f, chain, tol);
        const VerifyResult check = verify_certificate(f, cert, tol);
        if (!check.accepted) {
            out.verdict = Verdict::Undecided;
            out.diagnostics = "solver certificate failed verification: " + check.reason;
            return out;
        }
        out.verdict = Verdict::Rigid;
        out.certificate = std::move(cert);
        out.chain = std::move(chain);
        return out;
    } catch (const UndecidedError& e) {
        out.verdict = Verdict::Undecided;
        out.diagnostics = e.what();
        return out;
    } catch (const InfeasibleError& e) {
        out.verdict = Verdict::Undecided;
        out.diagnostics = e.what();
        return out;
    }
}

/// Universal rigidity = dimensional rigidity + no nontrivial affine flex.
struct UniversalRigidityReport {
    bool universally_rigid = false;
    int flex_kernel_dim = 0;
    RigidityOutcome dimensional;
};

inline UniversalRigidityReport check_universal_rigidity(const Framework& f, std::uint64_t seed,
                                                        const Tolerances& tol = {},
                                                        const EngineOptions& opts = {}) {
    UniversalRigidityReport rep;
    rep.dimensional = check_dimensional_rigidity(f, seed, tol, opts);
    rep.flex_kernel_dim = affine_flex_kernel_dim(f, tol);
    rep.universally_rigid =
        rep.dimensional.verdict == Verdict::Rigid && rep.flex_kernel_dim == 0;
    return rep;
}

}  // namespace rigidcert
