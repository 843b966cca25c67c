#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rigidcert/detail/alternating.hpp"
#include "rigidcert/symmat.hpp"

// Rank-constrained Farkas engine over a spectrahedron
//   F = { X PSD : <A_i, X> = b_i } contained in face(U_0 U_0^T).
//
// Given a feasible X* of rank r, exactly one of two things exists:
//   1. a feasible point of rank >= r+1, or
//   2. a chain of exposing matrices Omega^j = sum_i x_i^j A_i with
//      U_j^T Omega^j U_j PSD nonzero, tr(Omega^j X*) <= 0, and per-step rank
//      contributions summing to cols(U_0) - r, where U_{j+1} = U_j W_j and
//      W_j spans the kernel of U_j^T Omega^j U_j.
// reduce() produces one of the two; verify_chain() re-checks a chain with
// deterministic linear algebra only.

namespace rigidcert {

/// Feasible-set descriptor: constraint matrices, right-hand side, and the
/// face of the PSD cone known to contain the feasible set.
struct SpectrahedronSpec {
    int order = 0;
    std::vector<SymMatrix> constraints;
    std::vector<double> rhs;
    Basis initial_face;

    SpectrahedronSpec() = default;

    SpectrahedronSpec(int n, std::vector<SymMatrix> a, std::vector<double> b)
        : SpectrahedronSpec(n, std::move(a), std::move(b), Basis::identity(n)) {}

    SpectrahedronSpec(int n, std::vector<SymMatrix> a, std::vector<double> b, Basis face)
        : order(n), constraints(std::move(a)), rhs(std::move(b)), initial_face(std::move(face)) {
        if (constraints.empty()) throw ShapeError("spectrahedron needs at least one constraint");
        if (constraints.size() != rhs.size()) throw ShapeError("constraint/rhs count mismatch");
        double bnorm = 0.0;
        for (double v : rhs) bnorm += v * v;
        if (bnorm == 0.0) throw DomainError("right-hand side must be nonzero");
        for (const SymMatrix& m : constraints)
            if (m.order() != order) throw ShapeError("constraint order mismatch");
        if (initial_face.rows() != order) throw ShapeError("initial face row mismatch");
    }

    int constraint_count() const { return static_cast<int>(constraints.size()); }
};

/// A PSD matrix satisfying the affine constraints, with its numerical rank
/// and per-constraint residuals.
struct FeasiblePoint {
    SymMatrix matrix;
    int rank = 0;
    std::vector<double> residuals;

    double worst_residual() const {
        double w = 0.0;
        for (double r : residuals) w = std::max(w, std::fabs(r));
        return w;
    }
};

/// Exposing matrix in the constraint span, restricted to the current face.
struct Exposing {
    SymMatrix omega;              // order-n combination of the A_i
    std::vector<double> coeffs;   // full-length coefficient vector
    SymMatrix reduced;            // U^T omega U
    int rank = 0;                 // rank of the reduced block
};

/// One facial-reduction step.
struct ReductionStep {
    SymMatrix omega;
    std::vector<double> coeffs;
    Basis u_before;
    Basis w;
    int rank_contrib = 0;
    std::vector<int> kept_constraints;
    std::vector<int> redundant_constraints;
};

/// The full certificate of the no-higher-rank alternative.
struct ReductionChain {
    std::vector<ReductionStep> steps;
    Basis final_face;
    std::vector<int> rank_ledger;

    int ledger_sum() const {
        int s = 0;
        for (int v : rank_ledger) s += v;
        return s;
    }
};

/// A feasible point whose rank exceeds the reference rank: the constructive
/// witness of the higher-rank alternative.
struct MaxRankWitness {
    FeasiblePoint point;
};

using ReduceResult = std::variant<MaxRankWitness, ReductionChain>;

struct EngineOptions {
    int starts = 16;
    detail::ApOptions ap = {};
};

/// Greedy split of constraint indices at a face: a constraint is redundant
/// when its face-restricted matrix lies in the span of the kept predecessors.
struct ConstraintScan {
    std::vector<int> kept;
    std::vector<int> redundant;
};

inline ConstraintScan scan_redundant_constraints(const std::vector<SymMatrix>& constraints,
                                                 const Basis& u, double rel_tol = 1e-9) {
    ConstraintScan out;
    std::vector<SymMatrix> ortho;  // orthonormalized kept directions
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        SymMatrix red(u.m.transpose() * constraints[i].as_matrix() * u.m);
        const double norm0 = red.frobenius_norm();
        if (norm0 <= 1e-14) {
            out.redundant.push_back(static_cast<int>(i));
            continue;
        }
        Matrix resid = red.as_matrix();
        for (const SymMatrix& q : ortho) {
            const double c = inner(SymMatrix(resid), q);
            resid = resid - c * q.as_matrix();
        }
        const double norm1 = resid.frobenius_norm();
        if (norm1 > rel_tol * norm0) {
            out.kept.push_back(static_cast<int>(i));
            ortho.emplace_back((1.0 / norm1) * resid);
        } else {
            out.redundant.push_back(static_cast<int>(i));
        }
    }
    return out;
}

namespace detail {

inline std::vector<SymMatrix> reduce_constraints(const std::vector<SymMatrix>& constraints,
                                                 const Basis& u) {
    std::vector<SymMatrix> out;
    out.reserve(constraints.size());
    for (const SymMatrix& a : constraints)
        out.emplace_back(u.m.transpose() * a.as_matrix() * u.m);
    return out;
}

struct FarkasAlternative {
    std::optional<Exposing> exposing;
    std::optional<SymMatrix> reduced_interior;  // PD feasible point in face coordinates
    ConstraintScan scan;
};

/// One application of the semidefinite theorem of the alternative at face U:
/// searches the dual coefficient space for an exposing matrix; failing that,
/// searches the primal reduced feasible set for a positive-definite point.
inline FarkasAlternative farkas_step(const SpectrahedronSpec& spec, const Basis& u,
                                     std::uint64_t seed, const Tolerances& tol,
                                     const EngineOptions& opts) {
    FarkasAlternative out;
    const int s = u.cols();
    out.scan = scan_redundant_constraints(spec.constraints, u, tol.rank_cut);
    if (out.scan.kept.empty()) {
        throw DomainError("all constraints vanish on the current face");
    }

    std::vector<SymMatrix> basis;
    std::vector<double> b_kept;
    basis.reserve(out.scan.kept.size());
    for (int i : out.scan.kept) {
        basis.emplace_back(u.m.transpose() * spec.constraints[i].as_matrix() * u.m);
        b_kept.push_back(spec.rhs[i]);
    }
    const int d = static_cast<int>(basis.size());

    // Dual search: M(x) PSD, tr M(x) = 1, x.b = 0. The trace condition keeps
    // the candidate away from zero; x.b = 0 is tr(Omega X*) = 0 for feasible
    // X*, which the PSD structure forces anyway.
    Matrix eq(2, d);
    for (int k = 0; k < d; ++k) {
        eq(0, k) = basis[k].trace();
        eq(1, k) = b_kept[k];
    }
    const std::vector<double> eq_rhs{1.0, 0.0};
    const SpanProjector dual(basis, eq, eq_rhs);

    double best_gap = 1e300;
    std::vector<std::vector<double>> found;
    for (int st = 0; st < opts.starts; ++st) {
        Rng rng(derive_seed(seed, {0x6578706fu, static_cast<std::uint64_t>(st)}));
        std::vector<double> x0(d);
        for (double& v : x0) v = rng.gaussian();
        const SpanApResult res = span_psd_ap(dual, x0, opts.ap);
        best_gap = std::min(best_gap, res.gap);
        if (const auto cand = exactify_span_candidate(dual, res.x, tol)) {
            found.push_back(*cand);
        }
    }

    if (!found.empty()) {
        std::vector<double> mean(d, 0.0);
        for (const auto& x : found)
            for (int k = 0; k < d; ++k) mean[k] += x[k] / static_cast<double>(found.size());
        if (const auto crisp = exactify_span_candidate(dual, mean, tol)) mean = *crisp;

        Exposing ex;
        ex.coeffs.assign(spec.constraints.size(), 0.0);
        for (int k = 0; k < d; ++k) ex.coeffs[out.scan.kept[k]] = mean[k];
        Matrix full(spec.order, spec.order);
        for (int k = 0; k < d; ++k)
            full = full + mean[k] * spec.constraints[out.scan.kept[k]].as_matrix();
        ex.omega = SymMatrix(full);
        ex.reduced = combine(basis, mean);
        ex.rank = rank_of(ex.reduced, tol);
        if (ex.rank >= 1 && is_psd(ex.reduced, tol)) {
            out.exposing = std::move(ex);
            return out;
        }
    }

    // Primal search: a positive-definite feasible point in face coordinates
    // certifies that no exposing matrix exists.
    const AffineProjector primal(basis, b_kept);
    double bscale = 0.0;
    for (double v : b_kept) bscale = std::max(bscale, std::fabs(v));
    bscale = std::max(1.0, bscale);

    double best_res = 1e300;
    std::vector<SymMatrix> points;
    for (int st = 0; st < opts.starts; ++st) {
        Rng rng(derive_seed(seed, {0x696e7472u, static_cast<std::uint64_t>(st)}));
        Matrix m0(s, s);
        for (int i = 0; i < s; ++i)
            for (int j = i; j < s; ++j) {
                m0(i, j) = bscale * rng.gaussian();
                m0(j, i) = m0(i, j);
            }
        const AffineApResult res = affine_psd_ap(primal, SymMatrix(m0), opts.ap);
        best_res = std::min(best_res, res.gap);
        if (const auto cand = exactify_affine_candidate(primal, res.m, tol)) {
            points.push_back(*cand);
        }
    }

    if (!points.empty()) {
        Matrix acc(s, s);
        for (const SymMatrix& p : points)
            acc = acc + (1.0 / static_cast<double>(points.size())) * p.as_matrix();
        SymMatrix avg(acc);
        if (auto polished = exactify_affine_candidate(primal, avg, tol)) avg = *polished;
        // The kept constraints drive the search; acceptance re-checks the
        // full constraint set, redundant ones included.
        bool fully_feasible = rank_of(avg, tol) == s && is_psd(avg, tol);
        if (fully_feasible) {
            const std::vector<SymMatrix> all_reduced = reduce_constraints(spec.constraints, u);
            for (std::size_t i = 0; i < all_reduced.size() && fully_feasible; ++i) {
                const double res_i = inner(all_reduced[i], avg) - spec.rhs[i];
                if (std::fabs(res_i) >
                    tol.feas_residual * std::max(1.0, std::fabs(spec.rhs[i]))) {
                    fully_feasible = false;
                }
            }
        }
        if (fully_feasible) {
            out.reduced_interior = std::move(avg);
            return out;
        }
    }

    throw UndecidedError("neither an exposing matrix nor an interior point certified", best_gap,
                         best_res);
}

}  // namespace detail

/// Highest-rank feasible point found by seeded alternating projections with
/// relative-interior averaging. Throws InfeasibleError when no run converges.
inline FeasiblePoint feasible_interior_point(const SpectrahedronSpec& spec, std::uint64_t seed,
                                             const Tolerances& tol = {},
                                             const EngineOptions& opts = {}) {
    const Basis& u = spec.initial_face;
    const int s = u.cols();
    const std::vector<SymMatrix> reduced = detail::reduce_constraints(spec.constraints, u);
    const detail::AffineProjector proj(reduced, spec.rhs);

    double bscale = 0.0;
    for (double v : spec.rhs) bscale = std::max(bscale, std::fabs(v));
    bscale = std::max(1.0, bscale);

    double best_gap = 1e300;
    std::vector<SymMatrix> points;
    for (int st = 0; st < opts.starts; ++st) {
        Rng rng(derive_seed(seed, {0x66656173u, static_cast<std::uint64_t>(st)}));
        Matrix m0(s, s);
        for (int i = 0; i < s; ++i)
            for (int j = i; j < s; ++j) {
                m0(i, j) = bscale * rng.gaussian();
                m0(j, i) = m0(i, j);
            }
        const detail::AffineApResult res = detail::affine_psd_ap(proj, SymMatrix(m0), opts.ap);
        best_gap = std::min(best_gap, res.gap);
        if (const auto cand = detail::exactify_affine_candidate(proj, res.m, tol)) {
            points.push_back(*cand);
        }
    }
    if (points.empty()) {
        throw InfeasibleError("no feasible point found within the iteration budget", best_gap);
    }

    Matrix acc(s, s);
    for (const SymMatrix& p : points)
        acc = acc + (1.0 / static_cast<double>(points.size())) * p.as_matrix();
    SymMatrix avg(acc);
    if (auto polished = detail::exactify_affine_candidate(proj, avg, tol)) {
        avg = *polished;
    }

    FeasiblePoint out;
    out.matrix = SymMatrix(u.m * avg.as_matrix() * u.m.transpose());
    out.rank = rank_of(out.matrix, tol);
    out.residuals.resize(spec.constraints.size());
    for (std::size_t i = 0; i < spec.constraints.size(); ++i)
        out.residuals[i] = inner(spec.constraints[i], out.matrix) - spec.rhs[i];
    return out;
}

/// Exposing matrix for the feasible set restricted to face(U U^T), of maximal
/// observed reduced rank, or nothing when a positive-definite reduced
/// feasible point exists. Throws UndecidedError when neither is certified.
inline std::optional<Exposing> find_exposing(const SpectrahedronSpec& spec, const Basis& u,
                                             const FeasiblePoint& /*x_star*/, std::uint64_t seed,
                                             const Tolerances& tol = {},
                                             const EngineOptions& opts = {}) {
    detail::FarkasAlternative alt = detail::farkas_step(spec, u, seed, tol, opts);
    if (alt.exposing) return alt.exposing;
    return std::nullopt;
}

/// Next face U W where W spans the kernel of U^T Omega U. The kernel is empty
/// when the reduced block is positive definite; the result is then the empty
/// basis (the face collapses to the origin).
inline Basis reduce_step(const SpectrahedronSpec& /*spec*/, const Basis& u, const SymMatrix& omega,
                         const Tolerances& tol = {}) {
    const SymMatrix reduced(u.m.transpose() * omega.as_matrix() * u.m);
    if (reduced.frobenius_norm() <= 1e-14 * std::max(1.0, omega.frobenius_norm())) {
        throw DomainError("reduce_step: reduced matrix is zero");
    }
    if (!is_psd(reduced, tol)) {
        throw DomainError("reduce_step: reduced matrix is not PSD");
    }
    const Basis w = nullspace(reduced, tol);
    return Basis{u.m * w.m};
}

/// Runs the facial-reduction loop from the spec's initial face down to the
/// face of X*. Returns either a higher-rank feasible witness or the full
/// reduction chain. Throws UndecidedError when a step cannot be certified.
inline ReduceResult reduce(const SpectrahedronSpec& spec, const FeasiblePoint& x_star,
                           std::uint64_t seed, const Tolerances& tol = {},
                           const EngineOptions& opts = {}) {
    const int r = x_star.rank;
    Basis u = spec.initial_face;
    ReductionChain chain;

    int step_index = 0;
    while (u.cols() > r) {
        if (step_index > spec.initial_face.cols() + 1) {
            throw UndecidedError("facial reduction failed to terminate", 0.0, 0.0);
        }
        detail::FarkasAlternative alt = detail::farkas_step(
            spec, u, derive_seed(seed, {0x73746570u, static_cast<std::uint64_t>(step_index)}), tol,
            opts);

        if (alt.reduced_interior) {
            FeasiblePoint witness;
            witness.matrix =
                SymMatrix(u.m * alt.reduced_interior->as_matrix() * u.m.transpose());
            witness.rank = rank_of(witness.matrix, tol);
            witness.residuals.resize(spec.constraints.size());
            for (std::size_t i = 0; i < spec.constraints.size(); ++i)
                witness.residuals[i] = inner(spec.constraints[i], witness.matrix) - spec.rhs[i];
            if (witness.rank <= r) {
                throw UndecidedError("interior point does not exceed the reference rank", 0.0,
                                     witness.worst_residual());
            }
            double rhs_scale = 1.0;
            for (double v : spec.rhs) rhs_scale = std::max(rhs_scale, std::fabs(v));
            if (witness.worst_residual() > tol.feas_residual * rhs_scale) {
                throw UndecidedError("witness candidate violates the constraints", 0.0,
                                     witness.worst_residual());
            }
            return MaxRankWitness{std::move(witness)};
        }

        Exposing& ex = *alt.exposing;
        const Basis w = nullspace(ex.reduced, tol);
        const int contrib = u.cols() - w.cols();
        if (contrib < 1) {
            throw UndecidedError("exposing step produced no rank reduction", 0.0, 0.0);
        }
        ReductionStep step;
        step.omega = std::move(ex.omega);
        step.coeffs = std::move(ex.coeffs);
        step.u_before = u;
        step.w = w;
        step.rank_contrib = contrib;
        step.kept_constraints = std::move(alt.scan.kept);
        step.redundant_constraints = std::move(alt.scan.redundant);
        chain.rank_ledger.push_back(contrib);
        u = Basis{u.m * w.m};
        chain.steps.push_back(std::move(step));
        ++step_index;
    }

    // Anti-drift: the final face must coincide with the face of X*.
    const Basis face_x = face_from(x_star.matrix, tol);
    const Matrix proj_u = u.m * u.m.transpose();
    const Matrix proj_x = face_x.m * face_x.m.transpose();
    if (u.cols() != face_x.cols() ||
        (proj_u - proj_x).frobenius_norm() > 1e4 * tol.rank_cut * spec.order) {
        throw UndecidedError("final face drifted away from the face of the feasible point",
                             (proj_u - proj_x).frobenius_norm(), 0.0);
    }
    chain.final_face = std::move(u);
    return chain;
}

struct VerifyResult {
    bool accepted = false;
    std::string reason;  // empty on accept

    static VerifyResult accept() { return {true, ""}; }
    static VerifyResult reject(std::string why) { return {false, std::move(why)}; }
};

/// Deterministic re-check of a reduction chain: span membership of every
/// omega, PSD and nonzero reduced blocks, non-positive traces against X*,
/// kernel property of every W, face chaining, and the ledger sum. No search.
inline VerifyResult verify_chain(const SpectrahedronSpec& spec, const FeasiblePoint& x_star,
                                 const ReductionChain& chain, const Tolerances& tol = {}) {
    const int n = spec.order;
    const int s = spec.initial_face.cols();

    if (chain.rank_ledger.size() != chain.steps.size()) {
        return VerifyResult::reject("malformed: ledger length differs from step count");
    }
    for (const ReductionStep& st : chain.steps) {
        if (st.omega.order() != n || st.u_before.rows() != n || st.w.rows() != st.u_before.cols() ||
            static_cast<int>(st.coeffs.size()) != spec.constraint_count()) {
            return VerifyResult::reject("malformed: inconsistent dimensions");
        }
    }
    if (!chain.steps.empty() && chain.final_face.rows() != n) {
        return VerifyResult::reject("malformed: final face row count");
    }

    // X* must itself be a feasible point of the claimed face.
    if (!is_psd(x_star.matrix, tol)) return VerifyResult::reject("reference point not PSD");
    const double xnorm = std::max(1.0, x_star.matrix.frobenius_norm());
    for (int i = 0; i < spec.constraint_count(); ++i) {
        const double res = inner(spec.constraints[i], x_star.matrix) - spec.rhs[i];
        if (std::fabs(res) > tol.feas_residual * std::max(1.0, std::fabs(spec.rhs[i]))) {
            return VerifyResult::reject("reference point infeasible");
        }
    }
    const int r = rank_of(x_star.matrix, tol);

    Basis u = spec.initial_face;
    for (std::size_t j = 0; j < chain.steps.size(); ++j) {
        const ReductionStep& st = chain.steps[j];
        const std::string tag = "step " + std::to_string(j);

        if ((st.u_before.m - u.m).frobenius_norm() > 1e-8 * std::max(1.0, u.m.frobenius_norm())) {
            return VerifyResult::reject(tag + ": face does not chain from the previous step");
        }

        // Span membership against the stored coefficients.
        Matrix combo(n, n);
        for (int i = 0; i < spec.constraint_count(); ++i) {
            if (st.coeffs[i] == 0.0) continue;
            combo = combo + st.coeffs[i] * spec.constraints[i].as_matrix();
        }
        const double span_defect = (combo - st.omega.as_matrix()).frobenius_norm();
        if (span_defect > tol.feas_residual * std::max(1.0, st.omega.frobenius_norm())) {
            return VerifyResult::reject(tag + ": omega is not the stated constraint combination");
        }

        const SymMatrix reduced(u.m.transpose() * st.omega.as_matrix() * u.m);
        if (!is_psd(reduced, tol)) {
            return VerifyResult::reject(tag + ": reduced block not PSD");
        }
        const int rank_red = rank_of(reduced, tol);
        if (rank_red < 1) {
            return VerifyResult::reject(tag + ": reduced block vanishes");
        }
        if (rank_red != st.rank_contrib || chain.rank_ledger[j] != st.rank_contrib) {
            return VerifyResult::reject(tag + ": recorded rank contribution is wrong");
        }

        const double trace_against = inner(st.omega, x_star.matrix);
        if (trace_against > tol.feas_residual *
                                std::max(1.0, st.omega.frobenius_norm() * xnorm)) {
            return VerifyResult::reject(tag + ": positive trace against the reference point");
        }

        if (orthonormality_defect(st.w.m) > 1e-8) {
            return VerifyResult::reject(tag + ": W columns not orthonormal");
        }
        if (st.w.cols() != u.cols() - rank_red) {
            return VerifyResult::reject(tag + ": W does not span the whole kernel");
        }
        const double kernel_defect = (reduced.as_matrix() * st.w.m).frobenius_norm();
        if (kernel_defect > 1e-7 * std::max(1.0, reduced.frobenius_norm())) {
            return VerifyResult::reject(tag + ": W is not in the kernel of the reduced block");
        }

        u = Basis{u.m * st.w.m};
    }

    if (!chain.steps.empty() &&
        (chain.final_face.m - u.m).frobenius_norm() > 1e-8 * std::max(1.0, u.m.frobenius_norm())) {
        return VerifyResult::reject("final face does not equal the chained product");
    }
    if (chain.ledger_sum() != s - r) {
        return VerifyResult::reject("ledger sum does not equal cols(U0) - rank(X*)");
    }
    return VerifyResult::accept();
}

}  // namespace rigidcert
