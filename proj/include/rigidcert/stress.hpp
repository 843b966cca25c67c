#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rigidcert/detail/alternating.hpp"
#include "rigidcert/framework.hpp"

namespace rigidcert {

/// Per-edge stress weights, in graph edge order.
struct StressVector {
    std::vector<double> weights;
};

/// Stress matrix together with the edge weights it was assembled from.
struct StressMatrix {
    SymMatrix matrix;
    StressVector source;
};

/// Max over vertices of || sum_j w_ij (p_i - p_j) ||, the equilibrium defect.
inline double equilibrium_residual(const StressVector& w, const Framework& f) {
    const int n = f.vertex_count();
    const int r = f.config.cols();
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        std::vector<double> acc(r, 0.0);
        for (std::size_t e = 0; e < f.graph.edges.size(); ++e) {
            const auto [a, b] = f.graph.edges[e];
            if (a != i && b != i) continue;
            const int other = (a == i) ? b : a;
            for (int c = 0; c < r; ++c) acc[c] += w.weights[e] * (f.config(i, c) - f.config(other, c));
        }
        worst = std::max(worst, std::sqrt(dot(acc, acc)));
    }
    return worst;
}

/// Builds the stress matrix: -w_ij on edges, 0 on non-edges, and each
/// diagonal entry the negated off-diagonal row sum so rows sum to zero by
/// construction.
inline StressMatrix assemble_stress(const StressVector& w, const Graph& g) {
    if (static_cast<int>(w.weights.size()) != g.edge_count()) {
        throw ShapeError("assemble_stress: weight count != edge count");
    }
    Matrix m(g.n, g.n);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        const auto [i, j] = g.edges[e];
        m(i, j) = -w.weights[e];
        m(j, i) = -w.weights[e];
    }
    for (int i = 0; i < g.n; ++i) {
        double row = 0.0;
        for (int j = 0; j < g.n; ++j)
            if (j != i) row += m(i, j);
        m(i, i) = -row;
    }
    return StressMatrix{SymMatrix(m), w};
}

/// Recovers edge weights from a matrix with the stress sparsity pattern
/// (inverse of assemble_stress).
inline StressVector stress_weights_of(const SymMatrix& omega, const Graph& g) {
    if (omega.order() != g.n) throw ShapeError("stress_weights_of: order mismatch");
    StressVector w;
    w.weights.reserve(g.edges.size());
    for (auto [i, j] : g.edges) w.weights.push_back(-omega(i, j));
    return w;
}

/// Orthonormal basis (as edge-weight vectors) of the equilibrium stress
/// space: the kernel of the n*dim x |E| system requiring the weighted bar
/// forces at every vertex to cancel.
inline std::vector<StressVector> stress_basis(const Framework& f, const Tolerances& tol = {}) {
    const int m = f.graph.edge_count();
    if (m == 0) return {};
    const int r = f.config.cols();
    Matrix eq(f.vertex_count() * std::max(r, 1), m);
    for (int e = 0; e < m; ++e) {
        const auto [i, j] = f.graph.edges[e];
        for (int c = 0; c < r; ++c) {
            eq(i * r + c, e) = f.config(i, c) - f.config(j, c);
            eq(j * r + c, e) = f.config(j, c) - f.config(i, c);
        }
    }
    const Basis kernel = stacked_nullspace({eq}, tol);
    std::vector<StressVector> out;
    out.reserve(kernel.cols());
    for (int k = 0; k < kernel.cols(); ++k) {
        StressVector sv;
        sv.weights.resize(m);
        for (int e = 0; e < m; ++e) sv.weights[e] = kernel.m(e, k);
        out.push_back(std::move(sv));
    }
    return out;
}

/// Quasi-stress test: P^T Omega P vanishes, the complement-graph sparsity
/// pattern holds, and rows sum to zero.
inline bool is_quasi_stress(const SymMatrix& omega, const Framework& f,
                            const Tolerances& tol = {}) {
    if (omega.order() != f.vertex_count()) throw ShapeError("is_quasi_stress: order mismatch");
    const double scale = std::max(1.0, omega.frobenius_norm());

    for (auto [i, j] : f.graph.non_edges()) {
        if (std::fabs(omega(i, j)) > 1e-12 * scale) return false;
    }

    const int n = omega.order();
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row += omega(i, j);
        if (std::fabs(row) > tol.feas_residual * scale) return false;
    }

    const Matrix ptop = f.config.transpose() * omega.as_matrix() * f.config;
    return ptop.frobenius_norm() <= tol.feas_residual * scale * std::max(1.0, f.config.frobenius_norm());
}

/// Searches the stress span for a PSD stress matrix of maximum rank:
/// alternating projections between the PSD cone and the trace-normalized
/// stress span from several seeded starts, then the average of every
/// convergent solution. A strict convex combination of PSD points can only
/// grow the rank, so the average attains the maximum over the found points.
inline std::optional<StressMatrix> max_rank_psd_stress(const Framework& f, std::uint64_t seed,
                                                       const Tolerances& tol = {},
                                                       int starts = 16) {
    const std::vector<StressVector> basis = stress_basis(f, tol);
    if (basis.empty()) return std::nullopt;
    const int d = static_cast<int>(basis.size());

    std::vector<SymMatrix> span;
    span.reserve(d);
    double span_scale = 0.0;
    for (const StressVector& sv : basis) {
        span.push_back(assemble_stress(sv, f.graph).matrix);
        span_scale = std::max(span_scale, span.back().frobenius_norm());
    }

    Matrix trace_row(1, d);
    double trace_norm = 0.0;
    for (int k = 0; k < d; ++k) {
        trace_row(0, k) = span[k].trace();
        trace_norm = std::max(trace_norm, std::fabs(trace_row(0, k)));
    }
    // A nonzero PSD matrix has positive trace, so a traceless span has none.
    if (trace_norm <= 1e-12 * std::max(1.0, span_scale)) return std::nullopt;

    const detail::SpanProjector proj(span, trace_row, {1.0});

    std::vector<std::vector<double>> found;
    for (int s = 0; s < starts; ++s) {
        Rng rng(derive_seed(seed, {0x73747265u, static_cast<std::uint64_t>(s)}));
        std::vector<double> x0(d);
        for (double& v : x0) v = rng.gaussian();
        const detail::SpanApResult res = detail::span_psd_ap(proj, x0);
        if (const auto cand = detail::exactify_span_candidate(proj, res.x, tol)) {
            found.push_back(*cand);
        } else if (res.converged && is_psd(detail::combine(span, res.x), tol)) {
            found.push_back(res.x);
        }
    }
    if (found.empty()) return std::nullopt;

    std::vector<double> mean(d, 0.0);
    for (const auto& x : found)
        for (int k = 0; k < d; ++k) mean[k] += x[k] / static_cast<double>(found.size());
    if (const auto crisp = detail::exactify_span_candidate(proj, mean, tol)) mean = *crisp;

    StressVector weights;
    weights.weights.assign(f.graph.edge_count(), 0.0);
    for (int k = 0; k < d; ++k)
        for (int e = 0; e < f.graph.edge_count(); ++e)
            weights.weights[e] += mean[k] * basis[k].weights[e];

    StressMatrix out = assemble_stress(weights, f.graph);
    if (!is_psd(out.matrix, tol)) return std::nullopt;
    return out;
}

}  // namespace rigidcert
