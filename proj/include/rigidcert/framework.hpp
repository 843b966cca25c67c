#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "rigidcert/symmat.hpp"

namespace rigidcert {

/// Simple connected undirected graph on vertices 0..n-1. Edges are stored
/// sorted with i < j and no duplicates.
struct Graph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;

    Graph() = default;

    Graph(int vertex_count, std::vector<std::pair<int, int>> edge_list)
        : n(vertex_count), edges(std::move(edge_list)) {
        if (n <= 0) throw ModelError("graph needs at least one vertex");
        for (auto& [i, j] : edges) {
            if (i > j) std::swap(i, j);
            if (i < 0 || j >= n) throw ModelError("edge index out of range");
            if (i == j) throw ModelError("loops are not allowed");
        }
        std::sort(edges.begin(), edges.end());
        if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
            throw ModelError("duplicate edge");
        }
        if (!connected()) throw ModelError("graph is not connected");
    }

    int edge_count() const { return static_cast<int>(edges.size()); }

    bool has_edge(int i, int j) const {
        if (i > j) std::swap(i, j);
        return std::binary_search(edges.begin(), edges.end(), std::make_pair(i, j));
    }

    int edge_index(int i, int j) const {
        if (i > j) std::swap(i, j);
        auto it = std::lower_bound(edges.begin(), edges.end(), std::make_pair(i, j));
        if (it == edges.end() || *it != std::make_pair(i, j)) return -1;
        return static_cast<int>(it - edges.begin());
    }

    /// Non-edges {i,j}, i<j, of the complement graph.
    std::vector<std::pair<int, int>> non_edges() const {
        std::vector<std::pair<int, int>> out;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (!has_edge(i, j)) out.emplace_back(i, j);
        return out;
    }

private:
    bool connected() const {
        if (n == 1) return true;
        std::vector<std::vector<int>> adj(n);
        for (auto [i, j] : edges) {
            adj[i].push_back(j);
            adj[j].push_back(i);
        }
        std::vector<char> seen(n, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        int count = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int w : adj[v]) {
                if (!seen[w]) {
                    seen[w] = 1;
                    ++count;
                    stack.push_back(w);
                }
            }
        }
        return count == n;
    }
};

/// Bar framework: a graph together with a centered configuration matrix whose
/// rows are the vertex coordinates. The configuration has full column rank,
/// so dim equals the affine-span dimension of the points.
struct Framework {
    Graph graph;
    Matrix config;  // n x dim, rows are points, columns sum to zero
    int dim = 0;

    int vertex_count() const { return graph.n; }
};

/// Squared edge lengths in graph edge order.
struct EdgeLengths {
    std::vector<double> d2;
};

/// Rank-one edge functional F = (e_i - e_j)(e_i - e_j)^T, the matrix with
/// tr(F B) = B_ii + B_jj - 2 B_ij.
inline SymMatrix edge_functional(int n, int i, int j) {
    if (i == j) throw DomainError("edge_functional: i == j");
    if (i < 0 || j < 0 || i >= n || j >= n) throw ShapeError("edge_functional: index out of range");
    SymMatrix f(n);
    f.set(i, i, 1.0);
    f.set(j, j, 1.0);
    f.set(i, j, -1.0);
    return f;
}

/// Builds a framework from raw coordinates: translates the centroid to the
/// origin and drops dependent coordinate directions so the configuration has
/// full column rank.
inline Framework load_framework(const Matrix& coords,
                                const std::vector<std::pair<int, int>>& edges,
                                const Tolerances& tol = {}) {
    if (!coords.all_finite()) throw NumericInputError("load_framework: non-finite coordinates");
    const int n = coords.rows();
    Graph g(n, edges);

    Matrix p = coords;
    for (int j = 0; j < p.cols(); ++j) {
        double mean = 0.0;
        for (int i = 0; i < n; ++i) mean += p(i, j);
        mean /= n;
        for (int i = 0; i < n; ++i) p(i, j) -= mean;
    }

    for (auto [i, j] : g.edges) {
        double d2 = 0.0;
        for (int c = 0; c < p.cols(); ++c) {
            const double diff = p(i, c) - p(j, c);
            d2 += diff * diff;
        }
        if (d2 <= 0.0) throw ModelError("zero-length edge between coincident vertices");
    }

    // Affine-span reduction: keep the principal directions of P^T P. When the
    // columns are already independent the configuration is left untouched.
    const SymMatrix small(p.transpose() * p);
    const int r = rank_of(small, tol);
    if (r < p.cols()) {
        const SpectralDecomp d = spectral(small);
        Matrix q(p.cols(), r);
        for (int k = 0; k < r; ++k)
            for (int i = 0; i < p.cols(); ++i) q(i, k) = d.eigenvectors(i, k);
        p = p * q;
    }

    Framework f;
    f.graph = std::move(g);
    f.config = std::move(p);
    f.dim = r;
    return f;
}

/// Gram matrix P P^T of the configuration.
inline SymMatrix gram(const Framework& f) {
    return SymMatrix(f.config * f.config.transpose());
}

inline EdgeLengths lengths(const Framework& f) {
    EdgeLengths out;
    out.d2.reserve(f.graph.edges.size());
    for (auto [i, j] : f.graph.edges) {
        double d2 = 0.0;
        for (int c = 0; c < f.config.cols(); ++c) {
            const double diff = f.config(i, c) - f.config(j, c);
            d2 += diff * diff;
        }
        out.d2.push_back(d2);
    }
    return out;
}

namespace detail {

inline bool close_rel(double a, double b, double tol) {
    return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

inline double pair_d2(const Matrix& p, int i, int j) {
    double d2 = 0.0;
    for (int c = 0; c < p.cols(); ++c) {
        const double diff = p(i, c) - p(j, c);
        d2 += diff * diff;
    }
    return d2;
}

}  // namespace detail

/// Equal squared lengths on every edge.
inline bool is_equivalent(const Framework& f, const Framework& g, const Tolerances& tol = {}) {
    if (f.graph.n != g.graph.n || f.graph.edges != g.graph.edges) {
        throw DomainError("is_equivalent: graphs differ");
    }
    const EdgeLengths lf = lengths(f);
    const EdgeLengths lg = lengths(g);
    for (std::size_t e = 0; e < lf.d2.size(); ++e) {
        if (!detail::close_rel(lf.d2[e], lg.d2[e], tol.feas_residual)) return false;
    }
    return true;
}

/// Equal squared distances on every vertex pair.
inline bool is_congruent(const Framework& f, const Framework& g, const Tolerances& tol = {}) {
    if (f.vertex_count() != g.vertex_count()) {
        throw DomainError("is_congruent: vertex counts differ");
    }
    const int n = f.vertex_count();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (!detail::close_rel(detail::pair_d2(f.config, i, j),
                                   detail::pair_d2(g.config, i, j), tol.feas_residual)) {
                return false;
            }
        }
    }
    return true;
}

/// Deterministic n x (n-1) matrix V with orthonormal columns orthogonal to the
/// all-ones vector, so V V^T = I - ee^T/n. Built from the Householder
/// reflection mapping e/sqrt(n) to the first standard basis vector.
inline Basis v_basis(int n) {
    if (n < 2) throw DomainError("v_basis: need n >= 2");
    std::vector<double> v(n);
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    for (int i = 0; i < n; ++i) v[i] = inv_sqrt_n;
    v[0] -= 1.0;  // v = e/sqrt(n) - e_1
    const double vv = dot(v, v);

    Matrix out(n, n - 1);
    for (int j = 1; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double h = (i == j ? 1.0 : 0.0) - 2.0 * v[i] * v[j] / vv;
            out(i, j - 1) = h;
        }
    }
    detail::fix_column_signs(out);
    return Basis{std::move(out)};
}

}  // namespace rigidcert
