#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rigidcert/detail/alternating.hpp"
#include "rigidcert/framework.hpp"
#include "rigidcert/rng.hpp"

// Brute-force embedding oracle, independent of the facial-reduction path:
// Levenberg-Marquardt descent on the squared edge-length residuals from
// random starts in the target dimension. A returned framework is an
// equivalent realization whose affine span equals the target dimension;
// absence after the budget is evidence, not proof.

namespace rigidcert {

struct EmbeddingOptions {
    int starts = 64;
    int max_iters = 200;
    double target_cost = 1e-12;  // sum of squared residuals
};

/// Searches for a framework equivalent to f whose affine span has dimension
/// target_dim. Returns nothing when no run reaches the residual target with
/// the required span.
inline std::optional<Framework> embedding_oracle(const Framework& f, int target_dim,
                                                 std::uint64_t seed,
                                                 const EmbeddingOptions& opts = {},
                                                 const Tolerances& tol = {}) {
    if (target_dim < 1) throw DomainError("embedding_oracle: target dimension must be >= 1");
    const int n = f.vertex_count();
    const int m = f.graph.edge_count();
    const int vars = n * target_dim;
    const EdgeLengths want = lengths(f);

    double scale2 = 0.0;
    for (double d2 : want.d2) scale2 = std::max(scale2, d2);
    const double spread = std::sqrt(std::max(scale2, 1.0));

    auto cost_and_residuals = [&](const Matrix& q, std::vector<double>& res) {
        double cost = 0.0;
        res.resize(m);
        for (int e = 0; e < m; ++e) {
            const auto [i, j] = f.graph.edges[e];
            double d2 = 0.0;
            for (int c = 0; c < target_dim; ++c) {
                const double diff = q(i, c) - q(j, c);
                d2 += diff * diff;
            }
            res[e] = d2 - want.d2[e];
            cost += res[e] * res[e];
        }
        return cost;
    };

    for (int start = 0; start < opts.starts; ++start) {
        Rng rng(derive_seed(seed, {0x656d6264u, static_cast<std::uint64_t>(start)}));
        Matrix q(n, target_dim);
        for (double& v : q.data()) v = spread * rng.gaussian();

        std::vector<double> res;
        double cost = cost_and_residuals(q, res);
        double lambda = 1e-3;
        int stale = 0;

        for (int iter = 0; iter < opts.max_iters && cost > opts.target_cost * 1e-3; ++iter) {
            // J^T J and J^T r assembled edge by edge; row e of J has
            // 2(q_i - q_j) at vertex i and the negative at vertex j.
            Matrix jtj(vars, vars);
            std::vector<double> jtr(vars, 0.0);
            for (int e = 0; e < m; ++e) {
                const auto [i, j] = f.graph.edges[e];
                for (int c = 0; c < target_dim; ++c) {
                    const double g = 2.0 * (q(i, c) - q(j, c));
                    const int bi = i * target_dim + c;
                    const int bj = j * target_dim + c;
                    jtr[bi] += g * res[e];
                    jtr[bj] -= g * res[e];
                    for (int c2 = 0; c2 < target_dim; ++c2) {
                        const double g2 = 2.0 * (q(i, c2) - q(j, c2));
                        const int bi2 = i * target_dim + c2;
                        const int bj2 = j * target_dim + c2;
                        jtj(bi, bi2) += g * g2;
                        jtj(bi, bj2) -= g * g2;
                        jtj(bj, bi2) -= g * g2;
                        jtj(bj, bj2) += g * g2;
                    }
                }
            }

            bool improved = false;
            for (int attempt = 0; attempt < 8; ++attempt) {
                Matrix damped = jtj;
                for (int d = 0; d < vars; ++d) damped(d, d) += lambda;
                std::vector<double> delta;
                std::vector<double> neg(vars);
                for (int d = 0; d < vars; ++d) neg[d] = -jtr[d];
                if (!detail::cholesky_solve(damped, neg, delta)) {
                    lambda *= 10.0;
                    continue;
                }
                Matrix trial = q;
                for (int i = 0; i < n; ++i)
                    for (int c = 0; c < target_dim; ++c)
                        trial(i, c) += delta[i * target_dim + c];
                std::vector<double> trial_res;
                const double trial_cost = cost_and_residuals(trial, trial_res);
                if (trial_cost < cost) {
                    const double rel_gain = (cost - trial_cost) / std::max(cost, 1e-300);
                    q = std::move(trial);
                    res = std::move(trial_res);
                    cost = trial_cost;
                    lambda = std::max(lambda / 3.0, 1e-12);
                    improved = true;
                    stale = rel_gain < 1e-12 ? stale + 1 : 0;
                    break;
                }
                lambda *= 10.0;
            }
            if (!improved || stale > 10) break;
        }

        if (cost <= opts.target_cost) {
            Framework candidate = load_framework(q, f.graph.edges, tol);
            if (candidate.dim == target_dim) return candidate;
        }
    }
    return std::nullopt;
}

}  // namespace rigidcert
