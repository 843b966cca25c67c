#pragma once

// Shared hand-built inputs used across the test suites: the two bundled
// reference frameworks (a 6-vertex ladder and a 5-vertex near-complete
// framework) together with their known stress data.

#include "rigidcert/framework.hpp"
#include "rigidcert/symmat.hpp"

namespace testdata {

using rigidcert::Framework;
using rigidcert::Matrix;
using rigidcert::SymMatrix;

inline Matrix ladder_coords() {
    return Matrix{{-1, -2}, {-1, 2}, {1, 2}, {1, -2}, {-1, 0}, {1, 0}};
}

inline std::vector<std::pair<int, int>> ladder_edges() {
    return {{0, 1}, {0, 3}, {0, 4}, {1, 2}, {1, 4}, {2, 3}, {2, 5}, {3, 5}, {4, 5}};
}

inline Framework ladder() {
    return rigidcert::load_framework(ladder_coords(), ladder_edges());
}

/// PSD stress matrix of the ladder, rank 2 (sum of two rank-one terms).
inline SymMatrix ladder_omega0() {
    return SymMatrix{{1, 1, 0, 0, -2, 0},
                     {1, 1, 0, 0, -2, 0},
                     {0, 0, 1, 1, 0, -2},
                     {0, 0, 1, 1, 0, -2},
                     {-2, -2, 0, 0, 4, 0},
                     {0, 0, -2, -2, 0, 4}};
}

/// Indefinite quasi-stress matrix of the ladder used at the second step.
inline SymMatrix ladder_omega1() {
    return SymMatrix{{1, 0, 0, -1, 0, 0},
                     {0, 1, -1, 0, 0, 0},
                     {0, -1, 1, 0, 0, 0},
                     {-1, 0, 0, 1, 0, 0},
                     {0, 0, 0, 0, -2, 2},
                     {0, 0, 0, 0, 2, -2}};
}

inline std::vector<double> ladder_rho1() { return {-1, 1, -1, 1, 0, 0}; }

inline Matrix fig1_coords() {
    return Matrix{{0, 0}, {0, 2}, {1, 1}, {2, 0}, {-3, -3}};
}

/// All pairs except {0,3} and {2,4}.
inline std::vector<std::pair<int, int>> fig1_edges() {
    return {{0, 1}, {0, 2}, {0, 4}, {1, 2}, {1, 3}, {1, 4}, {2, 3}, {3, 4}};
}

inline Framework fig1() {
    return rigidcert::load_framework(fig1_coords(), fig1_edges());
}

/// PSD stress matrix of the five-vertex framework, rank 1.
inline SymMatrix fig1_omega0() {
    return SymMatrix{{0, 0, 0, 0, 0},
                     {0, 1, -2, 1, 0},
                     {0, -2, 4, -2, 0},
                     {0, 1, -2, 1, 0},
                     {0, 0, 0, 0, 0}};
}

inline SymMatrix fig1_omega1() {
    return SymMatrix{{32, 0, -24, 0, -8},
                     {0, 3, -6, 0, 3},
                     {-24, -6, 30, 0, 0},
                     {0, 0, 0, -3, 3},
                     {-8, 3, 0, 3, 2}};
}

inline std::vector<double> fig1_rho1() { return {-4, 1, 1, 1, 1}; }

/// Unit square on four vertices with the four sides only.
inline Framework square4() {
    return rigidcert::load_framework(Matrix{{0, 0}, {1, 0}, {1, 1}, {0, 1}},
                                     {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
}

/// Complete graph on four points, one interior to the others' triangle.
inline Framework k4() {
    return rigidcert::load_framework(Matrix{{-1, -1}, {1, -1}, {0, 1.4}, {0, 0.6}},
                                     {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
}

/// Path on three non-collinear points.
inline Framework path3() {
    return rigidcert::load_framework(Matrix{{0, 0}, {1, 0}, {1.3, 0.9}}, {{0, 1}, {1, 2}});
}

inline double angle_between(const std::vector<double>& a, const std::vector<double>& b) {
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    const double c = std::fabs(ab) / std::sqrt(aa * bb);
    return std::acos(std::min(1.0, c));
}

}  // namespace testdata
