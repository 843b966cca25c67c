#include <gtest/gtest.h>

#include "rigidcert/framework.hpp"
#include "rigidcert/rng.hpp"
#include "test_frameworks.hpp"

using namespace rigidcert;

TEST(LoadFramework, LadderLoadsAsPrinted) {
    const Framework f = testdata::ladder();
    EXPECT_EQ(f.vertex_count(), 6);
    EXPECT_EQ(f.dim, 2);
    // Already centered and full rank: the configuration must be untouched.
    EXPECT_LE((f.config - testdata::ladder_coords()).frobenius_norm(), 1e-12);
}

TEST(LoadFramework, Fig1LoadsAsPrinted) {
    const Framework f = testdata::fig1();
    EXPECT_EQ(f.vertex_count(), 5);
    EXPECT_EQ(f.dim, 2);
    EXPECT_LE((f.config - testdata::fig1_coords()).frobenius_norm(), 1e-12);
}

TEST(LoadFramework, CollinearPointsReduceToLine) {
    const Framework f = load_framework(Matrix{{0, 0}, {1, 1}, {2, 2}}, {{0, 1}, {1, 2}});
    EXPECT_EQ(f.dim, 1);
    EXPECT_EQ(f.config.cols(), 1);
    double colsum = 0.0;
    for (int i = 0; i < 3; ++i) colsum += f.config(i, 0);
    EXPECT_NEAR(colsum, 0.0, 1e-12);
}

TEST(LoadFramework, CentersTheConfiguration) {
    const Framework f = load_framework(Matrix{{10, 3}, {11, 5}, {13, 4}},
                                       {{0, 1}, {1, 2}, {0, 2}});
    for (int c = 0; c < f.config.cols(); ++c) {
        double s = 0.0;
        for (int i = 0; i < f.vertex_count(); ++i) s += f.config(i, c);
        EXPECT_NEAR(s, 0.0, 1e-10);
    }
    EXPECT_EQ(rank_of(SymMatrix(f.config.transpose() * f.config)), f.dim);
}

TEST(LoadFramework, RejectsDisconnectedGraph) {
    EXPECT_THROW(load_framework(Matrix{{0, 0}, {1, 0}, {2, 0}, {3, 1}}, {{0, 1}, {2, 3}}),
                 ModelError);
}

TEST(LoadFramework, RejectsZeroLengthEdge) {
    EXPECT_THROW(load_framework(Matrix{{0, 0}, {0, 0}, {1, 1}}, {{0, 1}, {1, 2}, {0, 2}}),
                 ModelError);
}

TEST(Gram, LadderTrace) {
    EXPECT_NEAR(gram(testdata::ladder()).trace(), 22.0, 1e-12);
}

TEST(Gram, SinglePointIsZero) {
    const Framework f = load_framework(Matrix{{5, 7}}, {});
    const SymMatrix b = gram(f);
    EXPECT_EQ(b.order(), 1);
    EXPECT_NEAR(b(0, 0), 0.0, 1e-12);
}

TEST(Gram, Fig1RankAndRowSums) {
    const SymMatrix b = gram(testdata::fig1());
    EXPECT_EQ(rank_of(b), 2);
    for (int i = 0; i < b.order(); ++i) {
        double row = 0.0;
        for (int j = 0; j < b.order(); ++j) row += b(i, j);
        EXPECT_NEAR(row, 0.0, 1e-10);
    }
    EXPECT_TRUE(is_psd(b));
}

TEST(EdgeFunctional, ExplicitPattern) {
    const SymMatrix f = edge_functional(3, 0, 1);
    EXPECT_NEAR(f(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(f(1, 1), 1.0, 1e-15);
    EXPECT_NEAR(f(0, 1), -1.0, 1e-15);
    EXPECT_NEAR(f(2, 2), 0.0, 1e-15);
    EXPECT_NEAR(f(0, 2), 0.0, 1e-15);
}

TEST(EdgeFunctional, TraceAgainstGramGivesSquaredLength) {
    const Framework f = testdata::ladder();
    // Edge {0,3}: endpoints (-1,-2) and (1,-2).
    EXPECT_NEAR(inner(edge_functional(6, 0, 3), gram(f)), 4.0, 1e-12);
}

TEST(EdgeFunctional, RowSumsVanish) {
    const SymMatrix f = edge_functional(5, 1, 3);
    for (int i = 0; i < 5; ++i) {
        double row = 0.0;
        for (int j = 0; j < 5; ++j) row += f(i, j);
        EXPECT_NEAR(row, 0.0, 1e-15);
    }
}

TEST(EdgeFunctional, RejectsLoop) { EXPECT_THROW(edge_functional(4, 2, 2), DomainError); }

TEST(Lengths, LadderFirstEdge) {
    const EdgeLengths l = lengths(testdata::ladder());
    // Edge order is sorted; edge {0,1} comes first: (-1,-2) vs (-1,2).
    EXPECT_NEAR(l.d2[0], 16.0, 1e-12);
}

TEST(Lengths, Fig1EdgeOneTwo) {
    const Framework f = testdata::fig1();
    const EdgeLengths l = lengths(f);
    const int idx = f.graph.edge_index(1, 2);
    ASSERT_GE(idx, 0);
    EXPECT_NEAR(l.d2[idx], 2.0, 1e-12);
}

TEST(Lengths, UnitSegment) {
    const Framework f = load_framework(Matrix{{0}, {1}}, {{0, 1}});
    EXPECT_NEAR(lengths(f).d2[0], 1.0, 1e-12);
}

TEST(Lengths, AgreeWithEdgeFunctionalTraces) {
    const Framework f = testdata::fig1();
    const SymMatrix b = gram(f);
    const EdgeLengths l = lengths(f);
    for (std::size_t e = 0; e < f.graph.edges.size(); ++e) {
        const auto [i, j] = f.graph.edges[e];
        EXPECT_NEAR(inner(edge_functional(5, i, j), b), l.d2[e], 1e-10);
    }
}

TEST(Equivalence, SelfIsEquivalent) {
    const Framework f = testdata::ladder();
    EXPECT_TRUE(is_equivalent(f, f));
}

TEST(Equivalence, ReflectionIsEquivalent) {
    Matrix reflected = testdata::ladder_coords();
    for (int i = 0; i < reflected.rows(); ++i) reflected(i, 1) = -reflected(i, 1);
    const Framework f = testdata::ladder();
    const Framework g = load_framework(reflected, testdata::ladder_edges());
    EXPECT_TRUE(is_equivalent(f, g));
}

TEST(Equivalence, ScaledCopyIsNot) {
    const Framework f = testdata::ladder();
    const Framework g =
        load_framework(2.0 * testdata::ladder_coords(), testdata::ladder_edges());
    EXPECT_FALSE(is_equivalent(f, g));
}

TEST(Congruence, RotatedTranslatedCopy) {
    const Framework f = testdata::fig1();
    const double c = std::cos(0.7), s = std::sin(0.7);
    Matrix moved(5, 2);
    for (int i = 0; i < 5; ++i) {
        const double x = testdata::fig1_coords()(i, 0);
        const double y = testdata::fig1_coords()(i, 1);
        moved(i, 0) = c * x - s * y + 3.0;
        moved(i, 1) = s * x + c * y - 1.5;
    }
    const Framework g = load_framework(moved, testdata::fig1_edges());
    EXPECT_TRUE(is_congruent(f, g));
}

TEST(Congruence, FlexedLadderIsEquivalentNotCongruent) {
    // The ladder admits an affine motion preserving all edges: every edge
    // direction is axis-aligned, so the symmetric map A with
    // A^T A = [[1, beta], [beta, 1]] keeps each edge length while changing
    // diagonal distances.
    const double beta = 0.5;
    const double a = 0.5 * (std::sqrt(1.0 + beta) + std::sqrt(1.0 - beta));
    const double b = 0.5 * (std::sqrt(1.0 + beta) - std::sqrt(1.0 - beta));
    Matrix flexed = testdata::ladder_coords();
    for (int i = 0; i < flexed.rows(); ++i) {
        const double x = flexed(i, 0), y = flexed(i, 1);
        flexed(i, 0) = a * x + b * y;
        flexed(i, 1) = b * x + a * y;
    }
    const Framework f = testdata::ladder();
    const Framework g = load_framework(flexed, testdata::ladder_edges());
    EXPECT_TRUE(is_equivalent(f, g));
    EXPECT_FALSE(is_congruent(f, g));
}

TEST(Congruence, VertexCountMismatchThrows) {
    const Framework f = testdata::ladder();
    const Framework g = testdata::fig1();
    EXPECT_THROW(is_congruent(f, g), DomainError);
}

TEST(VBasis, TwoVertexCase) {
    const Basis v = v_basis(2);
    ASSERT_EQ(v.cols(), 1);
    EXPECT_NEAR(std::fabs(v.m(0, 0)), 1.0 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(v.m(0, 0) + v.m(1, 0), 0.0, 1e-12);
}

TEST(VBasis, OrthogonalToOnesAndCompletesProjector) {
    for (int n : {2, 3, 5, 8}) {
        const Basis v = v_basis(n);
        EXPECT_EQ(v.cols(), n - 1);
        EXPECT_LE(orthonormality_defect(v.m), 1e-12);
        for (int k = 0; k < v.cols(); ++k) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += v.m(i, k);
            EXPECT_NEAR(s, 0.0, 1e-12);
        }
        Matrix expect(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) expect(i, j) = (i == j ? 1.0 : 0.0) - 1.0 / n;
        EXPECT_LE((v.m * v.m.transpose() - expect).frobenius_norm(), 1e-10);
    }
}

TEST(VBasis, RejectsTooSmall) { EXPECT_THROW(v_basis(1), DomainError); }

TEST(Framework, GramLiesInVFace) {
    for (const Framework& f : {testdata::ladder(), testdata::fig1(), testdata::k4()}) {
        const Basis v = v_basis(f.vertex_count());
        const SymMatrix b = gram(f);
        const Matrix proj = v.m * v.m.transpose() * b.as_matrix();
        EXPECT_LE((proj - b.as_matrix()).frobenius_norm(), 1e-9 * std::max(1.0, b.frobenius_norm()));
    }
}

TEST(Framework, CongruentImpliesEquivalent) {
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const Framework f = testdata::k4();
        const double a = rng.uniform() * 6.28;
        const double c = std::cos(a), s = std::sin(a);
        const double tx = rng.gaussian(), ty = rng.gaussian();
        Matrix moved(4, 2);
        for (int i = 0; i < 4; ++i) {
            moved(i, 0) = c * f.config(i, 0) - s * f.config(i, 1) + tx;
            moved(i, 1) = s * f.config(i, 0) + c * f.config(i, 1) + ty;
        }
        Framework g = f;
        g.config = moved;
        g = load_framework(moved, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
        ASSERT_TRUE(is_congruent(f, g));
        EXPECT_TRUE(is_equivalent(f, g));
    }
}
