#include <gtest/gtest.h>

#include "rigidcert/rng.hpp"
#include "rigidcert/symmat.hpp"
#include "test_frameworks.hpp"

using namespace rigidcert;

namespace {

SymMatrix random_sym(int n, Rng& rng, double scale = 1.0) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            m(i, j) = scale * rng.gaussian();
            m(j, i) = m(i, j);
        }
    return SymMatrix(m);
}

Matrix reconstruct(const SpectralDecomp& d) {
    const int n = d.eigenvectors.rows();
    Matrix lam(n, n);
    for (int i = 0; i < n; ++i) lam(i, i) = d.eigenvalues[i];
    return d.eigenvectors * lam * d.eigenvectors.transpose();
}

}  // namespace

TEST(Spectral, IdentityHasUnitEigenvalues) {
    const SpectralDecomp d = spectral(SymMatrix(Matrix::identity(3)));
    for (double v : d.eigenvalues) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Spectral, EdgeFunctionalEigenvalues) {
    const SpectralDecomp d = spectral(edge_functional(3, 0, 1));
    EXPECT_NEAR(d.eigenvalues[0], 2.0, 1e-12);
    EXPECT_NEAR(d.eigenvalues[1], 0.0, 1e-12);
    EXPECT_NEAR(d.eigenvalues[2], 0.0, 1e-12);
}

TEST(Spectral, LadderStressMatrixRankTwo) {
    const SpectralDecomp d = spectral(testdata::ladder_omega0());
    int positive = 0, zero = 0;
    for (double v : d.eigenvalues) {
        if (v > 1e-9) ++positive;
        if (std::fabs(v) <= 1e-9) ++zero;
    }
    EXPECT_EQ(positive, 2);
    EXPECT_EQ(zero, 4);
}

TEST(Spectral, ReconstructionAndOrthogonality) {
    Rng rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 7);
        const SymMatrix m = random_sym(n, rng, 1.0 + 10.0 * rng.uniform());
        const SpectralDecomp d = spectral(m);
        const double resid = (reconstruct(d) - m.as_matrix()).frobenius_norm();
        EXPECT_LE(resid, 1e-8 * std::max(1.0, m.frobenius_norm()));
        EXPECT_LE(orthonormality_defect(d.eigenvectors), 1e-10);
        for (int i = 0; i + 1 < n; ++i) EXPECT_GE(d.eigenvalues[i], d.eigenvalues[i + 1]);
    }
}

TEST(RankOf, ZeroMatrix) { EXPECT_EQ(rank_of(SymMatrix(4)), 0); }

TEST(RankOf, Fig1StressIsRankOne) { EXPECT_EQ(rank_of(testdata::fig1_omega0()), 1); }

TEST(RankOf, LadderGramIsRankTwo) {
    EXPECT_EQ(rank_of(gram(testdata::ladder())), 2);
}

TEST(RankOf, RankPlusNullityIsOrder) {
    Rng rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + static_cast<int>(rng.next_u64() % 8);
        SymMatrix m = random_sym(n, rng);
        if (trial % 3 == 0) {
            // Force rank deficiency by squashing onto a random low rank.
            const SpectralDecomp d = spectral(m);
            Matrix lam(n, n);
            const int keep = static_cast<int>(rng.next_u64() % (n + 1));
            for (int i = 0; i < keep; ++i) lam(i, i) = d.eigenvalues[i] + 1.0;
            m = SymMatrix(d.eigenvectors * lam * d.eigenvectors.transpose());
        }
        EXPECT_EQ(rank_of(m) + nullspace(m).cols(), n);
    }
}

TEST(Nullspace, FullRankGivesEmptyBasis) {
    EXPECT_TRUE(nullspace(SymMatrix(Matrix::identity(2))).empty());
}

TEST(Nullspace, EdgeFunctionalKernel) {
    const Basis b = nullspace(edge_functional(3, 0, 1));
    ASSERT_EQ(b.cols(), 2);
    // Kernel must contain (1,1,0) and (0,0,1): check both have zero residual
    // against the matrix and full projection onto the basis.
    const SymMatrix f = edge_functional(3, 0, 1);
    EXPECT_LE((f.as_matrix() * b.m).frobenius_norm(), 1e-12);
    for (const std::vector<double>& v : {std::vector<double>{1, 1, 0}, {0, 0, 1}}) {
        double norm2 = 0.0, proj2 = 0.0;
        for (int i = 0; i < 3; ++i) norm2 += v[i] * v[i];
        for (int k = 0; k < 2; ++k) {
            double c = 0.0;
            for (int i = 0; i < 3; ++i) c += v[i] * b.m(i, k);
            proj2 += c * c;
        }
        EXPECT_NEAR(proj2, norm2, 1e-10);
    }
}

TEST(StackedNullspace, LadderRho1) {
    const auto f = testdata::ladder();
    const Basis b = stacked_nullspace({testdata::ladder_omega0().as_matrix(),
                                       f.config.transpose(), Matrix{{1, 1, 1, 1, 1, 1}}});
    ASSERT_EQ(b.cols(), 1);
    std::vector<double> got(6);
    for (int i = 0; i < 6; ++i) got[i] = b.m(i, 0);
    EXPECT_LE(testdata::angle_between(got, testdata::ladder_rho1()), 1e-8);
}

TEST(StackedNullspace, Fig1Rho1) {
    const auto f = testdata::fig1();
    const Basis b = stacked_nullspace({testdata::fig1_omega0().as_matrix(),
                                       f.config.transpose(), Matrix{{1, 1, 1, 1, 1}}});
    ASSERT_EQ(b.cols(), 1);
    std::vector<double> got(5);
    for (int i = 0; i < 5; ++i) got[i] = b.m(i, 0);
    EXPECT_LE(testdata::angle_between(got, testdata::fig1_rho1()), 1e-8);
}

TEST(StackedNullspace, IdentityStackIsEmpty) {
    EXPECT_TRUE(stacked_nullspace({Matrix::identity(4)}).empty());
}

TEST(StackedNullspace, ResidualAgainstEveryBlock) {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + static_cast<int>(rng.next_u64() % 5);
        std::vector<Matrix> blocks;
        for (int b = 0; b < 3; ++b) {
            Matrix blk(1 + static_cast<int>(rng.next_u64() % 3), n);
            for (double& v : blk.data()) v = rng.gaussian();
            blocks.push_back(std::move(blk));
        }
        const Basis k = stacked_nullspace(blocks);
        for (const Matrix& blk : blocks)
            EXPECT_LE((blk * k.m).frobenius_norm(), 1e-8);
    }
}

TEST(StackedNullspace, ShapeMismatchThrows) {
    EXPECT_THROW(stacked_nullspace({Matrix::identity(3), Matrix::identity(4)}), ShapeError);
}

TEST(IsPsd, LadderSecondStepMatrixIsIndefinite) {
    EXPECT_FALSE(is_psd(testdata::ladder_omega1()));
}

TEST(IsPsd, ReducedDiagonalBlockIsPsd) {
    EXPECT_TRUE(is_psd(SymMatrix{{0, 0, 0}, {0, 0, 0}, {0, 0, 8}}));
}

TEST(IsPsd, NegatedIdentityIsNot) {
    EXPECT_FALSE(is_psd(SymMatrix(-1.0 * Matrix::identity(2))));
}

TEST(ProjectPsd, ClipsNegativeEigenvalues) {
    const SymMatrix p = project_psd(SymMatrix{{3, 0}, {0, -1}});
    EXPECT_NEAR(p(0, 0), 3.0, 1e-12);
    EXPECT_NEAR(p(1, 1), 0.0, 1e-12);
    EXPECT_NEAR(p(0, 1), 0.0, 1e-12);
}

TEST(ProjectPsd, NegativeDefiniteGoesToZero) {
    EXPECT_LE(project_psd(SymMatrix{{-2, 0}, {0, -2}}).frobenius_norm(), 1e-12);
}

TEST(ProjectPsd, Idempotent) {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 6);
        const SymMatrix m = random_sym(n, rng, 3.0);
        const SymMatrix once = project_psd(m);
        const SymMatrix twice = project_psd(once);
        EXPECT_LE((twice - once).frobenius_norm(), 1e-10);
        EXPECT_TRUE(is_psd(once));
    }
}

TEST(FaceFrom, IdentityGivesFullCone) {
    const Basis w = face_from(SymMatrix(Matrix::identity(4)));
    EXPECT_EQ(w.cols(), 4);
    EXPECT_LE(orthonormality_defect(w.m), 1e-10);
}

TEST(FaceFrom, Fig1GramSpansConfiguration) {
    const auto f = testdata::fig1();
    const Basis w = face_from(gram(f));
    ASSERT_EQ(w.cols(), 2);
    // R(W) = R(P): P projects onto itself through W.
    const Matrix proj = w.m * (w.m.transpose() * f.config);
    EXPECT_LE((proj - f.config).frobenius_norm(), 1e-9);
}

TEST(FaceFrom, RankOneOuterProduct) {
    Matrix w{{3}, {0}, {4}};
    const Basis b = face_from(SymMatrix(w * w.transpose()));
    ASSERT_EQ(b.cols(), 1);
    EXPECT_NEAR(b.m(0, 0), 0.6, 1e-12);
    EXPECT_NEAR(b.m(2, 0), 0.8, 1e-12);
}

TEST(FaceFrom, RejectsIndefiniteInput) {
    EXPECT_THROW(face_from(SymMatrix{{1, 0}, {0, -1}}), DomainError);
}

TEST(FaceFrom, ReconstructsThroughTheFace) {
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 6);
        const SymMatrix a = project_psd(random_sym(n, rng, 2.0));
        const Basis w = face_from(a);
        const Matrix inner_block = w.m.transpose() * a.as_matrix() * w.m;
        const Matrix back = w.m * inner_block * w.m.transpose();
        EXPECT_LE((back - a.as_matrix()).frobenius_norm(),
                  1e-8 * std::max(1.0, a.frobenius_norm()));
    }
}

TEST(SymMatrix, SymmetrizesOnConstruction) {
    const SymMatrix m(Matrix{{1, 2}, {0, 1}});
    EXPECT_NEAR(m(0, 1), 1.0, 1e-15);
    EXPECT_NEAR(m(1, 0), 1.0, 1e-15);
}

TEST(SymMatrix, RejectsNonFinite) {
    Matrix m(2, 2);
    m(0, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(SymMatrix{m}, NumericInputError);
}
