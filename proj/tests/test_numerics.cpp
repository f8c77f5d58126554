// SPDX-License-Identifier: Apache-2.0
#include "amfisac/numerics.hpp"

#include <gtest/gtest.h>

using namespace amfisac;

namespace {

CMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, SeededRng& rng) {
    CMatrix a(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = rng.complex_normal();
    return a;
}

} // namespace

TEST(HermitianSolve, IdentityReturnsRhs) {
    CVector b(3);
    b << 1.0, kI, -2.0;
    const CVector x = hermitian_solve(CMatrix::Identity(3, 3), b);
    EXPECT_LE((x - b).norm(), 1e-15);
}

TEST(HermitianSolve, ScalarMatrix) {
    CVector b(2);
    b << 4.0, 0.0;
    const CVector x = hermitian_solve(2.0 * CMatrix::Identity(2, 2), b);
    EXPECT_NEAR(std::abs(x(0) - 2.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(x(1)), 0.0, 1e-15);
}

TEST(HermitianSolve, RandomGramResidual) {
    SeededRng rng(7, 0);
    const CMatrix g = random_matrix(8, 8, rng);
    CMatrix a = g * g.adjoint();
    a.diagonal().array() += 1.0;
    const CVector b = rng.complex_normal_vector(8);
    const CVector x = hermitian_solve(a, b);
    EXPECT_LE((a * x - b).norm() / b.norm(), 1e-10);
}

TEST(HermitianSolve, Errors) {
    CMatrix a = CMatrix::Identity(2, 2);
    a(0, 1) = 1.0;
    CVector b = CVector::Ones(2);
    try {
        hermitian_solve(a, b);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonHermitian);
    }
    try {
        hermitian_solve(-CMatrix::Identity(2, 2), b);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotPositiveDefinite);
    }
    try {
        hermitian_solve(CMatrix::Identity(3, 3), b);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
    }
}

TEST(CirculantEigen, IdentityColumn) {
    CVector c = CVector::Zero(5);
    c(0) = 1.0;
    const CVector l = circulant_eigen(c);
    for (Eigen::Index i = 0; i < 5; ++i) EXPECT_NEAR(std::abs(l(i) - 1.0), 0.0, 1e-14);
}

TEST(CirculantEigen, PureShiftGivesRootsOfUnity) {
    CVector c = CVector::Zero(4);
    c(1) = 1.0;
    const CVector l = circulant_eigen(c);
    for (Eigen::Index k = 0; k < 4; ++k) {
        const cdouble expect = std::polar(1.0, -2.0 * kPi * static_cast<double>(k) / 4.0);
        EXPECT_NEAR(std::abs(l(k) - expect), 0.0, 1e-14);
    }
}

TEST(CirculantEigen, TraceIdentityAndReconstruction) {
    SeededRng rng(11, 0);
    for (Eigen::Index n : {1, 2, 7, 16, 32}) {
        const CVector c = rng.complex_normal_vector(n);
        const CVector l = circulant_eigen(c);
        EXPECT_NEAR(std::abs(l.sum() - static_cast<double>(n) * c(0)), 0.0, 1e-12 * n);
        // Naive O(N²) DFT.
        for (Eigen::Index k = 0; k < n; ++k) {
            cdouble s = 0.0;
            for (Eigen::Index m = 0; m < n; ++m)
                s += c(m) * std::polar(1.0, -2.0 * kPi * static_cast<double>(k * m) / static_cast<double>(n));
            EXPECT_NEAR(std::abs(l(k) - s), 0.0, 1e-10);
        }
        const CMatrix f = dft_matrix(n);
        const CMatrix rebuilt = f.adjoint() * l.asDiagonal() * f;
        const CMatrix circ = circulant_matrix(c);
        EXPECT_LE((rebuilt - circ).norm(), 1e-10 * std::max(1.0, circ.norm()));
    }
    EXPECT_THROW(circulant_eigen(CVector()), Error);
}

TEST(DominantEigenpair, Diagonal) {
    CMatrix a = CMatrix::Zero(2, 2);
    a(0, 0) = 3.0;
    a(1, 1) = 1.0;
    const auto ep = dominant_eigenpair(a);
    EXPECT_NEAR(ep.value, 3.0, 1e-12);
    EXPECT_NEAR(std::abs(ep.vector(0) - 1.0), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(ep.vector(1)), 0.0, 1e-12);
}

TEST(DominantEigenpair, RankOnePhaseFixed) {
    CVector x(2);
    x << 1.0, kI;
    x /= std::sqrt(2.0);
    const auto ep = dominant_eigenpair(x * x.adjoint());
    EXPECT_NEAR(ep.value, 1.0, 1e-12);
    EXPECT_NEAR((ep.vector - x).norm(), 0.0, 1e-12);
    EXPECT_EQ(ep.vector(0).imag(), 0.0);
    EXPECT_GE(ep.vector(0).real(), 0.0);
}

TEST(DominantEigenpair, MatchesFullSpectrum) {
    SeededRng rng(3, 1);
    const CMatrix g = random_matrix(6, 6, rng);
    const CMatrix a = g * g.adjoint();
    const auto ep = dominant_eigenpair(a);
    const auto full = hermitian_eigen(a);
    EXPECT_NEAR(ep.value, full.values(5), 1e-10 * full.values(5));
    EXPECT_LE((a * ep.vector - ep.value * ep.vector).norm(), 1e-9 * a.norm());
    EXPECT_NEAR(ep.vector.norm(), 1.0, 1e-12);
    const CMatrix rebuilt = full.vectors * full.values.cast<cdouble>().asDiagonal() * full.vectors.adjoint();
    EXPECT_LE((rebuilt - a).norm(), 1e-9 * a.norm());
}

TEST(SingularValues, CirculantMagnitudes) {
    SeededRng rng(5, 0);
    const CVector c = rng.complex_normal_vector(9);
    RVector mags = circulant_eigen(c).cwiseAbs();
    std::sort(mags.data(), mags.data() + mags.size(), std::greater<>());
    EXPECT_LE((singular_values(circulant_matrix(c)) - mags).norm(), 1e-10 * mags.norm());
}

TEST(SeededRng, Reproducible) {
    SeededRng a(42, 3), b(42, 3), c(42, 4);
    bool differs = false;
    for (int i = 0; i < 1000; ++i) {
        const auto va = a.next_u64();
        EXPECT_EQ(va, b.next_u64());
        differs |= va != c.next_u64();
    }
    EXPECT_TRUE(differs);
    SeededRng d(1, 0), e(1, 0);
    for (int i = 0; i < 100; ++i) {
        const double x = d.normal();
        const double y = e.normal();
        EXPECT_EQ(x, y);
    }
}

TEST(SeededRng, ComplexNormalMoments) {
    SeededRng rng(9, 0);
    const int n = 200000;
    cdouble mean = 0.0, pseudo = 0.0;
    double var = 0.0;
    for (int i = 0; i < n; ++i) {
        const cdouble z = rng.complex_normal(2.0);
        mean += z;
        var += std::norm(z);
        pseudo += z * z;
    }
    EXPECT_NEAR(std::abs(mean) / n, 0.0, 0.01);
    EXPECT_NEAR(var / n, 2.0, 0.03);
    EXPECT_NEAR(std::abs(pseudo) / n, 0.0, 0.03);
}

TEST(Helpers, DbAndFrobenius) {
    EXPECT_NEAR(from_dbm(-90.0), 1e-9, 1e-24);
    EXPECT_NEAR(from_dbm(20.0), 100.0, 1e-12);
    EXPECT_NEAR(db10(100.0), 20.0, 1e-12);
    CMatrix a = CMatrix::Identity(2, 2);
    EXPECT_NEAR(frob_inner(a, 3.0 * a), 6.0, 1e-15);
}
