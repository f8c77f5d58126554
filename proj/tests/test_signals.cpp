// SPDX-License-Identifier: Apache-2.0
#include "amfisac/signals.hpp"

#include <gtest/gtest.h>

using namespace amfisac;

TEST(Constellation, Kurtosis) {
    EXPECT_EQ(make_constellation(ConstellationKind::PSK, 4).kappa, 1.0);
    EXPECT_NEAR(make_constellation(ConstellationKind::QAM, 16).kappa, 1.32, 1e-12);
    EXPECT_EQ(make_constellation(ConstellationKind::Gaussian).kappa, 2.0);

    // Exact moment of the normalized 64-point grid, summed independently.
    double e2 = 0.0, e4 = 0.0;
    for (int i = -7; i <= 7; i += 2)
        for (int q = -7; q <= 7; q += 2) {
            const double r2 = i * i + q * q;
            e2 += r2;
            e4 += r2 * r2;
        }
    e2 /= 64.0;
    e4 /= 64.0;
    EXPECT_NEAR(make_constellation(ConstellationKind::QAM, 64).kappa, e4 / (e2 * e2), 1e-12);
}

TEST(Constellation, UnsupportedOrders) {
    EXPECT_THROW(make_constellation(ConstellationKind::QAM, 8), Error);
    EXPECT_THROW(make_constellation(ConstellationKind::QAM, 1), Error);
    EXPECT_THROW(make_constellation(ConstellationKind::PSK, 2), Error);
    try {
        make_constellation(ConstellationKind::QAM, 12);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnsupportedOrder);
    }
}

TEST(Constellation, PskConstantModulus) {
    for (int m : {3, 4, 8, 16}) {
        const auto c = make_constellation(ConstellationKind::PSK, m);
        SeededRng rng(1, static_cast<std::uint64_t>(m));
        const CVector s = sample_symbols(c, 256, rng);
        for (Eigen::Index i = 0; i < s.size(); ++i) EXPECT_NEAR(std::abs(s(i)), 1.0, 1e-15);
    }
}

TEST(Constellation, SampleMoments) {
    const int n = 1000000;
    for (const auto& c : {make_constellation(ConstellationKind::PSK, 4), make_constellation(ConstellationKind::QAM, 16),
                          make_constellation(ConstellationKind::Gaussian)}) {
        SeededRng rng(2024, 0);
        const CVector s = sample_symbols(c, n, rng);
        const cdouble mean = s.mean();
        const double var = s.cwiseAbs2().mean();
        const cdouble pseudo = s.cwiseProduct(s).mean();
        const double kurt = s.cwiseAbs2().cwiseAbs2().mean();
        // Standard errors: |s|⁴ has variance E|s|⁸ − κ², at most 24 − 4 for Gaussian.
        const double se = 1.0 / std::sqrt(static_cast<double>(n));
        EXPECT_LE(std::abs(mean), 3.0 * se * std::sqrt(2.0)) << c.label();
        EXPECT_LE(std::abs(var - 1.0), 3.0 * se * std::sqrt(c.kappa - 1.0 + 1e-300) + 1e-12) << c.label();
        EXPECT_LE(std::abs(pseudo), 3.0 * se * std::sqrt(2.0 * c.kappa)) << c.label();
        EXPECT_LE(std::abs(kurt - c.kappa), 3.0 * se * std::sqrt(20.0)) << c.label();
    }
}

TEST(Constellation, GaussianKurtosisEstimate) {
    SeededRng rng(77, 0);
    const CVector s = sample_symbols(make_constellation(ConstellationKind::Gaussian), 1000000, rng);
    EXPECT_LE(std::abs(s.cwiseAbs2().cwiseAbs2().mean() - 2.0), 0.02);
}

TEST(Constellation, DeterministicDraws) {
    const auto c = make_constellation(ConstellationKind::QAM, 16);
    SeededRng a(5, 2), b(5, 2);
    EXPECT_EQ(sample_symbols(c, 64, a), sample_symbols(c, 64, b));
}

TEST(Basis, Unitary) {
    for (Eigen::Index n : {1, 4, 12, 16, 64}) {
        for (const auto& b : {make_basis(BasisKind::SC, n), make_basis(BasisKind::OFDM, n), make_afdm(n)}) {
            EXPECT_LE(unitarity_defect(b.U), 1e-10 * static_cast<double>(n)) << to_string(b.kind);
        }
    }
    const auto sc = make_basis(BasisKind::SC, 5);
    EXPECT_EQ(sc.U, CMatrix::Identity(5, 5));
    const auto ofdm = make_basis(BasisKind::OFDM, 6);
    EXPECT_LE((ofdm.U - dft_matrix(6).inverse()).norm(), 1e-12);
}

TEST(Basis, FastModulateMatchesDense) {
    SeededRng rng(8, 0);
    for (Eigen::Index n : {5, 16, 33}) {
        const CVector s = rng.complex_normal_vector(n);
        for (const auto& b : {make_basis(BasisKind::SC, n), make_basis(BasisKind::OFDM, n), make_afdm(n)})
            EXPECT_LE((b.modulate(s) - b.U * s).norm(), 1e-12 * s.norm()) << to_string(b.kind);
    }
}

TEST(Basis, CustomRejectsNonUnitary) {
    CMatrix u = CMatrix::Identity(3, 3);
    EXPECT_NO_THROW(custom_basis(u));
    u(0, 0) = 2.0;
    try {
        custom_basis(u);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonUnitary);
    }
}

TEST(Shift, Basics) {
    CVector x(3);
    x << 1.0, 2.0, 3.0;
    EXPECT_EQ(shift_apply(0, x), x);
    CVector expect(3);
    expect << 2.0, 3.0, 1.0;
    EXPECT_EQ(shift_apply(1, x), expect);
    EXPECT_EQ(shift_apply(4, x), expect);
    EXPECT_EQ(shift_apply(-2, x), expect);
    EXPECT_EQ(shift_matrix(1, 3) * x, expect);
}

TEST(Shift, CompositionAndInverse) {
    SeededRng rng(4, 0);
    const Eigen::Index n = 11;
    const CVector x = rng.complex_normal_vector(n);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) EXPECT_EQ(shift_apply(a, shift_apply(b, x)), shift_apply((a + b) % n, x));
        EXPECT_EQ(shift_apply((n - a) % n, shift_apply(a, x)), x);
    }
}

TEST(Channel, EmptyAndSingle) {
    Scenario s;
    s.n = 3;
    s.n0 = 0;
    EXPECT_EQ(build_channel(s).dense(), CMatrix::Zero(3, 3));
    s.clutter = {{1.0, 1}};
    EXPECT_EQ(build_channel(s).dense(), shift_matrix(1, 3));
}

TEST(Channel, DegenerateDelayRejected) {
    Scenario s;
    s.n = 8;
    s.n0 = 2;
    s.clutter = {{1.0, 2}};
    try {
        build_channel(s);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateDelay);
    }
}

TEST(Channel, RandomScenarioCirculantAndEigen) {
    SeededRng rng(12, 0);
    Scenario s;
    s.n = 16;
    s.n0 = 5;
    for (long long bin : {1, 7, 8, 15}) s.clutter.push_back({rng.complex_normal(), bin});
    const Channel h = build_channel(s);
    CMatrix dense = CMatrix::Zero(16, 16);
    for (const auto& c : s.clutter) dense += c.beta * shift_matrix(c.bin - s.n0, 16);
    const CMatrix hd = h.dense();
    EXPECT_LE((hd - dense).norm(), 1e-14);
    for (Eigen::Index j = 0; j < 16; ++j)
        for (Eigen::Index i = 0; i < 16; ++i) EXPECT_EQ(hd(i, j), hd((i - j + 16) % 16, 0));
    // Eigenvalues as Σ_q β_q times the DFT of each shifted impulse.
    CVector expect = CVector::Zero(16);
    for (const auto& c : s.clutter) {
        CVector impulse = CVector::Zero(16);
        impulse(wrap_index(-(c.bin - s.n0), 16)) = 1.0;
        expect += c.beta * fft(impulse);
    }
    EXPECT_LE((h.eigenvalues - expect).norm(), 1e-12);
    const CVector x = rng.complex_normal_vector(16);
    EXPECT_LE((h.apply(x) - hd * x).norm(), 1e-12);
    EXPECT_LE((h.apply_adjoint(x) - hd.adjoint() * x).norm(), 1e-12);
}

TEST(ClutterGains, VarianceFormula) {
    ClutterGeometry g;
    EXPECT_NEAR(g.gain_variance(30.0), std::pow(10.0, -0.1 * (61.4 + 20.0 * std::log10(30.0))), 1e-20);
    double prev = g.gain_variance(1.0);
    for (double d = 2.0; d < 1e6; d *= 3.0) {
        EXPECT_LT(g.gain_variance(d), prev);
        prev = g.gain_variance(d);
    }
    SeededRng rng(31, 0);
    const int n = 100000;
    const std::vector<double> dist(n, 30.0);
    const auto beta = sample_clutter_gains(g, dist, rng, false);
    double var = 0.0;
    for (const auto& b : beta) var += std::norm(b);
    var /= n;
    EXPECT_NEAR(var / g.gain_variance(30.0), 1.0, 0.02);
}

TEST(ClutterGains, DistancesInRange) {
    ClutterGeometry g;
    SeededRng rng(1, 1);
    for (double d : draw_distances(g, 1000, rng)) {
        EXPECT_GE(d, 30.0);
        EXPECT_LT(d, 40.0);
    }
    EXPECT_THROW(sample_clutter_gains(g, {0.0}, rng), Error);
}

TEST(Frames, Assemble) {
    SeededRng rng(2, 0);
    const Eigen::Index n = 8;
    const auto basis = make_basis(BasisKind::SC, n);
    const CVector xp = all_one_pilot(n, 100.0);
    EXPECT_NEAR(xp.squaredNorm(), 100.0 * n, 1e-9);
    EXPECT_EQ(assemble_tx(xp, basis, CVector::Zero(n), 1000.0).x, xp);
    const CVector s = rng.complex_normal_vector(n);
    EXPECT_LE((assemble_tx(CVector::Zero(n), basis, s, 1.0).x - s).norm(), 1e-15);
    EXPECT_THROW(assemble_tx(xp, basis, CVector::Zero(n + 1), 1.0), Error);
}

TEST(Frames, AverageEnergy) {
    const Eigen::Index n = 16;
    const double pd = 1000.0;
    const auto basis = make_basis(BasisKind::OFDM, n);
    const auto c = make_constellation(ConstellationKind::QAM, 16);
    SeededRng rng(3, 0);
    const CVector xp = all_one_pilot(n, 100.0);
    const int trials = 20000;
    double sum = 0.0, sum2 = 0.0;
    for (int t = 0; t < trials; ++t) {
        const double e = assemble_tx(xp, basis, sample_symbols(c, n, rng), pd).x.squaredNorm();
        sum += e;
        sum2 += e * e;
    }
    const double mean = sum / trials;
    const double se = std::sqrt((sum2 / trials - mean * mean) / trials);
    EXPECT_LE(std::abs(mean - (n * pd + xp.squaredNorm())), 4.0 * se);
}

TEST(Frames, Receive) {
    Scenario s;
    s.n = 8;
    s.n0 = 3;
    s.beta0 = {0.5, -0.25};
    s.sigma_n2 = 1e-300;
    SeededRng rng(6, 0);
    const auto basis = make_basis(BasisKind::OFDM, 8);
    const auto frame = assemble_tx(all_one_pilot(8, 1.0), basis, rng.complex_normal_vector(8), 1.0);
    EXPECT_LE((receive(s, frame, rng) - s.beta0 * shift_apply(3, frame.x)).norm(), 1e-140);

    s.sigma_n2 = 2.0;
    const TxFrame zero{CVector::Zero(8), CVector::Zero(8), CVector::Zero(8)};
    CMatrix cov = CMatrix::Zero(8, 8);
    const int trials = 40000;
    for (int t = 0; t < trials; ++t) {
        const CVector y = receive(s, zero, rng);
        cov += y * y.adjoint();
    }
    cov /= trials;
    EXPECT_LE((cov - 2.0 * CMatrix::Identity(8, 8)).cwiseAbs().maxCoeff(), 0.06);

    SeededRng r1(10, 1), r2(10, 1);
    EXPECT_EQ(receive(s, frame, r1), receive(s, frame, r2));
    s.n = 9;
    EXPECT_THROW(receive(s, frame, r1), Error);
}

TEST(Scenario, Validation) {
    Scenario s;
    s.n = 4;
    EXPECT_NO_THROW(s.validate());
    s.P_p = 0.0;
    EXPECT_THROW(s.validate(), Error);
    s.P_p = 1.0;
    s.n0 = 4;
    EXPECT_THROW(s.validate(), Error);
}
