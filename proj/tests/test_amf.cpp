// SPDX-License-Identifier: Apache-2.0
#include "amfisac/amf.hpp"

#include <gtest/gtest.h>

using namespace amfisac;

namespace {

Scenario random_scenario(Eigen::Index n, int q, SeededRng& rng) {
    Scenario s;
    s.n = n;
    s.sigma_n2 = 0.5;
    s.beta0 = rng.complex_normal();
    s.n0 = static_cast<long long>(rng.uniform_index(static_cast<std::uint64_t>(n)));
    std::vector<long long> used{s.n0};
    while (static_cast<int>(s.clutter.size()) < q) {
        const auto bin = static_cast<long long>(rng.uniform_index(static_cast<std::uint64_t>(n)));
        if (std::find(used.begin(), used.end(), bin) != used.end()) continue;
        used.push_back(bin);
        s.clutter.push_back({rng.complex_normal(), bin});
    }
    return s;
}

} // namespace

TEST(ClutterCovariance, NoiseOnlyCases) {
    SeededRng rng(1, 0);
    Scenario s = random_scenario(6, 0, rng);
    const CVector x = rng.complex_normal_vector(6);
    EXPECT_EQ(clutter_covariance(s, x), s.sigma_n2 * CMatrix::Identity(6, 6));
    s = random_scenario(6, 3, rng);
    EXPECT_LE((clutter_covariance(s, CVector::Zero(6)) - s.sigma_n2 * CMatrix::Identity(6, 6)).norm(), 0.0);
}

TEST(ClutterCovariance, MinEigenvalueIsNoise) {
    SeededRng rng(2, 0);
    const Scenario s = random_scenario(10, 3, rng);
    const CVector x = rng.complex_normal_vector(10);
    const CMatrix r = clutter_covariance(s, x);
    EXPECT_LE(hermitian_defect(r), 0.0);
    const auto eig = hermitian_eigen(r);
    EXPECT_NEAR(eig.values(0), s.sigma_n2, 1e-12);
    EXPECT_NEAR(eig.values(9), s.sigma_n2 + clutter_echo(s, x).squaredNorm(), 1e-10);
}

TEST(AmfWeights, NoClutterIsMatchedFilter) {
    SeededRng rng(3, 0);
    const Scenario s = random_scenario(8, 0, rng);
    const CVector x = rng.complex_normal_vector(8);
    const auto w = amf_weights(s, x);
    EXPECT_LE((w.w - shift_apply(s.n0, x) / x.squaredNorm()).norm(), 1e-14 * w.w.norm());
    EXPECT_LE((w.w - mf_weights(x, s.n0).w).norm(), 1e-14 * w.w.norm());
}

TEST(AmfWeights, DistortionlessAndOptimal) {
    SeededRng rng(4, 0);
    for (int rep = 0; rep < 20; ++rep) {
        const Scenario s = random_scenario(12, 1 + rep % 4, rng);
        const CVector x = rng.complex_normal_vector(12);
        const auto w = amf_weights(s, x);
        const CVector t = shift_apply(s.n0, x);
        EXPECT_NEAR(std::abs(w.w.dot(t) - 1.0), 0.0, 1e-8);
        const CMatrix r = clutter_covariance(s, x);
        // Matches the dense solve.
        const CVector dense = hermitian_solve(r, t);
        EXPECT_LE((w.w - dense / std::conj(t.dot(dense))).norm(), 1e-9 * w.w.norm());
        const double base = w.w.dot(r * w.w).real();
        for (int probe = 0; probe < 100; ++probe) {
            CVector v = rng.complex_normal_vector(12);
            v += std::conj(1.0 - v.dot(t)) * t / t.squaredNorm(); // vᴴt = 1
            ASSERT_NEAR(std::abs(v.dot(t) - 1.0), 0.0, 1e-10);
            EXPECT_LE(base, v.dot(r * v).real() * (1.0 + 1e-12));
        }
    }
}

TEST(MfWeights, Basics) {
    CVector e1 = CVector::Zero(5);
    e1(0) = 1.0;
    EXPECT_EQ(mf_weights(e1, 0).w, e1);
    SeededRng rng(5, 0);
    const CVector x = rng.complex_normal_vector(7);
    for (long long n = 0; n < 7; ++n)
        EXPECT_NEAR(std::abs(mf_weights(x, n).w.dot(shift_apply(n, x)) - 1.0), 0.0, 1e-14);
    try {
        mf_weights(CVector::Zero(3), 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroSignal);
    }
}

TEST(InstantaneousScnr, NoiseOnly) {
    SeededRng rng(6, 0);
    const Scenario s = random_scenario(9, 0, rng);
    const CVector x = rng.complex_normal_vector(9);
    const double expect = std::norm(s.beta0) * x.squaredNorm() / s.sigma_n2;
    EXPECT_NEAR(instantaneous_scnr(s, x).gamma, expect, 1e-13 * expect);
    EXPECT_NEAR(instantaneous_scnr(s, x, ScnrPath::DirectInverse).gamma, expect, 1e-10 * expect);
}

TEST(InstantaneousScnr, DualPathAndFilterForm) {
    SeededRng rng(7, 0);
    for (int rep = 0; rep < 50; ++rep) {
        const Scenario s = random_scenario(8, 1 + rep % 4, rng);
        const CVector x = rng.complex_normal_vector(8);
        const auto fast = instantaneous_scnr(s, x);
        const auto direct = instantaneous_scnr(s, x, ScnrPath::DirectInverse);
        EXPECT_NEAR(fast.gamma, direct.gamma, 1e-8 * direct.gamma);
        EXPECT_GE(fast.gamma, 0.0);
        const double amf = filter_output_scnr(s, x, amf_weights(s, x).w);
        const double mf = filter_output_scnr(s, x, mf_weights(x, s.n0).w);
        EXPECT_NEAR(amf, fast.gamma, 1e-8 * fast.gamma);
        EXPECT_GE(amf * (1.0 + 1e-12), mf);
        const double rho = 1.0 / (s.sigma_n2 + build_channel(s).apply(x).squaredNorm());
        EXPECT_NEAR(fast.rho, rho, 1e-15 * rho);
        // Global phase rotation leaves γ unchanged.
        const double rotated = instantaneous_scnr(s, std::polar(1.0, 0.3 + rep) * x).gamma;
        EXPECT_NEAR(rotated, fast.gamma, 1e-12 * fast.gamma);
    }
}

TEST(InstantaneousScnr, NeverExceedsNoiseOnlyBound) {
    SeededRng rng(8, 0);
    const Scenario s = random_scenario(16, 4, rng);
    const auto basis = make_basis(BasisKind::OFDM, 16);
    const auto qpsk = make_constellation(ConstellationKind::PSK, 4);
    const CVector xp = all_one_pilot(16, 1.0);
    const Channel h = build_channel(s);
    for (int t = 0; t < 1000; ++t) {
        const CVector x = assemble_tx(xp, basis, sample_symbols(qpsk, 16, rng), 2.0).x;
        const double g = instantaneous_scnr(h, s.beta0, s.sigma_n2, x).gamma;
        EXPECT_LE(g, std::norm(s.beta0) * x.squaredNorm() / s.sigma_n2 * (1.0 + 1e-12));
    }
}

TEST(RangeProfile, SingleTargetPeak) {
    SeededRng rng(9, 0);
    Scenario s = random_scenario(32, 0, rng);
    s.n0 = 5;
    const CVector x = rng.complex_normal_vector(32);
    const auto rp = range_profile(s, x, FilterKind::AMF);
    ASSERT_EQ(rp.power_db.size(), 32u);
    EXPECT_EQ(rp.power_db[5], 0.0);
    const auto peak = std::max_element(rp.power_db.begin(), rp.power_db.end()) - rp.power_db.begin();
    EXPECT_EQ(peak, 5);
}

TEST(RangeProfile, MatchedFilterIsAutocorrelation) {
    const Eigen::Index n = 24;
    SeededRng rng(10, 0);
    Scenario s;
    s.n = n;
    s.n0 = 3;
    s.clutter = {{rng.complex_normal(), 9}};
    const auto basis = make_basis(BasisKind::SC, n);
    const CVector x =
        assemble_tx(all_one_pilot(n, 1.0), basis, sample_symbols(make_constellation(ConstellationKind::PSK, 4), n, rng),
                    1.0)
            .x;
    const auto rp = range_profile(s, x, FilterKind::MF);
    std::vector<double> ac(static_cast<std::size_t>(n));
    double peak = 0.0;
    for (Eigen::Index lag = 0; lag < n; ++lag) {
        cdouble r = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) r += std::conj(x((i + s.n0) % n)) * x((i + lag) % n);
        ac[static_cast<std::size_t>(lag)] = std::norm(r);
        peak = std::max(peak, std::norm(r));
    }
    for (Eigen::Index lag = 0; lag < n; ++lag)
        EXPECT_NEAR(rp.power_db[static_cast<std::size_t>(lag)], db10(ac[static_cast<std::size_t>(lag)] / peak), 1e-9);
}

TEST(RangeProfile, AmfNullsStrongClutter) {
    const Eigen::Index n = 128;
    SeededRng rng(11, 0);
    Scenario s;
    s.n = n;
    s.n0 = 0;
    s.sigma_n2 = 1e-9;
    ClutterGeometry g;
    s.clutter = {{rng.complex_normal(g.gain_variance(1.0)), 10}};
    const auto basis = make_basis(BasisKind::OFDM, n);
    const CVector x = assemble_tx(all_one_pilot(n, 100.0), basis,
                                  sample_symbols(make_constellation(ConstellationKind::PSK, 4), n, rng), 1000.0)
                          .x;
    const auto mf = range_profile(s, x, FilterKind::MF);
    const auto amf = range_profile(s, x, FilterKind::AMF);
    EXPECT_GE(mf.power_db[10], -40.0);
    EXPECT_LE(amf.power_db[10], -60.0);
}
