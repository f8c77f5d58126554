// SPDX-License-Identifier: Apache-2.0
#pragma once

/**
 * @file signals.hpp
 * @brief Transmit and propagation side: constellations, modulation bases,
 *        circular shift operators, the clutter channel and received frames.
 *
 * Shift convention: (J_k x)_i = x_{(i + k) mod N}, i.e. J_k = [[0, I_{N-k}], [I_k, 0]].
 * Powers are per-sample linear mW. Data symbols are unit variance and scaled by
 * √P_d when a frame is assembled.
 */

#include "amfisac/numerics.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace amfisac {

// ---------------------------------------------------------------------------
// Constellations
// ---------------------------------------------------------------------------

enum class ConstellationKind { PSK, QAM, Gaussian };

inline std::string to_string(ConstellationKind k) {
    switch (k) {
    case ConstellationKind::PSK: return "PSK";
    case ConstellationKind::QAM: return "QAM";
    case ConstellationKind::Gaussian: return "Gaussian";
    }
    return "?";
}

struct Constellation {
    ConstellationKind kind = ConstellationKind::PSK;
    int order = 4;
    double kappa = 1.0;            ///< E|s|⁴ under unit average energy
    std::vector<cdouble> alphabet; ///< empty for Gaussian

    bool finite() const { return kind != ConstellationKind::Gaussian; }
    std::string label() const {
        if (kind == ConstellationKind::Gaussian) return "Gaussian";
        return std::to_string(order) + "-" + to_string(kind);
    }
};

/**
 * Build a unit-energy constellation and its exact kurtosis.
 *
 * BPSK is rejected: its pseudo-variance E[s²] is 1, which breaks the
 * circular-symmetry assumption every moment formula here relies on.
 */
inline Constellation make_constellation(ConstellationKind kind, int order = 0) {
    Constellation c;
    c.kind = kind;
    c.order = order;
    if (kind == ConstellationKind::Gaussian) {
        c.order = 0;
        c.kappa = 2.0;
        return c;
    }
    if (kind == ConstellationKind::PSK) {
        if (order < 3)
            throw Error(ErrorCode::UnsupportedOrder,
                        "PSK order must be >= 3 (BPSK has non-zero pseudo-variance)");
        for (int m = 0; m < order; ++m)
            c.alphabet.push_back(std::polar(1.0, 2.0 * kPi * m / order + kPi / order));
        // Constant modulus: κ = 1 without rounding.
        for (auto& s : c.alphabet) s /= std::abs(s);
        c.kappa = 1.0;
        return c;
    }
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
    if (order < 4 || side * side != order)
        throw Error(ErrorCode::UnsupportedOrder, "QAM order must be a perfect square >= 4");
    double energy = 0.0;
    for (int i = 0; i < side; ++i)
        for (int q = 0; q < side; ++q) {
            const cdouble s(2.0 * i - (side - 1), 2.0 * q - (side - 1));
            c.alphabet.push_back(s);
            energy += std::norm(s);
        }
    energy /= order;
    double m4 = 0.0;
    for (auto& s : c.alphabet) {
        s /= std::sqrt(energy);
        m4 += std::norm(s) * std::norm(s);
    }
    c.kappa = m4 / order;
    return c;
}

/// N i.i.d. symbols from the constellation.
inline CVector sample_symbols(const Constellation& c, Eigen::Index n, SeededRng& rng) {
    CVector s(n);
    if (!c.finite()) {
        for (Eigen::Index i = 0; i < n; ++i) s(i) = rng.complex_normal(1.0);
        return s;
    }
    const auto m = static_cast<std::uint64_t>(c.alphabet.size());
    for (Eigen::Index i = 0; i < n; ++i) s(i) = c.alphabet[rng.uniform_index(m)];
    return s;
}

// ---------------------------------------------------------------------------
// Modulation bases
// ---------------------------------------------------------------------------

enum class BasisKind { SC, OFDM, AFDM, Custom };

inline std::string to_string(BasisKind k) {
    switch (k) {
    case BasisKind::SC: return "SC";
    case BasisKind::OFDM: return "OFDM";
    case BasisKind::AFDM: return "AFDM";
    case BasisKind::Custom: return "Custom";
    }
    return "?";
}

struct ModulationBasis {
    BasisKind kind = BasisKind::OFDM;
    Eigen::Index n = 0;
    double c1 = 0.0;
    double c2 = 0.0;
    CMatrix U;
    CVector chirp1; ///< diagonal of Λ_{c1}ᴴ (AFDM only)
    CVector chirp2; ///< diagonal of Λ_{c2}ᴴ (AFDM only)

    CVector modulate(const CVector& s) const {
        if (s.size() != n) throw Error(ErrorCode::DimensionMismatch, "modulate: symbol length");
        const double root_n = std::sqrt(static_cast<double>(n));
        switch (kind) {
        case BasisKind::SC: return s;
        case BasisKind::OFDM: return root_n * ifft(s);
        case BasisKind::AFDM:
            return chirp1.cwiseProduct(root_n * ifft(chirp2.cwiseProduct(s).eval()));
        case BasisKind::Custom: break;
        }
        return U * s;
    }
};

inline double unitarity_defect(const CMatrix& u) {
    return (u.adjoint() * u - CMatrix::Identity(u.cols(), u.cols())).norm();
}

namespace detail {
inline CVector chirp_diagonal(Eigen::Index n, double c) {
    CVector d(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double kk = static_cast<double>(k) * static_cast<double>(k);
        d(k) = std::polar(1.0, -2.0 * kPi * c * kk);
    }
    return d;
}
} // namespace detail

/**
 * SC: U = I. OFDM: U = Fᴴ (unitary inverse DFT).
 * AFDM: U = Λ_{c1}ᴴ Fᴴ Λ_{c2}ᴴ with Λ_c = diag(exp(−i2πc n²)).
 */
inline ModulationBasis make_basis(BasisKind kind, Eigen::Index n, double c1 = 0.0, double c2 = 0.0) {
    if (n < 1) throw Error(ErrorCode::EmptyInput, "make_basis: N must be >= 1");
    ModulationBasis b;
    b.kind = kind;
    b.n = n;
    switch (kind) {
    case BasisKind::SC: b.U = CMatrix::Identity(n, n); break;
    case BasisKind::OFDM: b.U = dft_matrix(n).adjoint(); break;
    case BasisKind::AFDM: {
        b.c1 = c1;
        b.c2 = c2;
        b.chirp1 = detail::chirp_diagonal(n, c1).conjugate();
        b.chirp2 = detail::chirp_diagonal(n, c2).conjugate();
        b.U = b.chirp1.asDiagonal() * dft_matrix(n).adjoint() * b.chirp2.asDiagonal();
        break;
    }
    case BasisKind::Custom:
        throw Error(ErrorCode::NonUnitary, "make_basis: use custom_basis() for Custom");
    }
    if (unitarity_defect(b.U) > 1e-10 * static_cast<double>(n))
        throw Error(ErrorCode::NonUnitary, "make_basis: constructed basis is not unitary");
    return b;
}

/// AFDM with the default chirp coefficients c1 = 1/(4N), c2 = 1/(2N).
inline ModulationBasis make_afdm(Eigen::Index n) {
    const double nn = static_cast<double>(n);
    return make_basis(BasisKind::AFDM, n, 1.0 / (4.0 * nn), 1.0 / (2.0 * nn));
}

inline ModulationBasis custom_basis(const CMatrix& u) {
    if (u.rows() != u.cols() || u.rows() == 0)
        throw Error(ErrorCode::DimensionMismatch, "custom_basis: U must be square");
    if (unitarity_defect(u) > 1e-10 * static_cast<double>(u.rows()))
        throw Error(ErrorCode::NonUnitary, "custom_basis: U is not unitary");
    ModulationBasis b;
    b.kind = BasisKind::Custom;
    b.n = u.rows();
    b.U = u;
    return b;
}

// ---------------------------------------------------------------------------
// Shifts, scenario, channel
// ---------------------------------------------------------------------------

inline Eigen::Index wrap_index(long long k, Eigen::Index n) {
    const long long r = k % static_cast<long long>(n);
    return static_cast<Eigen::Index>(r < 0 ? r + n : r);
}

/// J_k x, with k reduced mod N.
inline CVector shift_apply(long long k, const CVector& x) {
    const Eigen::Index n = x.size();
    if (n == 0) return x;
    const Eigen::Index kk = wrap_index(k, n);
    CVector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = x((i + kk) % n);
    return y;
}

inline CMatrix shift_matrix(long long k, Eigen::Index n) {
    CMatrix j = CMatrix::Zero(n, n);
    const Eigen::Index kk = wrap_index(k, n);
    for (Eigen::Index i = 0; i < n; ++i) j(i, (i + kk) % n) = 1.0;
    return j;
}

struct ClutterPath {
    cdouble beta;
    long long bin;
};

/// Complete sensing environment. Powers in linear mW.
struct Scenario {
    Eigen::Index n = 16;
    double sigma_n2 = 1e-9;
    cdouble beta0{1.0, 0.0};
    long long n0 = 0;
    std::vector<ClutterPath> clutter;
    double P_p = 100.0;
    double P_d = 1000.0;
    int slots = 1;

    std::size_t q() const { return clutter.size(); }

    void validate() const {
        if (n < 1) throw Error(ErrorCode::InvalidScenario, "N must be >= 1");
        if (!(sigma_n2 > 0.0)) throw Error(ErrorCode::InvalidScenario, "noise power must be > 0");
        if (!(P_p > 0.0) || !(P_d > 0.0))
            throw Error(ErrorCode::InvalidScenario, "pilot and data powers must be > 0");
        if (n0 < 0 || n0 >= n) throw Error(ErrorCode::InvalidScenario, "target bin out of range");
        for (const auto& c : clutter) {
            if (c.bin < 0 || c.bin >= n)
                throw Error(ErrorCode::InvalidScenario, "clutter bin out of range");
            if (c.bin == n0)
                throw Error(ErrorCode::DegenerateDelay, "clutter bin coincides with target bin");
        }
    }
};

/**
 * Circulant clutter operator H = Σ_q β_q J_{(n_q − n₀) mod N}.
 *
 * Kept in sparse (offset, gain) form for O(QN) products; the dense matrix and
 * the DFT-bin eigenvalues are precomputed.
 */
struct Channel {
    Eigen::Index n = 0;
    std::vector<Eigen::Index> offsets;
    std::vector<cdouble> gains;
    CVector first_column;
    CVector eigenvalues;

    std::size_t q() const { return offsets.size(); }

    CVector apply(const CVector& x) const {
        CVector y = CVector::Zero(n);
        for (std::size_t p = 0; p < offsets.size(); ++p) y += gains[p] * shift_apply(offsets[p], x);
        return y;
    }
    CVector apply_adjoint(const CVector& x) const {
        CVector y = CVector::Zero(n);
        for (std::size_t p = 0; p < offsets.size(); ++p)
            y += std::conj(gains[p]) * shift_apply(-static_cast<long long>(offsets[p]), x);
        return y;
    }
    CMatrix dense() const { return circulant_matrix(first_column); }

    /// Gains summed per distinct offset (coincident paths merged).
    std::vector<std::pair<Eigen::Index, cdouble>> grouped() const {
        std::vector<std::pair<Eigen::Index, cdouble>> g;
        for (std::size_t p = 0; p < offsets.size(); ++p) {
            auto it = std::find_if(g.begin(), g.end(), [&](const auto& e) { return e.first == offsets[p]; });
            if (it == g.end())
                g.emplace_back(offsets[p], gains[p]);
            else
                it->second += gains[p];
        }
        return g;
    }
};

/// Channel from explicit (offset, gain) pairs; offsets reduced mod N.
inline Channel make_channel(Eigen::Index n, const std::vector<long long>& offsets,
                            const std::vector<cdouble>& gains) {
    if (n < 1) throw Error(ErrorCode::EmptyInput, "make_channel: N must be >= 1");
    if (offsets.size() != gains.size())
        throw Error(ErrorCode::DimensionMismatch, "make_channel: offsets/gains length");
    Channel h;
    h.n = n;
    h.first_column = CVector::Zero(n);
    for (std::size_t p = 0; p < offsets.size(); ++p) {
        const Eigen::Index k = wrap_index(offsets[p], n);
        h.offsets.push_back(k);
        h.gains.push_back(gains[p]);
        // Column 0 of J_k has its single one at row (−k) mod N.
        h.first_column((n - k) % n) += gains[p];
    }
    h.eigenvalues = circulant_eigen(h.first_column);
    return h;
}

inline Channel build_channel(const Scenario& s) {
    s.validate();
    std::vector<long long> offsets;
    std::vector<cdouble> gains;
    for (const auto& c : s.clutter) {
        offsets.push_back(c.bin - s.n0);
        gains.push_back(c.beta);
    }
    return make_channel(s.n, offsets, gains);
}

// ---------------------------------------------------------------------------
// Clutter gain model
// ---------------------------------------------------------------------------

/// Log-distance path loss ϑ(d) = a + 10 b log10(d) + ε, ε ~ N(0, σ_ε²) in dB.
struct ClutterGeometry {
    double a = 61.4;
    double b = 2.0;
    double sigma_eps_db = 5.8;
    double d_min = 30.0;
    double d_max = 40.0;

    double path_loss_db(double d, double eps_db = 0.0) const {
        return a + 10.0 * b * std::log10(d) + eps_db;
    }
    double gain_variance(double d, double eps_db = 0.0) const {
        return std::pow(10.0, -0.1 * path_loss_db(d, eps_db));
    }
};

inline std::vector<double> draw_distances(const ClutterGeometry& g, std::size_t count, SeededRng& rng) {
    std::vector<double> d(count);
    for (auto& v : d) v = g.d_min + (g.d_max - g.d_min) * rng.uniform();
    return d;
}

/// β_q ~ CN(0, 10^{−0.1 ϑ(d_q)}), with a fresh shadowing draw per path unless disabled.
inline std::vector<cdouble> sample_clutter_gains(const ClutterGeometry& g, const std::vector<double>& distances,
                                                 SeededRng& rng, bool shadowing = true) {
    std::vector<cdouble> beta;
    beta.reserve(distances.size());
    for (double d : distances) {
        if (!(d > 0.0)) throw Error(ErrorCode::InvalidScenario, "clutter distance must be > 0");
        const double eps = shadowing ? g.sigma_eps_db * rng.normal() : 0.0;
        beta.push_back(rng.complex_normal(g.gain_variance(d, eps)));
    }
    return beta;
}

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

struct TxFrame {
    CVector x_p;
    CVector s_d;
    CVector x;
};

/// Pilot with every entry √P_p, so ‖x_p‖² = P_p N.
inline CVector all_one_pilot(Eigen::Index n, double P_p) {
    return CVector::Constant(n, cdouble(std::sqrt(P_p), 0.0));
}

/// x = x_p + √P_d U s_d.
inline TxFrame assemble_tx(const CVector& x_p, const ModulationBasis& basis, const CVector& s_d, double P_d) {
    if (x_p.size() != basis.n || s_d.size() != basis.n)
        throw Error(ErrorCode::DimensionMismatch, "assemble_tx: length mismatch");
    TxFrame f{x_p, s_d, x_p + std::sqrt(P_d) * basis.modulate(s_d)};
    return f;
}

/// y = β₀ J_{n₀} x + Σ_q β_q J_{n_q} x + n,  n ~ CN(0, σ² I).
inline CVector receive(const Scenario& s, const TxFrame& frame, SeededRng& rng) {
    if (frame.x.size() != s.n) throw Error(ErrorCode::DimensionMismatch, "receive: frame length");
    CVector y = s.beta0 * shift_apply(s.n0, frame.x);
    for (const auto& c : s.clutter) y += c.beta * shift_apply(c.bin, frame.x);
    y += rng.complex_normal_vector(s.n, s.sigma_n2);
    return y;
}

} // namespace amfisac
