// SPDX-License-Identifier: Apache-2.0
#pragma once

/**
 * @file amf.hpp
 * @brief Adaptive matched filter (MVDR) and matched-filter baseline.
 *
 * For a transmit vector x the noise-averaged covariance of the clutter is
 * R = c cᴴ + σ² I with c = Σ_q β_q J_{n_q} x, and the MVDR filter steered at
 * the target bin is w = R⁻¹ J_{n₀} x / (xᴴ J_{n₀}ᴴ R⁻¹ J_{n₀} x).
 */

#include "amfisac/signals.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace amfisac {

enum class FilterKind { MF, AMF };

inline std::string to_string(FilterKind k) { return k == FilterKind::MF ? "MF" : "AMF"; }

struct FilterWeights {
    CVector w;
    FilterKind kind = FilterKind::AMF;
    long long steer_bin = 0;
};

/// Σ_q β_q J_{n_q} x, the noise-free clutter echo.
inline CVector clutter_echo(const Scenario& s, const CVector& x) {
    if (x.size() != s.n) throw Error(ErrorCode::DimensionMismatch, "clutter_echo: length of x");
    CVector c = CVector::Zero(s.n);
    for (const auto& p : s.clutter) c += p.beta * shift_apply(p.bin, x);
    return c;
}

inline CMatrix clutter_covariance(const Scenario& s, const CVector& x) {
    const CVector c = clutter_echo(s, x);
    CMatrix r = c * c.adjoint();
    r.diagonal().array() += s.sigma_n2;
    return r;
}

/// R⁻¹ v for R = c cᴴ + σ² I, via the rank-one inverse update (exact and well conditioned).
inline CVector apply_covariance_inverse(const CVector& c, double sigma_n2, const CVector& v) {
    return (v - c * (c.dot(v) / (sigma_n2 + c.squaredNorm()))) / sigma_n2;
}

inline FilterWeights amf_weights(const Scenario& s, const CVector& x) {
    if (!(s.sigma_n2 > 0.0)) throw Error(ErrorCode::SingularCovariance, "amf_weights: noise power must be > 0");
    s.validate();
    const CVector target = shift_apply(s.n0, x);
    const CVector r_inv_t = apply_covariance_inverse(clutter_echo(s, x), s.sigma_n2, target);
    const cdouble denom = target.dot(r_inv_t); // tᴴ R⁻¹ t
    if (std::abs(denom) == 0.0) throw Error(ErrorCode::ZeroSignal, "amf_weights: x is zero");
    return {r_inv_t / std::conj(denom), FilterKind::AMF, s.n0};
}

inline FilterWeights mf_weights(const CVector& x, long long steer_bin) {
    const double e = x.squaredNorm();
    if (e == 0.0) throw Error(ErrorCode::ZeroSignal, "mf_weights: x is zero");
    return {shift_apply(steer_bin, x) / e, FilterKind::MF, steer_bin};
}

/// Output SCNR of an arbitrary filter, |β₀ wᴴ J_{n₀} x|² / (wᴴ R w).
inline double filter_output_scnr(const Scenario& s, const CVector& x, const CVector& w) {
    const cdouble g = w.dot(shift_apply(s.n0, x));
    const CVector c = clutter_echo(s, x);
    const double power = std::norm(w.dot(c)) + s.sigma_n2 * w.squaredNorm();
    return std::norm(s.beta0) * std::norm(g) / power;
}

enum class ScnrPath { ShermanMorrison, DirectInverse };

struct ScnrValue {
    double gamma = 0.0;
    double rho = 0.0; ///< 1 / (σ² + ‖Hx‖²)
};

/**
 * γ = |β₀|² xᴴ (H x xᴴ Hᴴ + σ² I)⁻¹ x.
 *
 * The default path uses γ = (|β₀|²/σ²)(xᴴx − ρ |xᴴHx|²); the direct path
 * solves the linear system and is kept for verification.
 */
inline ScnrValue instantaneous_scnr(const Channel& h, cdouble beta0, double sigma_n2, const CVector& x,
                                    ScnrPath path = ScnrPath::ShermanMorrison) {
    if (x.size() != h.n) throw Error(ErrorCode::DimensionMismatch, "instantaneous_scnr: length of x");
    const CVector hx = h.apply(x);
    ScnrValue out;
    out.rho = 1.0 / (sigma_n2 + hx.squaredNorm());
    if (path == ScnrPath::ShermanMorrison) {
        const double g = x.squaredNorm() - out.rho * std::norm(x.dot(hx));
        out.gamma = std::norm(beta0) / sigma_n2 * std::max(g, 0.0);
    } else {
        CMatrix a = hx * hx.adjoint();
        a.diagonal().array() += sigma_n2;
        out.gamma = std::norm(beta0) * x.dot(hermitian_solve(a, x)).real();
    }
    return out;
}

inline ScnrValue instantaneous_scnr(const Scenario& s, const CVector& x,
                                    ScnrPath path = ScnrPath::ShermanMorrison) {
    return instantaneous_scnr(build_channel(s), s.beta0, s.sigma_n2, x, path);
}

struct RangeProfile {
    std::vector<long long> bins;
    std::vector<double> power_db;
};

/// Floor applied to exact zeros so profiles stay finite.
inline constexpr double kRangeProfileFloorDb = -400.0;

/**
 * Response of the filter steered at the target bin to a unit echo from every
 * candidate bin, |wᴴ J_n x|², normalized to the peak and expressed in dB.
 *
 * The AMF covariance is built from clutter plus noise, so the AMF places a
 * null at each clutter bin while the MF response there is the circular
 * autocorrelation of x.
 */
inline RangeProfile range_profile(const Scenario& s, const CVector& x, FilterKind kind) {
    s.validate();
    const FilterWeights fw = kind == FilterKind::AMF ? amf_weights(s, x) : mf_weights(x, s.n0);
    RangeProfile rp;
    std::vector<double> p(static_cast<std::size_t>(s.n));
    double peak = 0.0;
    for (Eigen::Index n = 0; n < s.n; ++n) {
        p[static_cast<std::size_t>(n)] = std::norm(fw.w.dot(shift_apply(n, x)));
        peak = std::max(peak, p[static_cast<std::size_t>(n)]);
    }
    if (peak == 0.0) throw Error(ErrorCode::ZeroSignal, "range_profile: filter output is zero");
    for (Eigen::Index n = 0; n < s.n; ++n) {
        const double v = p[static_cast<std::size_t>(n)] / peak;
        rp.bins.push_back(n);
        rp.power_db.push_back(v > 0.0 ? std::max(db10(v), kRangeProfileFloorDb) : kRangeProfileFloorDb);
    }
    return rp;
}

} // namespace amfisac
