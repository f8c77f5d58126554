// SPDX-License-Identifier: Apache-2.0
#pragma once

/**
 * @file rmt.hpp
 * @brief Large-N deterministic equivalent of the payload-averaged SCNR.
 *
 * Formula sheet (data covariance P_d I, D = diag(P_d |λ_i|²), M = Λ Ω_v Λᴴ):
 *
 *     Ψ  = [σ² (I + t̃ D)]⁻¹            ψ̃ = [σ² (1 + tr(D T))]⁻¹
 *     T  = (Ψ⁻¹ + σ² ψ̃ M)⁻¹            t̃ = (ψ̃⁻¹ + σ² tr(Ψ M))⁻¹
 *
 *     ρ̃  = σ⁻² (1 − N + σ² tr T)
 *     γ̄  = (|β₀|²/σ²) (N P_d + tr Ω − ρ̃ η),     η = E|xᴴ H x|²
 *
 * Ω_v is Ω itself (FixedPointVariant::AsStated) or F Ω Fᴴ, i.e. Ω expressed in
 * the eigenbasis of the circulant H (FixedPointVariant::Rotated).
 */

#include "amfisac/signals.hpp"

#include <algorithm>
#include <vector>

namespace amfisac {

/// H = Fᴴ diag(λ) F. Both unitary factors equal Fᴴ for a circulant H.
struct ChannelSpectrum {
    CVector lambda;
    CMatrix svd_left;
    CMatrix svd_right;

    Eigen::Index n() const { return lambda.size(); }
    CMatrix reconstruct() const { return svd_left * lambda.asDiagonal() * svd_right.adjoint(); }
};

inline ChannelSpectrum make_spectrum(const Channel& h) {
    ChannelSpectrum sp;
    sp.lambda = h.eigenvalues;
    sp.svd_left = dft_matrix(h.n).adjoint();
    sp.svd_right = sp.svd_left;
    return sp;
}

enum class FixedPointVariant { AsStated, Rotated };

inline std::string to_string(FixedPointVariant v) { return v == FixedPointVariant::AsStated ? "as-stated" : "rotated"; }

struct FixedPointOptions {
    double P_d = 1.0;
    FixedPointVariant variant = FixedPointVariant::Rotated;
    double tolerance = 1e-12;
    int max_sweeps = 10000;
    double damping = 0.5;
    double residual_limit = 1e-10;
};

struct FixedPointSolution {
    CMatrix T;
    double t_tilde = 0.0;
    RVector Psi; ///< diagonal of Ψ
    double psi_tilde = 0.0;
    double residual = 0.0;
    int iterations = 0;

    // Problem data the solution belongs to.
    RVector d; ///< variance profile P_d |λ_i|²
    CMatrix M; ///< Λ Ω_v Λᴴ
    double sigma_n2 = 0.0;

    double trace_T() const { return T.trace().real(); }

    /// σ⁻²(1 − N + σ² tr T), evaluated without the cancellation of that form.
    double rho_tilde() const {
        const double tr_psi_m = (Psi.cast<cdouble>().asDiagonal() * M).trace().real();
        const double tr_m_t = (M * T).trace().real();
        return t_tilde + t_tilde * tr_psi_m - psi_tilde * tr_m_t;
    }
    double rho_tilde_direct() const {
        return (1.0 - static_cast<double>(T.rows()) + sigma_n2 * trace_T()) / sigma_n2;
    }
};

/// Ω as seen by the fixed-point system for the chosen variant.
inline CMatrix variant_omega(const CMatrix& omega, FixedPointVariant variant) {
    if (variant == FixedPointVariant::AsStated) return omega;
    const CMatrix f = dft_matrix(omega.rows());
    return f * omega * f.adjoint();
}

namespace detail {

inline CMatrix fp_solve_T(const RVector& psi, double psi_tilde, const CMatrix& m, double sigma_n2) {
    CMatrix a = sigma_n2 * psi_tilde * m;
    a.diagonal() += psi.cwiseInverse().cast<cdouble>();
    a = hermitian_part(a);
    Eigen::LLT<CMatrix> llt(a);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::NotPositiveDefinite, "fixed point: Ψ⁻¹ + σ²ψ̃M is not positive definite");
    return hermitian_part(llt.solve(CMatrix::Identity(a.rows(), a.cols())));
}

struct FpImage {
    RVector psi;
    double psi_tilde;
    CMatrix T;
    double t_tilde;
};

/// One application of the fixed-point map to (T, t̃).
inline FpImage fp_map(const CMatrix& t, double t_tilde, const RVector& d, const CMatrix& m, double sigma_n2) {
    FpImage out;
    out.psi = ((RVector::Ones(d.size()) + t_tilde * d) * sigma_n2).cwiseInverse();
    const double tr_dt = (d.cast<cdouble>().asDiagonal() * t).trace().real();
    out.psi_tilde = 1.0 / (sigma_n2 * (1.0 + tr_dt));
    out.T = fp_solve_T(out.psi, out.psi_tilde, m, sigma_n2);
    const double tr_psi_m = (out.psi.cast<cdouble>().asDiagonal() * m).trace().real();
    out.t_tilde = 1.0 / (1.0 / out.psi_tilde + sigma_n2 * tr_psi_m);
    return out;
}

inline double max_rel_change(const CMatrix& a, const CMatrix& b) {
    const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
    return scale == 0.0 ? 0.0 : (a - b).cwiseAbs().maxCoeff() / scale;
}

inline double rel_change(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

} // namespace detail

/// Max relative elementwise mismatch after substituting (T, t̃) into both sides of the system.
inline double fixed_point_residual(const FixedPointSolution& fp) {
    const auto img = detail::fp_map(fp.T, fp.t_tilde, fp.d, fp.M, fp.sigma_n2);
    return std::max({detail::max_rel_change(img.T, fp.T), detail::rel_change(img.t_tilde, fp.t_tilde),
                     detail::rel_change(img.psi_tilde, fp.psi_tilde),
                     (img.psi - fp.Psi).cwiseAbs().maxCoeff() / fp.Psi.cwiseAbs().maxCoeff()});
}

struct FixedPointStart {
    CMatrix T;
    double t_tilde = 0.0;
};

/**
 * Solve the coupled system by sweeping the map from t̃ = 0, T = σ⁻² I (or a
 * caller-supplied start). Once the update size stops shrinking, sweeps are
 * damped by `damping`.
 */
inline FixedPointSolution solve_fixed_point(const ChannelSpectrum& spectrum, const CMatrix& omega, double sigma_n2,
                                            const FixedPointOptions& opts = {},
                                            const FixedPointStart* start = nullptr) {
    const Eigen::Index n = spectrum.n();
    if (n == 0) throw Error(ErrorCode::EmptyInput, "solve_fixed_point: empty spectrum");
    if (omega.rows() != n || omega.cols() != n)
        throw Error(ErrorCode::DimensionMismatch, "solve_fixed_point: Ω has the wrong shape");
    if (!(sigma_n2 > 0.0)) throw Error(ErrorCode::InvalidScenario, "solve_fixed_point: σ² must be > 0");
    require_hermitian(omega, "solve_fixed_point: Ω");

    FixedPointSolution fp;
    fp.sigma_n2 = sigma_n2;
    fp.d = opts.P_d * spectrum.lambda.cwiseAbs2();
    const CMatrix omega_v = variant_omega(omega, opts.variant);
    fp.M = hermitian_part(spectrum.lambda.asDiagonal() * omega_v * spectrum.lambda.conjugate().asDiagonal());

    CMatrix t = start ? start->T : CMatrix(CMatrix::Identity(n, n) / sigma_n2);
    double t_tilde = start ? start->t_tilde : 0.0;
    double weight = 1.0;
    double last_change = std::numeric_limits<double>::infinity();
    int sweep = 0;
    for (; sweep < opts.max_sweeps; ++sweep) {
        const auto img = detail::fp_map(t, t_tilde, fp.d, fp.M, sigma_n2);
        const double change = std::max(detail::max_rel_change(img.T, t), detail::rel_change(img.t_tilde, t_tilde));
        if (change > last_change && weight == 1.0) weight = opts.damping;
        last_change = change;
        t = (1.0 - weight) * t + weight * img.T;
        t_tilde = (1.0 - weight) * t_tilde + weight * img.t_tilde;
        if (change <= opts.tolerance) break;
    }
    // Final undamped pass so Ψ, ψ̃ are consistent with the returned T, t̃.
    const auto img = detail::fp_map(t, t_tilde, fp.d, fp.M, sigma_n2);
    fp.T = img.T;
    fp.t_tilde = img.t_tilde;
    fp.Psi = img.psi;
    fp.psi_tilde = img.psi_tilde;
    fp.iterations = sweep + 1;
    // Ψ, ψ̃ follow from the previous (T, t̃); refresh them from the returned pair.
    fp.Psi = ((RVector::Ones(n) + fp.t_tilde * fp.d) * sigma_n2).cwiseInverse();
    fp.psi_tilde = 1.0 / (sigma_n2 * (1.0 + (fp.d.cast<cdouble>().asDiagonal() * fp.T).trace().real()));
    fp.residual = fixed_point_residual(fp);
    if (!(fp.residual <= opts.residual_limit) || fp.t_tilde < 0.0)
        throw Error(ErrorCode::NoConvergence, "solve_fixed_point: residual " + std::to_string(fp.residual) +
                                                  " after " + std::to_string(fp.iterations) + " sweeps");
    return fp;
}

// ---------------------------------------------------------------------------
// Basis Fourier vectors and moments
// ---------------------------------------------------------------------------

/// Table whose column k is b_k, b_k[m] = Σ_n |V_{m,n}|² e^{−i2πkn/N} with V = Uᴴ Fᴴ.
inline CMatrix basis_fourier_table(const ModulationBasis& basis) {
    const Eigen::Index n = basis.n;
    const CMatrix v = basis.U.adjoint() * dft_matrix(n).adjoint();
    CMatrix table(n, n);
    for (Eigen::Index m = 0; m < n; ++m) {
        const CVector row = v.row(m).cwiseAbs2().transpose().cast<cdouble>();
        table.row(m) = fft(row).transpose();
    }
    return table;
}

inline CVector basis_fourier_b(const ModulationBasis& basis, long long k) {
    return basis_fourier_table(basis).col(wrap_index(k, basis.n));
}

/// diag(Uᴴ H U) from the b table: Σ_g β_g conj(b_{k_g}).
inline CVector basis_channel_diagonal(const Channel& h, const CMatrix& b_table) {
    CVector diag = CVector::Zero(h.n);
    for (const auto& [k, beta] : h.grouped()) diag += beta * b_table.col(k).conjugate();
    return diag;
}

/**
 * E|xᴴHx|² for x = x_p + √P_d U s, s i.i.d. zero-mean, unit-variance, zero
 * pseudo-variance with E|s|⁴ = κ and vanishing odd moments.
 *
 * Written in terms of Ω = x_p x_pᴴ so it also serves as η(Ω) for any Hermitian Ω.
 */
inline double expected_quadratic_moment_omega(const Channel& h, const CMatrix& omega, const CMatrix& b_table,
                                              double kappa, double P_d) {
    if (omega.rows() != h.n || b_table.rows() != h.n)
        throw Error(ErrorCode::DimensionMismatch, "expected_quadratic_moment: dimensions");
    const CMatrix hd = h.dense();
    const cdouble tr_h = hd.trace();
    const cdouble a = (hd * omega).trace();
    const double pilot_cross = ((hd * hd.adjoint() + hd.adjoint() * hd) * omega).trace().real();
    const double data = std::norm(tr_h) + hd.squaredNorm() +
                        (kappa - 2.0) * basis_channel_diagonal(h, b_table).squaredNorm();
    return std::norm(a) + 2.0 * P_d * (std::conj(a) * tr_h).real() + P_d * pilot_cross + P_d * P_d * data;
}

inline double expected_quadratic_moment(const Channel& h, const CVector& x_p, const ModulationBasis& basis,
                                        double kappa, double P_d) {
    if (x_p.size() != h.n || basis.n != h.n)
        throw Error(ErrorCode::DimensionMismatch, "expected_quadratic_moment: dimensions");
    return expected_quadratic_moment_omega(h, x_p * x_p.adjoint(), basis_fourier_table(basis), kappa, P_d);
}

/// η: the quadratic moment at the pilot covariance Ω.
inline double eta(const Channel& h, const CMatrix& omega, double kappa, const ModulationBasis& basis,
                  double P_d = 1.0) {
    if (basis.n != h.n) throw Error(ErrorCode::DimensionMismatch, "eta: basis dimension");
    return expected_quadratic_moment_omega(h, omega, basis_fourier_table(basis), kappa, P_d);
}

// ---------------------------------------------------------------------------
// Average SCNR
// ---------------------------------------------------------------------------

struct DetEquivReport {
    double gamma_bar = 0.0;
    double eta = 0.0;
    double rho_tilde = 0.0;
    double gamma_ub = 0.0;
    std::vector<double> b_norms;
    FixedPointSolution fixed_point;
};

/// (|β₀|²/σ²)(N P_d + tr Ω).
inline double scnr_upper_bound(const Scenario& s, const CMatrix& omega) {
    return std::norm(s.beta0) / s.sigma_n2 * (static_cast<double>(s.n) * s.P_d + omega.trace().real());
}

/// Everything needed to evaluate γ̄ repeatedly for one scenario and basis.
struct AvgScnrModel {
    Scenario scenario;
    Channel channel;
    ChannelSpectrum spectrum;
    CMatrix b_table;
    double kappa = 1.0;
    FixedPointOptions fp_options;

    AvgScnrModel(const Scenario& s, const ModulationBasis& basis, const Constellation& c,
                 FixedPointVariant variant = FixedPointVariant::Rotated)
        : scenario(s), channel(build_channel(s)), spectrum(make_spectrum(channel)),
          b_table(basis_fourier_table(basis)), kappa(c.kappa) {
        if (basis.n != s.n) throw Error(ErrorCode::DimensionMismatch, "AvgScnrModel: basis dimension");
        fp_options.P_d = s.P_d;
        fp_options.variant = variant;
    }

    double eta(const CMatrix& omega) const {
        return expected_quadratic_moment_omega(channel, omega, b_table, kappa, scenario.P_d);
    }

    DetEquivReport evaluate(const CMatrix& omega, const FixedPointStart* start = nullptr) const {
        DetEquivReport r;
        r.fixed_point = solve_fixed_point(spectrum, omega, scenario.sigma_n2, fp_options, start);
        r.eta = eta(omega);
        r.rho_tilde = r.fixed_point.rho_tilde();
        r.gamma_ub = scnr_upper_bound(scenario, omega);
        r.gamma_bar = r.gamma_ub - std::norm(scenario.beta0) / scenario.sigma_n2 * r.rho_tilde * r.eta;
        for (const auto& p : scenario.clutter)
            r.b_norms.push_back(b_table.col(wrap_index(p.bin - scenario.n0, scenario.n)).squaredNorm());
        return r;
    }
};

inline DetEquivReport deterministic_avg_scnr(const Scenario& s, const CMatrix& omega, const ModulationBasis& basis,
                                             const Constellation& c,
                                             FixedPointVariant variant = FixedPointVariant::Rotated) {
    return AvgScnrModel(s, basis, c, variant).evaluate(omega);
}

} // namespace amfisac
