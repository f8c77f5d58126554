// SPDX-License-Identifier: Apache-2.0
#pragma once

/**
 * @file dpi.hpp
 * @brief Payload-independent pilot design: Riemannian ascent of the
 *        deterministic-equivalent average SCNR over rank-one pilot covariances.
 *
 * Gradients use the convention dγ̄ = Re tr(Δᴴ dΩ) for Hermitian dΩ, with Δ
 * Hermitian; this is the conjugate-coordinate gradient ∂γ̄/∂Ω*.
 */

#include "amfisac/rmt.hpp"

#include <optional>
#include <vector>

namespace amfisac {

// ---------------------------------------------------------------------------
// Gradients
// ---------------------------------------------------------------------------

/**
 * Gradient of η(Ω) = |tr HΩ|² + 2P_d Re(conj(tr HΩ) tr H) + P_d tr((HHᴴ + HᴴH)Ω) + const:
 * Δ_η = tr(HᴴΩ)H + tr(HΩ)Hᴴ + P_d(HHᴴ + HᴴH) + P_d(conj(tr H)H + tr H·Hᴴ).
 */
inline CMatrix grad_eta(const CMatrix& h, const CMatrix& omega, double P_d = 1.0) {
    if (h.rows() != omega.rows() || h.cols() != omega.cols() || h.rows() != h.cols())
        throw Error(ErrorCode::DimensionMismatch, "grad_eta: dimensions");
    const cdouble a = (h * omega).trace();
    const cdouble tr_h = h.trace();
    return std::conj(a) * h + a * h.adjoint() + P_d * (h * h.adjoint() + h.adjoint() * h) +
           P_d * (std::conj(tr_h) * h + tr_h * h.adjoint());
}

/// Derivatives of (t̃, ψ̃, tr T) along one Hermitian direction dΩ.
struct FixedPointDerivative {
    double t_tilde = 0.0;
    double psi_tilde = 0.0;
    double trace_T = 0.0;
    double residual = 0.0;
    int sweeps = 0;
};

namespace detail {

/// Traces of the converged fixed point that enter its linearization.
struct FpSensitivity {
    CMatrix TDT;
    CMatrix T2;
    double A1, A2, A3, B1, B2;
    double sigma2, t, psi;
};

inline FpSensitivity fp_sensitivity(const FixedPointSolution& fp) {
    FpSensitivity s;
    const auto D = fp.d.cast<cdouble>().asDiagonal();
    const CMatrix DT = D * fp.T;
    const CMatrix MT = fp.M * fp.T;
    s.TDT = fp.T * DT;
    s.T2 = fp.T * fp.T;
    s.A1 = (DT * DT).trace().real();
    s.A2 = (DT * MT).trace().real();
    s.A3 = (fp.Psi.cwiseProduct(fp.d).cwiseProduct(fp.Psi).cast<cdouble>().asDiagonal() * fp.M).trace().real();
    s.B1 = (D * s.T2).trace().real();
    s.B2 = (fp.M * s.T2).trace().real();
    s.sigma2 = fp.sigma_n2;
    s.t = fp.t_tilde;
    s.psi = fp.psi_tilde;
    return s;
}

/// Map an eigen-domain matrix X (acting on M = ΛΩ_vΛᴴ) to the Ω-domain gradient.
inline CMatrix pull_back(const CMatrix& x, const ChannelSpectrum& sp, FixedPointVariant variant) {
    const CMatrix g = sp.lambda.conjugate().asDiagonal() * x * sp.lambda.asDiagonal();
    if (variant == FixedPointVariant::AsStated) return hermitian_part(g);
    const CMatrix f = dft_matrix(sp.n());
    return hermitian_part(f.adjoint() * g * f);
}

/// Inverse of the 2×2 linear system for (t̃', ψ̃').
inline Eigen::Matrix2d derivative_system_inverse(const FpSensitivity& s) {
    const double s4 = s.sigma2 * s.sigma2;
    Eigen::Matrix2d a;
    a << 1.0 - s.t * s.t * s4 * s.A3, -(s.t * s.t) / (s.psi * s.psi), -s.psi * s.psi * s4 * s.A1,
        1.0 - s.psi * s.psi * s4 * s.A2;
    return a.inverse();
}

} // namespace detail

/**
 * Directional derivative of the fixed point by sweeping its linearization
 * from zero: with K = ΛdΩ_vΛᴴ,
 *   Ψ' = −σ² t̃' DΨ²,  ψ̃' = −σ²ψ̃² tr(DT'),
 *   T' = −σ² T(t̃'D + ψ̃'M + ψ̃K)T,
 *   t̃' = −t̃²(−ψ̃'/ψ̃² + σ² tr(Ψ'M) + σ² tr(ΨK)).
 */
inline FixedPointDerivative fixed_point_derivative(const FixedPointSolution& fp, const ChannelSpectrum& sp,
                                                   const CMatrix& d_omega, FixedPointVariant variant,
                                                   double tolerance = 1e-9, int max_sweeps = 1000) {
    const Eigen::Index n = sp.n();
    if (d_omega.rows() != n || d_omega.cols() != n)
        throw Error(ErrorCode::DimensionMismatch, "fixed_point_derivative: direction shape");
    const double s2 = fp.sigma_n2;
    const auto D = fp.d.cast<cdouble>().asDiagonal();
    const CMatrix K = sp.lambda.asDiagonal() * variant_omega(d_omega, variant) * sp.lambda.conjugate().asDiagonal();
    const double tr_psi_k = (fp.Psi.cast<cdouble>().asDiagonal() * K).trace().real();
    const RVector dpsi2 = fp.d.cwiseProduct(fp.Psi).cwiseProduct(fp.Psi);
    const double tr_dpsi2_m = (dpsi2.cast<cdouble>().asDiagonal() * fp.M).trace().real();

    auto step = [&](double a, const CMatrix& tp, double& a_out, double& b_out, CMatrix& tp_out) {
        const double b = -s2 * fp.psi_tilde * fp.psi_tilde * (D * tp).trace().real();
        tp_out = -s2 * fp.T * (a * CMatrix(D) + b * fp.M + fp.psi_tilde * K) * fp.T;
        a_out = -fp.t_tilde * fp.t_tilde *
                (-b / (fp.psi_tilde * fp.psi_tilde) - s2 * s2 * a * tr_dpsi2_m + s2 * tr_psi_k);
        b_out = b;
    };

    FixedPointDerivative out;
    double a = 0.0, b = 0.0;
    CMatrix tp = CMatrix::Zero(n, n);
    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        double a_new, b_new;
        CMatrix tp_new;
        step(a, tp, a_new, b_new, tp_new);
        const double scale = std::max(std::abs(a_new), 1e-300);
        const double change = std::max(std::abs(a_new - a) / scale, detail::max_rel_change(tp_new, tp));
        a = a_new;
        b = b_new;
        tp = tp_new;
        out.sweeps = sweep;
        if (change <= tolerance * 1e-3) break;
    }
    // Residual by substitution.
    double a_chk, b_chk;
    CMatrix tp_chk;
    step(a, tp, a_chk, b_chk, tp_chk);
    const double a_scale = std::max(std::abs(a), 1e-300);
    out.residual = std::max(std::abs(a_chk - a) / a_scale, detail::max_rel_change(tp_chk, tp));
    if (a == 0.0 && tp.norm() == 0.0) out.residual = 0.0;
    if (!(out.residual <= tolerance))
        throw Error(ErrorCode::NoConvergence, "fixed_point_derivative: residual " + std::to_string(out.residual) +
                                                  " after " + std::to_string(out.sweeps) + " sweeps");
    out.t_tilde = a;
    out.psi_tilde = b_chk;
    out.trace_T = tp.trace().real();
    return out;
}

/// Gradients of t̃, ψ̃ and tr T with respect to Ω, all in the Re tr(Gᴴ dΩ) convention.
struct FixedPointGradients {
    CMatrix t_tilde;
    CMatrix psi_tilde;
    CMatrix trace_T;
};

/**
 * Closed-form gradients from the linearized fixed point. Eliminating T' leaves a
 * 2×2 system in (t̃', ψ̃') whose right side is linear in k₁ = tr(K TDT) and
 * k₂ = tr(KΨ); tr T' adds k₃ = tr(KT²).
 */
inline FixedPointGradients fixed_point_gradients(const FixedPointSolution& fp, const ChannelSpectrum& sp,
                                                 FixedPointVariant variant) {
    const auto s = detail::fp_sensitivity(fp);
    const Eigen::Matrix2d inv = detail::derivative_system_inverse(s);
    const double s2 = s.sigma2, s4 = s2 * s2;
    const double g1 = s4 * s.psi * s.psi * s.psi; // coefficient of k₁ on the ψ̃ row
    const double g2 = -s.t * s.t * s2;             // coefficient of k₂ on the t̃ row
    const CMatrix psi = fp.Psi.cast<cdouble>().asDiagonal();
    // t̃' = inv(0,0) g2 k₂ + inv(0,1) g1 k₁ ; ψ̃' = inv(1,0) g2 k₂ + inv(1,1) g1 k₁
    const CMatrix w_t = inv(0, 1) * g1 * s.TDT + inv(0, 0) * g2 * psi;
    const CMatrix w_psi = inv(1, 1) * g1 * s.TDT + inv(1, 0) * g2 * psi;
    // tr T' = −σ²(B₁ t̃' + B₂ ψ̃' + ψ̃ k₃)
    const CMatrix w_tr = -s2 * (s.B1 * w_t + s.B2 * w_psi + s.psi * s.T2);
    return {detail::pull_back(w_t, sp, variant), detail::pull_back(w_psi, sp, variant),
            detail::pull_back(w_tr, sp, variant)};
}

/// Δ_T: gradient of tr T(Ω).
inline CMatrix grad_trace_T(const ChannelSpectrum& sp, const FixedPointSolution& fp,
                            FixedPointVariant variant = FixedPointVariant::Rotated) {
    return fixed_point_gradients(fp, sp, variant).trace_T;
}

struct GradientBundle {
    CMatrix delta_eta;
    CMatrix delta_T;
    CMatrix delta;
    CMatrix t_prime;   ///< ∂t̃/∂Ω*
    CMatrix psi_prime; ///< ∂ψ̃/∂Ω*
    double gamma_bar = 0.0;
    double eta = 0.0;
    double rho_tilde = 0.0;
    FixedPointSolution fixed_point;
};

/// Δ = (|β₀|²/σ²)[I − ρ̃Δ_η − ηΔ_T].
inline GradientBundle euclidean_grad(const AvgScnrModel& model, const CMatrix& omega,
                                     const FixedPointStart* start = nullptr) {
    const auto rep = model.evaluate(omega, start);
    const auto fg = fixed_point_gradients(rep.fixed_point, model.spectrum, model.fp_options.variant);
    const Scenario& s = model.scenario;
    GradientBundle g;
    g.delta_eta = hermitian_part(grad_eta(model.channel.dense(), omega, s.P_d));
    g.delta_T = fg.trace_T;
    g.t_prime = fg.t_tilde;
    g.psi_prime = fg.psi_tilde;
    g.gamma_bar = rep.gamma_bar;
    g.eta = rep.eta;
    g.rho_tilde = rep.rho_tilde;
    g.fixed_point = rep.fixed_point;
    CMatrix d = -rep.rho_tilde * g.delta_eta - rep.eta * g.delta_T;
    d.diagonal().array() += 1.0;
    g.delta = hermitian_part(std::norm(s.beta0) / s.sigma_n2 * d);
    if (!g.delta.allFinite()) throw Error(ErrorCode::NoConvergence, "euclidean_grad: non-finite gradient");
    return g;
}

/// Central finite-difference gradient of γ̄ on the Hermitian slice (cross-check only; O(N²) fixed-point solves).
inline CMatrix finite_difference_grad(const AvgScnrModel& model, const CMatrix& omega, double eps) {
    const Eigen::Index n = omega.rows();
    CMatrix g(n, n);
    auto f = [&](const CMatrix& o) { return model.evaluate(o).gamma_bar; };
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            CMatrix e = CMatrix::Zero(n, n);
            if (i == j) {
                e(i, i) = 1.0;
                g(i, i) = (f(omega + eps * e) - f(omega - eps * e)) / (2.0 * eps);
                continue;
            }
            // Re/Im parts of Ω_ij, with Ω_ji following.
            e(i, j) = 1.0;
            e(j, i) = 1.0;
            const double dr = (f(omega + eps * e) - f(omega - eps * e)) / (2.0 * eps);
            e(i, j) = kI;
            e(j, i) = -kI;
            const double di = (f(omega + eps * e) - f(omega - eps * e)) / (2.0 * eps);
            g(i, j) = 0.5 * cdouble(dr, di);
            g(j, i) = std::conj(g(i, j));
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Rank-one manifold
// ---------------------------------------------------------------------------

struct TangentProjector {
    CMatrix P_U;
    CMatrix P_V;
    CVector u_max;

    /// P(X) = P_U X P_U + P_U^⊥ X P_V + P_U X P_V^⊥.
    CMatrix apply(const CMatrix& x) const {
        const Eigen::Index n = x.rows();
        const CMatrix qu = CMatrix::Identity(n, n) - P_U;
        const CMatrix qv = CMatrix::Identity(n, n) - P_V;
        return P_U * x * P_U + qu * x * P_V + P_U * x * qv;
    }
};

inline TangentProjector make_tangent_projector(const CMatrix& omega) {
    const auto eig = hermitian_eigen(omega);
    const Eigen::Index n = omega.rows();
    if (n == 0) throw Error(ErrorCode::EmptyInput, "tangent projector: empty matrix");
    const double top = eig.values(n - 1);
    const double second = n > 1 ? eig.values(n - 2) : 0.0;
    if (!(top - second >= 1e-12 * std::max(1.0, std::abs(top))) || !(top > 0.0))
        throw Error(ErrorCode::DegenerateSpectrum, "tangent projector: no separated dominant eigenvalue");
    TangentProjector p;
    p.u_max = eig.vectors.col(n - 1);
    fix_phase(p.u_max);
    p.P_U = p.u_max * p.u_max.adjoint();
    p.P_V = p.P_U;
    return p;
}

struct DpiState {
    CMatrix Omega;
    CVector x_p_factor;
    std::vector<double> objective_trace; ///< γ̄ of each accepted iterate (index 0: start)
    std::vector<double> step_trace;      ///< accepted Armijo step sizes
    std::vector<double> gradient_norm_trace; ///< ‖G‖_F at each iterate the line search started from
    std::vector<CVector> pilot_trace;        ///< x_p factor of each accepted iterate
    int iterations = 0;
    bool converged = false;
    bool line_search_stalled = false;
    bool returned_all_one = false;

    double objective() const { return objective_trace.empty() ? 0.0 : objective_trace.back(); }
};

/// DpiState from a pilot vector.
inline DpiState dpi_state_from_pilot(const CVector& x_p) {
    DpiState st;
    st.x_p_factor = x_p;
    fix_phase(st.x_p_factor);
    st.Omega = st.x_p_factor * st.x_p_factor.adjoint();
    return st;
}

inline CMatrix tangent_project(const CMatrix& x, const DpiState& state) {
    return make_tangent_projector(state.Omega).apply(x);
}

struct Retraction {
    CMatrix Omega;
    CVector x_p;
};

/// Dominant-eigenpair truncation of Ω̃ with the eigenvalue capped at the power budget.
inline Retraction retract(const CMatrix& omega_tilde, double power_budget) {
    const CMatrix h = hermitian_part(omega_tilde);
    if (h.rows() == 0) throw Error(ErrorCode::EmptyInput, "retract: empty matrix");
    const auto ep = dominant_eigenpair(h);
    if (!(ep.value > 1e-14 * h.norm())) throw Error(ErrorCode::ZeroMatrix, "retract: no positive eigenvalue");
    const double mu = std::min(ep.value, power_budget);
    Retraction r;
    r.x_p = std::sqrt(mu) * ep.vector;
    r.Omega = r.x_p * r.x_p.adjoint();
    return r;
}

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

struct DpiOptions {
    int max_iterations = 200;
    double gradient_tolerance = 1e-6; ///< on ‖G‖_F‖Ω‖_F / γ̄
    double objective_tolerance = 1e-8;
    double armijo_constant = 1e-4;
    double backtrack_factor = 0.5;
    int max_backtracks = 50;
    std::optional<CVector> x_p_init; ///< defaults to the all-one pilot
    double start_perturbation = 1e-2; ///< relative size of the seeded kick off the all-one point
    std::uint64_t seed = 0;
    FixedPointVariant variant = FixedPointVariant::Rotated;
    bool bb_step = true; ///< Barzilai-Borwein trial step, capped at ‖Ω‖/‖G‖
};

/// Riemannian gradient at Ω; when the trace is at the budget, the component along P (pure rescaling) is removed.
inline CMatrix riemannian_gradient(const CMatrix& delta, const DpiState& state, double power_budget) {
    const auto proj = make_tangent_projector(state.Omega);
    CMatrix g = hermitian_part(proj.apply(delta));
    const double tr_g = g.trace().real();
    if (state.Omega.trace().real() >= power_budget * (1.0 - 1e-12) && tr_g > 0.0) g -= tr_g * proj.P_U;
    return g;
}

inline DpiState dpi_optimize(const Scenario& s, const ModulationBasis& basis, const Constellation& c,
                             const DpiOptions& opts = {}) {
    s.validate();
    AvgScnrModel model(s, basis, c, opts.variant);
    const double budget = s.P_p * static_cast<double>(s.n);
    const CVector all_one = all_one_pilot(s.n, s.P_p);

    CVector x0;
    if (opts.x_p_init) {
        x0 = *opts.x_p_init;
        if (x0.size() != s.n) throw Error(ErrorCode::DimensionMismatch, "dpi_optimize: initial pilot length");
    } else {
        // The all-one pilot diagonalizes with every circulant H and is a stationary point; start just off it.
        SeededRng rng(opts.seed, 1);
        x0 = all_one + opts.start_perturbation * std::sqrt(s.P_p) * rng.complex_normal_vector(s.n);
        if (x0.squaredNorm() > budget) x0 *= std::sqrt(budget / x0.squaredNorm());
    }
    if (x0.squaredNorm() > budget * (1.0 + 1e-12))
        throw Error(ErrorCode::InvalidScenario, "dpi_optimize: initial pilot exceeds the power budget");

    DpiState st = dpi_state_from_pilot(x0);
    auto g = euclidean_grad(model, st.Omega);
    st.objective_trace.push_back(g.gamma_bar);
    st.pilot_trace.push_back(st.x_p_factor);
    FixedPointStart warm{g.fixed_point.T, g.fixed_point.t_tilde};
    std::optional<CMatrix> prev_rg;
    CMatrix prev_omega;

    for (int it = 0; it < opts.max_iterations; ++it) {
        const CMatrix rg = riemannian_gradient(g.delta, st, budget);
        const double gnorm = rg.norm();
        st.gradient_norm_trace.push_back(gnorm);
        const double f0 = st.objective_trace.back();
        if (gnorm * st.Omega.norm() <= opts.gradient_tolerance * std::abs(f0)) {
            st.converged = true;
            break;
        }
        double alpha = st.Omega.norm() / gnorm;
        if (opts.bb_step && prev_rg) {
            // Barzilai-Borwein length from the last accepted displacement.
            const CMatrix sk = st.Omega - prev_omega;
            const double sy = -frob_inner(sk, rg - *prev_rg);
            if (sy > 0.0) alpha = std::min(alpha, sk.squaredNorm() / sy);
        }
        bool accepted = false;
        Retraction next;
        GradientBundle next_g;
        for (int k = 0; k < opts.max_backtracks; ++k, alpha *= opts.backtrack_factor) {
            try {
                next = retract(st.Omega + alpha * rg, budget);
                next_g = euclidean_grad(model, next.Omega, &warm);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::ZeroMatrix && e.code() != ErrorCode::NoConvergence &&
                    e.code() != ErrorCode::NotPositiveDefinite)
                    throw;
                continue;
            }
            if (next_g.gamma_bar >= f0 + opts.armijo_constant * alpha * gnorm * gnorm) {
                accepted = true;
                break;
            }
        }
        st.iterations = it + 1;
        if (!accepted) {
            st.line_search_stalled = true;
            break;
        }
        prev_rg = rg;
        prev_omega = st.Omega;
        st.Omega = next.Omega;
        st.x_p_factor = next.x_p;
        st.step_trace.push_back(alpha);
        st.objective_trace.push_back(next_g.gamma_bar);
        st.pilot_trace.push_back(next.x_p);
        g = next_g;
        warm = {g.fixed_point.T, g.fixed_point.t_tilde};
        if (std::abs(next_g.gamma_bar - f0) <= opts.objective_tolerance * std::abs(next_g.gamma_bar)) {
            st.converged = true;
            break;
        }
    }

    if (!opts.x_p_init) {
        const double base = model.evaluate(all_one * all_one.adjoint()).gamma_bar;
        if (base > st.objective()) {
            const DpiState ref = dpi_state_from_pilot(all_one);
            st.Omega = ref.Omega;
            st.x_p_factor = ref.x_p_factor;
            st.objective_trace.push_back(base);
            st.pilot_trace.push_back(ref.x_p_factor);
            st.returned_all_one = true;
        }
    }
    return st;
}

} // namespace amfisac
