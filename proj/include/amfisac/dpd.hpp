// SPDX-License-Identifier: Apache-2.0
#pragma once

/**
 * @file dpd.hpp
 * @brief Payload-dependent pilot design by alternating optimization.
 *
 * For a known payload x_d the pilot maximizes xᴴΦx, x = x_p + x_d, over
 * ‖x_p‖² ≤ P_p N. Each outer iteration refreshes the quadratic-transform
 * variable u in closed form and then solves the concave quadratic in x_p with
 * a KKT multiplier found by bisection. Each accepted AO update may be followed by
 * a Newton step on the power sphere, kept only if it raises the SCNR;
 * termination is decided on a pure AO update.
 *
 * The optimizer runs in noise-normalized units (H/σ, unit noise power), so
 * u, c, B, C and γ_p held in DpdState are dimensionless. The objective trace
 * is reported as the SCNR |β₀|² xᴴΦx.
 */

#include "amfisac/amf.hpp"

#include <optional>
#include <vector>

namespace amfisac {

/// u = (H x xᴴ Hᴴ + σ² I)⁻¹ x, evaluated with the rank-one inverse.
inline CVector update_u(const CVector& x, const Channel& h, double sigma_n2) {
    return apply_covariance_inverse(h.apply(x), sigma_n2, x);
}

/// Quadratic-transform surrogate 2Re(uᴴx) − uᴴ(H x xᴴ Hᴴ + σ² I)u.
inline double qt_surrogate(const CVector& u, const CVector& x, const Channel& h, double sigma_n2) {
    return 2.0 * u.dot(x).real() - std::norm(u.dot(h.apply(x))) - sigma_n2 * u.squaredNorm();
}

struct QuadraticCoeffs {
    CVector c;
    CMatrix B;
    double C = 0.0;

    /// 2Re(cᴴ x_p) − x_pᴴ B x_p + C.
    double evaluate(const CVector& x_p) const {
        return 2.0 * c.dot(x_p).real() - x_p.dot(B * x_p).real() + C;
    }
};

/**
 * Coefficients of the surrogate as a function of x_p for fixed u and payload
 * x_d = √P_d U s_d: c = u − HᴴuuᴴH x_d, B = HᴴuuᴴH,
 * C = −|uᴴH x_d|² − σ² uᴴu + 2Re(uᴴ x_d).
 */
inline QuadraticCoeffs quadratic_coeffs(const CVector& u, const Channel& h, const CVector& x_d, double sigma_n2) {
    if (u.size() != h.n || x_d.size() != h.n)
        throw Error(ErrorCode::DimensionMismatch, "quadratic_coeffs: dimensions");
    const CVector hu = h.apply_adjoint(u); // Hᴴu
    const cdouble uhxd = hu.dot(x_d);      // uᴴ H x_d
    QuadraticCoeffs q;
    q.c = u - hu * uhxd;
    q.B = hu * hu.adjoint();
    q.C = -std::norm(uhxd) - sigma_n2 * u.squaredNorm() + 2.0 * u.dot(x_d).real();
    return q;
}

inline QuadraticCoeffs quadratic_coeffs(const CVector& u, const Channel& h, const ModulationBasis& basis,
                                        const CVector& s_d, double P_d, double sigma_n2) {
    return quadratic_coeffs(u, h, std::sqrt(P_d) * basis.modulate(s_d), sigma_n2);
}

struct PilotSubproblemResult {
    CVector x_p;
    double gamma_p = 0.0;
    bool interior = false;         ///< unconstrained maximizer lies inside the budget
    bool zero_linear_term = false; ///< c = 0, so x_p = 0 is optimal
    int bisection_steps = 0;
};

struct BisectionOptions {
    int max_doublings = 200;
    int max_steps = 200;
};

/**
 * max 2Re(cᴴx) − xᴴBx s.t. ‖x‖² ≤ budget.
 *
 * x(γ) = (B + γI)⁻¹c and ‖x(γ)‖² = Σ_i |v_iᴴc|²/(λ_i + γ)², which is strictly
 * decreasing in γ; γ is bracketed by doubling and bisected until the bracket
 * collapses in floating point, then the feasible end is taken.
 */
inline PilotSubproblemResult solve_pilot_subproblem(const CVector& c, const CMatrix& B, double budget,
                                                    const BisectionOptions& opts = {}) {
    if (B.rows() != c.size() || B.cols() != c.size())
        throw Error(ErrorCode::DimensionMismatch, "solve_pilot_subproblem: dimensions");
    if (!(budget > 0.0)) throw Error(ErrorCode::InvalidScenario, "solve_pilot_subproblem: budget must be > 0");
    PilotSubproblemResult r;
    const double c_norm = c.norm();
    if (c_norm == 0.0) {
        r.x_p = CVector::Zero(c.size());
        r.zero_linear_term = true;
        return r;
    }
    const auto eig = hermitian_eigen(B);
    const double lam_max = std::max(eig.values.cwiseAbs().maxCoeff(), 0.0);
    RVector lam = eig.values;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        if (lam(i) < 1e-13 * lam_max) lam(i) = 0.0;
    const RVector w = (eig.vectors.adjoint() * c).cwiseAbs2(); // |v_iᴴ c|²

    auto norm2 = [&](double g) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < lam.size(); ++i) {
            if (w(i) == 0.0) continue;
            const double den = lam(i) + g;
            if (den == 0.0) return std::numeric_limits<double>::infinity();
            s += w(i) / (den * den);
        }
        return s;
    };
    auto solution = [&](double g) {
        CVector coef = eig.vectors.adjoint() * c;
        for (Eigen::Index i = 0; i < lam.size(); ++i) coef(i) = lam(i) + g == 0.0 ? 0.0 : coef(i) / (lam(i) + g);
        return CVector(eig.vectors * coef);
    };

    if (norm2(0.0) <= budget) {
        r.interior = true;
        r.gamma_p = 0.0;
        r.x_p = solution(0.0);
        return r;
    }
    double lo = 0.0;
    double hi = 1.0;
    int doublings = 0;
    while (norm2(hi) > budget) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > opts.max_doublings)
            throw Error(ErrorCode::BisectionFailure, "solve_pilot_subproblem: no upper bracket");
    }
    int steps = 0;
    while (steps < opts.max_steps) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (norm2(mid) > budget ? lo : hi) = mid;
        ++steps;
    }
    r.gamma_p = hi;
    r.bisection_steps = steps;
    r.x_p = solution(hi);
    const double achieved = r.x_p.squaredNorm();
    if (!(std::abs(achieved - budget) <= 1e-9 * budget)) {
        // Rescale onto the sphere; the multiplier is already at machine precision.
        r.x_p *= std::sqrt(budget / achieved);
    }
    return r;
}

struct DpdOptions {
    int max_iterations = 100;
    double tolerance = 1e-8;
    bool newton_refine = true; ///< safeguarded Newton step on the sphere after each AO update
    int max_backtracks = 11;
    std::optional<CVector> x_p_init; ///< defaults to the all-one pilot
    BisectionOptions bisection;
};

struct DpdState {
    CVector u;
    CVector x_p;
    CVector c;
    CMatrix B;
    double C = 0.0;
    double gamma_p = 0.0;
    std::vector<double> objective_trace; ///< SCNR after each accepted iterate (index 0: initial pilot)
    int iterations = 0;
    bool converged = false;
    bool interior = false;
    bool zero_linear_term = false;
    double scnr() const { return objective_trace.empty() ? 0.0 : objective_trace.back(); }
};

/// Channel with every gain divided by σ, so the noise power becomes 1.
inline Channel normalized_channel(const Channel& h, double sigma_n2) {
    std::vector<long long> offsets(h.offsets.begin(), h.offsets.end());
    std::vector<cdouble> gains(h.gains);
    const double scale = 1.0 / std::sqrt(sigma_n2);
    for (auto& g : gains) g *= scale;
    return make_channel(h.n, offsets, gains);
}

namespace detail {

/// Real gradient of xᴴx − |xᴴHx|²/(1 + ‖Hx‖²) w.r.t. [Re x_p; Im x_p], with unit noise.
inline RVector normalized_scnr_gradient(const Channel& h, const CVector& x_d, const CVector& x_p) {
    const CVector x = x_p + x_d;
    const CVector hx = h.apply(x);
    const CVector hhx = h.apply_adjoint(x);
    const cdouble a = x.dot(hx);
    const double den = 1.0 + hx.squaredNorm();
    const CVector g = x - ((std::conj(a) * hx + a * hhx) * den - std::norm(a) * h.apply_adjoint(hx)) / (den * den);
    const Eigen::Index n = x.size();
    RVector r(2 * n);
    r.head(n) = 2.0 * g.real();
    r.tail(n) = 2.0 * g.imag();
    return r;
}

/**
 * Newton direction for the SCNR restricted to the sphere ‖x_p‖ = const, from a
 * central-difference Hessian of the analytic gradient. Positive-curvature
 * tangent directions are flipped so the step is always an ascent direction.
 */
inline CVector sphere_newton_step(const Channel& h, const CVector& x_d, const CVector& x_p) {
    const Eigen::Index n = x_p.size();
    const Eigen::Index m = 2 * n;
    auto to_complex = [n](const RVector& z) {
        CVector c(n);
        for (Eigen::Index i = 0; i < n; ++i) c(i) = cdouble(z(i), z(n + i));
        return c;
    };
    RVector z(m);
    z.head(n) = x_p.real();
    z.tail(n) = x_p.imag();
    const double zn2 = z.squaredNorm();
    const RVector g = normalized_scnr_gradient(h, x_d, x_p);
    const double step = 1e-5 * std::sqrt(zn2);
    Eigen::MatrixXd hess(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        RVector e = RVector::Zero(m);
        e(j) = step;
        hess.col(j) = (normalized_scnr_gradient(h, x_d, to_complex(z + e)) -
                       normalized_scnr_gradient(h, x_d, to_complex(z - e))) /
                      (2.0 * step);
    }
    hess = 0.5 * (hess + hess.transpose()).eval();
    const Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(m, m) - z * z.transpose() / zn2;
    const Eigen::MatrixXd riem =
        proj * (hess - (z.dot(g) / zn2) * Eigen::MatrixXd::Identity(m, m)) * proj;
    const RVector rg = proj * g;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(riem);
    const double floor = 1e-12 * es.eigenvalues().cwiseAbs().maxCoeff();
    const RVector unit = z / std::sqrt(zn2);
    RVector eta = RVector::Zero(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto v = es.eigenvectors().col(i);
        if (std::abs(v.dot(unit)) > 0.5) continue; // normal direction
        const double curv = std::max(std::abs(es.eigenvalues()(i)), floor);
        if (curv == 0.0) continue;
        eta += v * (v.dot(rg) / curv);
    }
    return to_complex(eta);
}

} // namespace detail

inline DpdState dpd_optimize(const Scenario& s, const CVector& x_d, const DpdOptions& opts = {}) {
    s.validate();
    if (x_d.size() != s.n) throw Error(ErrorCode::DimensionMismatch, "dpd_optimize: payload length");
    const Channel h = normalized_channel(build_channel(s), s.sigma_n2);
    const double budget = s.P_p * static_cast<double>(s.n);
    const double scale = std::norm(s.beta0) / s.sigma_n2;
    auto scnr = [&](const CVector& x) { return scale * instantaneous_scnr(h, 1.0, 1.0, x).gamma; };

    DpdState st;
    st.x_p = opts.x_p_init ? *opts.x_p_init : all_one_pilot(s.n, s.P_p);
    if (st.x_p.size() != s.n) throw Error(ErrorCode::DimensionMismatch, "dpd_optimize: initial pilot length");
    if (st.x_p.squaredNorm() > budget * (1.0 + 1e-12))
        throw Error(ErrorCode::InvalidScenario, "dpd_optimize: initial pilot exceeds the power budget");
    st.objective_trace.push_back(scnr(st.x_p + x_d));

    const double radius = std::sqrt(budget);
    for (int it = 0; it < opts.max_iterations; ++it) {
        const CVector x = st.x_p + x_d;
        const CVector u = update_u(x, h, 1.0);
        const auto q = quadratic_coeffs(u, h, x_d, 1.0);
        const auto sub = solve_pilot_subproblem(q.c, q.B, budget, opts.bisection);
        const double prev = st.objective_trace.back();
        const double cur = scnr(sub.x_p + x_d);
        st.iterations = it + 1;
        if (cur < prev) {
            // Ascent is exact in theory; a round-off dip means the iterate has converged.
            // Within tolerance the AO solution is kept so (c, B, γ_p) certify the returned pilot.
            st.converged = true;
            if (prev - cur <= opts.tolerance * std::abs(prev)) {
                st.u = u;
                st.c = q.c;
                st.B = q.B;
                st.C = q.C;
                st.gamma_p = sub.gamma_p;
                st.interior = sub.interior;
                st.zero_linear_term = sub.zero_linear_term;
                st.x_p = sub.x_p;
            }
            break;
        }
        st.u = u;
        st.c = q.c;
        st.B = q.B;
        st.C = q.C;
        st.gamma_p = sub.gamma_p;
        st.interior = sub.interior;
        st.zero_linear_term = sub.zero_linear_term;
        st.x_p = sub.x_p;
        if (std::abs(cur - prev) <= opts.tolerance * std::abs(cur)) {
            st.objective_trace.push_back(cur);
            st.converged = true;
            break;
        }
        double best = cur;
        if (opts.newton_refine && !sub.interior && !sub.zero_linear_term) {
            const CVector step = detail::sphere_newton_step(h, x_d, st.x_p);
            for (int k = 0; k < opts.max_backtracks; ++k) {
                const double t = std::ldexp(1.0, -k);
                CVector y = st.x_p + t * step;
                y *= radius / y.norm();
                const double val = scnr(y + x_d);
                if (val > best) {
                    best = val;
                    st.x_p = y;
                    break;
                }
            }
        }
        st.objective_trace.push_back(best);
    }
    return st;
}

inline DpdState dpd_optimize(const Scenario& s, const CVector& s_d, const ModulationBasis& basis,
                             const DpdOptions& opts = {}) {
    return dpd_optimize(s, std::sqrt(s.P_d) * basis.modulate(s_d), opts);
}

struct DpdUpperBound {
    double gamma_ub = 0.0;
    CVector x_p_ub;
};

/// Clutter-free optimum: pilot aligned with the payload at full power.
inline DpdUpperBound dpd_upper_bound(const CVector& x_d, double P_p, cdouble beta0, double sigma_n2) {
    const double nd = x_d.norm();
    if (nd == 0.0) throw Error(ErrorCode::ZeroPayload, "dpd_upper_bound: payload is zero");
    const double root = std::sqrt(P_p * static_cast<double>(x_d.size()));
    DpdUpperBound ub;
    ub.x_p_ub = (root / nd) * x_d;
    ub.gamma_ub = std::norm(beta0) / sigma_n2 * std::pow(1.0 + root / nd, 2) * nd * nd;
    return ub;
}

} // namespace amfisac
