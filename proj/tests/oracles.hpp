// SPDX-License-Identifier: Apache-2.0
#pragma once

// Brute-force reference computations used only by the test suites.

#include "amfisac/rmt.hpp"

#include <functional>

namespace oracle {

using namespace amfisac;

/// Calls f(s) for every payload in alphabet^N (mixed-radix enumeration).
inline void for_each_payload(const Constellation& c, Eigen::Index n, const std::function<void(const CVector&)>& f) {
    const std::size_t m = c.alphabet.size();
    std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
    CVector s(n);
    while (true) {
        for (Eigen::Index i = 0; i < n; ++i) s(i) = c.alphabet[idx[static_cast<std::size_t>(i)]];
        f(s);
        std::size_t pos = 0;
        while (pos < idx.size() && ++idx[pos] == m) idx[pos++] = 0;
        if (pos == idx.size()) break;
    }
}

/// Exact E|xᴴHx|² by enumeration, x = x_p + √P_d U s.
inline double enumerated_quadratic_moment(const CMatrix& h, const CVector& x_p, const CMatrix& u,
                                          const Constellation& c, double P_d) {
    double sum = 0.0;
    double count = 0.0;
    for_each_payload(c, x_p.size(), [&](const CVector& s) {
        const CVector x = x_p + std::sqrt(P_d) * (u * s);
        sum += std::norm(x.dot(h * x));
        count += 1.0;
    });
    return sum / count;
}

/// Exact payload-averaged SCNR by enumeration, using the direct inverse.
inline double enumerated_avg_scnr(const CMatrix& h, cdouble beta0, double sigma_n2, const CVector& x_p,
                                  const CMatrix& u, const Constellation& c, double P_d) {
    double sum = 0.0;
    double count = 0.0;
    for_each_payload(c, x_p.size(), [&](const CVector& s) {
        const CVector x = x_p + std::sqrt(P_d) * (u * s);
        const CVector hx = h * x;
        CMatrix a = hx * hx.adjoint();
        a.diagonal().array() += sigma_n2;
        sum += std::norm(beta0) * x.dot(a.ldlt().solve(x)).real();
        count += 1.0;
    });
    return sum / count;
}

/// Naive b_k: Σ_n |V_{m,n}|² exp(−i2πkn/N), V = Uᴴ Fᴴ, with F built entry by entry.
inline CVector naive_b(const CMatrix& u, long long k) {
    const Eigen::Index n = u.rows();
    CMatrix f(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
            f(a, b) = std::polar(1.0 / std::sqrt(static_cast<double>(n)),
                                 -2.0 * kPi * static_cast<double>(a * b) / static_cast<double>(n));
    const CMatrix v = u.adjoint() * f.adjoint();
    CVector b = CVector::Zero(n);
    for (Eigen::Index m = 0; m < n; ++m)
        for (Eigen::Index j = 0; j < n; ++j)
            b(m) += std::norm(v(m, j)) *
                    std::polar(1.0, -2.0 * kPi * static_cast<double>(k * j) / static_cast<double>(n));
    return b;
}

/// Random Hermitian direction with unit Frobenius norm.
inline CMatrix random_hermitian(Eigen::Index n, SeededRng& rng) {
    CMatrix a(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) a(i, j) = rng.complex_normal();
    a = 0.5 * (a + a.adjoint()).eval();
    return a / a.norm();
}

} // namespace oracle
