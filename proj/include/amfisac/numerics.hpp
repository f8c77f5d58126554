// SPDX-License-Identifier: Apache-2.0
#pragma once

/**
 * @file numerics.hpp
 * @brief Dense complex linear-algebra kernel shared by every other module.
 *
 * Everything here is a pure function of its inputs. The only stateful type is
 * SeededRng, which is single-owner: give each thread its own stream id.
 */

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace amfisac {

using cdouble = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

inline constexpr cdouble kI{0.0, 1.0};
inline constexpr double kPi = std::numbers::pi;

enum class ErrorCode {
    NonHermitian,
    NotPositiveDefinite,
    DimensionMismatch,
    EmptyInput,
    UnsupportedOrder,
    DegenerateDelay,
    InvalidScenario,
    SingularCovariance,
    ZeroSignal,
    NoConvergence,
    ZeroLinearTerm,
    BisectionFailure,
    ZeroPayload,
    DegenerateSpectrum,
    ZeroMatrix,
    LineSearchStall,
    NonUnitary,
    ConfigError,
    TooLarge,
    UnknownExperiment,
    IoError,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::NonHermitian: return "NonHermitian";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorCode::DegenerateDelay: return "DegenerateDelay";
    case ErrorCode::InvalidScenario: return "InvalidScenario";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::ZeroSignal: return "ZeroSignal";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ZeroLinearTerm: return "ZeroLinearTerm";
    case ErrorCode::BisectionFailure: return "BisectionFailure";
    case ErrorCode::ZeroPayload: return "ZeroPayload";
    case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::ZeroMatrix: return "ZeroMatrix";
    case ErrorCode::LineSearchStall: return "LineSearchStall";
    case ErrorCode::NonUnitary: return "NonUnitary";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::UnknownExperiment: return "UnknownExperiment";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Library-wide exception; `code()` is what callers branch on.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Numerical tolerances used throughout the library.
struct Tolerances {
    static constexpr double solve = 1e-10;
    static constexpr double decomposition = 1e-9;
    static constexpr double hermitian = 1e-12;
};

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
} // namespace detail

/**
 * Reproducible random stream keyed by (master_seed, stream_id).
 *
 * Uniform and normal draws are produced by hand from the raw 64-bit engine so
 * the sequences are identical across standard-library implementations.
 */
class SeededRng {
public:
    SeededRng(std::uint64_t master_seed, std::uint64_t stream_id)
        : master_seed_(master_seed), stream_id_(stream_id) {
        const std::uint64_t a = detail::splitmix64(master_seed);
        const std::uint64_t b = detail::splitmix64(stream_id ^ 0x5851f42d4c957f2dULL);
        std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                          static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
        engine_.seed(seq);
    }

    std::uint64_t master_seed() const noexcept { return master_seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer on [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        // Rejection sampling keeps the draw exactly uniform.
        const std::uint64_t limit = ~0ULL - (~0ULL % n);
        std::uint64_t r;
        do {
            r = engine_();
        } while (r >= limit);
        return r % n;
    }

    /// Standard real normal via Box-Muller; the spare value is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

    /// Circular complex Gaussian CN(0, variance).
    cdouble complex_normal(double variance = 1.0) {
        const double s = std::sqrt(variance / 2.0);
        const double re = normal();
        const double im = normal();
        return {s * re, s * im};
    }

    CVector complex_normal_vector(Eigen::Index n, double variance = 1.0) {
        CVector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = complex_normal(variance);
        return v;
    }

private:
    std::uint64_t master_seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Checks and small helpers
// ---------------------------------------------------------------------------

inline bool all_finite(const CMatrix& a) { return a.allFinite(); }

/// Max-abs relative Hermitian defect ‖A − Aᴴ‖_max / ‖A‖_max.
inline double hermitian_defect(const CMatrix& a) {
    if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
    const double scale = a.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return (a - a.adjoint()).cwiseAbs().maxCoeff() / scale;
}

inline void require_hermitian(const CMatrix& a, const char* what) {
    if (a.rows() != a.cols())
        throw Error(ErrorCode::DimensionMismatch, std::string(what) + " is not square");
    if (hermitian_defect(a) > Tolerances::hermitian)
        throw Error(ErrorCode::NonHermitian, std::string(what) + " is not Hermitian");
}

inline CMatrix hermitian_part(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

/// Unitary DFT matrix, F(k, n) = exp(−i2πkn/N)/√N.
inline CMatrix dft_matrix(Eigen::Index n) {
    CMatrix f(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index m = 0; m < n; ++m) {
            // Reduce the exponent mod N before evaluating to keep phases exact.
            const auto e = static_cast<double>((k * m) % n);
            f(k, m) = std::polar(scale, -2.0 * kPi * e / static_cast<double>(n));
        }
    return f;
}

/// Unnormalized forward DFT, X_k = Σ_n x_n exp(−i2πkn/N).
inline CVector fft(const CVector& x) {
    if (x.size() <= 1) return x; // kissfft does not handle length 1
    Eigen::FFT<double> engine;
    std::vector<cdouble> in(x.data(), x.data() + x.size());
    std::vector<cdouble> out;
    engine.fwd(out, in);
    return Eigen::Map<const CVector>(out.data(), static_cast<Eigen::Index>(out.size()));
}

/// Inverse of fft(), including the 1/N factor.
inline CVector ifft(const CVector& x) {
    if (x.size() <= 1) return x;
    Eigen::FFT<double> engine;
    std::vector<cdouble> in(x.data(), x.data() + x.size());
    std::vector<cdouble> out;
    engine.inv(out, in);
    return Eigen::Map<const CVector>(out.data(), static_cast<Eigen::Index>(out.size()));
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/**
 * Solve A x = b for Hermitian positive-definite A via Cholesky, with one step
 * of iterative refinement when the first pass misses the residual target.
 */
inline CVector hermitian_solve(const CMatrix& a, const CVector& b) {
    if (a.rows() != a.cols() || a.rows() != b.size())
        throw Error(ErrorCode::DimensionMismatch, "hermitian_solve: shape mismatch");
    require_hermitian(a, "hermitian_solve: A");
    Eigen::LLT<CMatrix> llt(a);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::NotPositiveDefinite, "hermitian_solve: Cholesky failed");
    CVector x = llt.solve(b);
    const double bn = b.norm();
    if (bn == 0.0) return x;
    CVector r = b - a * x;
    if (r.norm() > Tolerances::solve * bn) {
        x += llt.solve(r);
        r = b - a * x;
    }
    if (!x.allFinite() || r.norm() > Tolerances::solve * bn)
        throw Error(ErrorCode::NotPositiveDefinite, "hermitian_solve: residual target missed");
    return x;
}

/// Eigenvalues of the circulant matrix with the given first column, in DFT-bin order.
inline CVector circulant_eigen(const CVector& first_column) {
    if (first_column.size() == 0) throw Error(ErrorCode::EmptyInput, "circulant_eigen: empty column");
    return fft(first_column);
}

/// Dense circulant matrix C(i, j) = c((i − j) mod N).
inline CMatrix circulant_matrix(const CVector& first_column) {
    const Eigen::Index n = first_column.size();
    CMatrix c(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) c(i, j) = first_column((i - j + n) % n);
    return c;
}

struct EigenPair {
    double value;
    CVector vector;
};

/// Rotate v so its first component with non-negligible modulus is real and non-negative.
inline void fix_phase(CVector& v) {
    const double scale = v.cwiseAbs().maxCoeff();
    if (scale == 0.0) return;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double m = std::abs(v(i));
        if (m > 1e-12 * scale) {
            v *= std::conj(v(i)) / m;
            v(i) = cdouble(std::real(v(i)), 0.0);
            return;
        }
    }
}

/// Largest eigenvalue and its unit eigenvector of a Hermitian matrix.
inline EigenPair dominant_eigenpair(const CMatrix& a) {
    require_hermitian(a, "dominant_eigenpair: A");
    if (a.rows() == 0) throw Error(ErrorCode::EmptyInput, "dominant_eigenpair: empty matrix");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a));
    const Eigen::Index last = a.rows() - 1;
    EigenPair out{es.eigenvalues()(last), es.eigenvectors().col(last)};
    fix_phase(out.vector);
    return out;
}

/// Full Hermitian eigendecomposition with ascending eigenvalues.
struct HermitianEigen {
    RVector values;
    CMatrix vectors;
};

inline HermitianEigen hermitian_eigen(const CMatrix& a) {
    require_hermitian(a, "hermitian_eigen: A");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a));
    return {es.eigenvalues(), es.eigenvectors()};
}

/// Singular values of a general dense matrix (descending); cross-check path for custom channels.
inline RVector singular_values(const CMatrix& a) {
    Eigen::JacobiSVD<CMatrix> svd(a);
    return svd.singularValues();
}

/// Real part of the Frobenius inner product, Re tr(Aᴴ B).
inline double frob_inner(const CMatrix& a, const CMatrix& b) {
    return (a.conjugate().cwiseProduct(b)).sum().real();
}

inline double db10(double linear) { return 10.0 * std::log10(linear); }
inline double from_dbm(double dbm) { return std::pow(10.0, dbm / 10.0); }

} // namespace amfisac
