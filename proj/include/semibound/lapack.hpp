#pragma once

// Thin RAII-style wrappers over the handful of LAPACK drivers the toolkit
// needs. Storage is Eigen's column-major layout, handed to LAPACKE as is.

#include <complex>
#ifndef lapack_complex_float
#define lapack_complex_float std::complex<float>
#endif
#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <string>
#include <vector>

#include "semibound/errors.hpp"

namespace semibound::lapack {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline void check_info(lapack_int info, const char* routine) {
    if (info < 0) {
        throw StructuralError(std::string(routine) + ": illegal argument " + std::to_string(-info));
    }
    if (info > 0) {
        throw ConvergenceError(std::string(routine) + ": failed to converge (info=" +
                               std::to_string(info) + ")");
    }
}

/// Singular values in descending order (zgesdd, no vectors).
inline Eigen::VectorXd singular_values(Matrix m) {
    const auto rows = static_cast<lapack_int>(m.rows());
    const auto cols = static_cast<lapack_int>(m.cols());
    Eigen::VectorXd s(std::min(rows, cols));
    if (s.size() == 0) return s;
    const lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', rows, cols, m.data(), rows,
                                           s.data(), nullptr, 1, nullptr, 1);
    check_info(info, "zgesdd");
    return s;
}

inline Eigen::VectorXd singular_values(Eigen::MatrixXd m) {
    const auto rows = static_cast<lapack_int>(m.rows());
    const auto cols = static_cast<lapack_int>(m.cols());
    Eigen::VectorXd s(std::min(rows, cols));
    if (s.size() == 0) return s;
    const lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', rows, cols, m.data(), rows,
                                           s.data(), nullptr, 1, nullptr, 1);
    check_info(info, "dgesdd");
    return s;
}

/// Eigenvalues of a general complex matrix (zgeev, no vectors), unsorted.
inline Eigen::VectorXcd general_eigenvalues(Matrix m) {
    const auto n = static_cast<lapack_int>(m.rows());
    Eigen::VectorXcd w(n);
    if (n == 0) return w;
    const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, m.data(), n, w.data(),
                                          nullptr, 1, nullptr, 1);
    check_info(info, "zgeev");
    return w;
}

/// Eigenvalues of a Hermitian matrix in ascending order (zheevd, lower triangle).
inline Eigen::VectorXd hermitian_eigenvalues(Matrix m) {
    const auto n = static_cast<lapack_int>(m.rows());
    Eigen::VectorXd w(n);
    if (n == 0) return w;
    const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n, m.data(), n, w.data());
    check_info(info, "zheevd");
    return w;
}

/// Half-bandwidths (kl, ku) of the nonzero pattern of a square matrix.
struct Bandwidth {
    Eigen::Index lower = 0;
    Eigen::Index upper = 0;
};

inline Bandwidth bandwidth(const Matrix& a) {
    Bandwidth bw;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            if (a(i, j) != Complex(0.0, 0.0)) {
                bw.lower = std::max(bw.lower, i - j);
                bw.upper = std::max(bw.upper, j - i);
            }
        }
    }
    return bw;
}

/// LU factorization with partial pivoting of a banded matrix (zgbtrf).
class BandedLU {
public:
    /// Factors shift*I - a, where a has half-bandwidths bw.
    BandedLU(const Matrix& a, Bandwidth bw, Complex shift)
        : n_(static_cast<lapack_int>(a.rows())),
          kl_(static_cast<lapack_int>(bw.lower)),
          ku_(static_cast<lapack_int>(bw.upper)),
          ldab_(2 * kl_ + ku_ + 1),
          ab_(static_cast<std::size_t>(ldab_) * static_cast<std::size_t>(n_), Complex(0.0, 0.0)),
          ipiv_(static_cast<std::size_t>(n_)) {
        for (lapack_int j = 0; j < n_; ++j) {
            const lapack_int lo = std::max<lapack_int>(0, j - ku_);
            const lapack_int hi = std::min<lapack_int>(n_ - 1, j + kl_);
            for (lapack_int i = lo; i <= hi; ++i) {
                Complex v = -a(i, j);
                if (i == j) v += shift;
                ab_[static_cast<std::size_t>(kl_ + ku_ + i - j) +
                    static_cast<std::size_t>(j) * static_cast<std::size_t>(ldab_)] = v;
            }
        }
        const lapack_int info =
            LAPACKE_zgbtrf(LAPACK_COL_MAJOR, n_, n_, kl_, ku_, ab_.data(), ldab_, ipiv_.data());
        if (info < 0) check_info(info, "zgbtrf");
        singular_ = info > 0;
    }

    bool singular() const noexcept { return singular_; }

    /// Solves in place; trans is 'N' for (zI-A) x = b, 'C' for (zI-A)^* x = b.
    void solve(Matrix& rhs, char trans = 'N') const {
        if (singular_) throw SingularityError("banded factorization is exactly singular", {});
        const lapack_int info = LAPACKE_zgbtrs(
            LAPACK_COL_MAJOR, trans, n_, kl_, ku_, static_cast<lapack_int>(rhs.cols()), ab_.data(),
            ldab_, ipiv_.data(), rhs.data(), static_cast<lapack_int>(rhs.rows()));
        check_info(info, "zgbtrs");
    }

    void solve(Eigen::VectorXcd& rhs, char trans = 'N') const {
        if (singular_) throw SingularityError("banded factorization is exactly singular", {});
        const lapack_int info =
            LAPACKE_zgbtrs(LAPACK_COL_MAJOR, trans, n_, kl_, ku_, 1, ab_.data(), ldab_,
                           ipiv_.data(), rhs.data(), static_cast<lapack_int>(rhs.size()));
        check_info(info, "zgbtrs");
    }

private:
    lapack_int n_;
    lapack_int kl_;
    lapack_int ku_;
    lapack_int ldab_;
    std::vector<Complex> ab_;
    std::vector<lapack_int> ipiv_;
    bool singular_ = false;
};

} // namespace semibound::lapack
