#pragma once

// Dense complex kernels: singular values of shifted matrices, operator norms,
// eigenvalues and the matrix exponential. Everything downstream treats these
// as ground truth.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "semibound/errors.hpp"
#include "semibound/lapack.hpp"

namespace semibound {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;

/// Largest dimension for which norms and sigma_min use a full SVD.
inline constexpr Eigen::Index kDenseSvdLimit = 1000;

/// Largest singular value. Full SVD up to kDenseSvdLimit, Lanczos on M^*M above.
template <class Derived>
double two_norm(const Eigen::MatrixBase<Derived>& m);

/// A square complex matrix standing for the generator of e^{tA}.
class OperatorMatrix {
public:
    explicit OperatorMatrix(Matrix entries, std::string label = {})
        : entries_(std::move(entries)), label_(std::move(label)) {
        if (entries_.rows() != entries_.cols()) {
            throw StructuralError("operator matrix must be square, got " +
                                  std::to_string(entries_.rows()) + "x" +
                                  std::to_string(entries_.cols()));
        }
        if (entries_.rows() < 1) throw StructuralError("operator matrix must have dim >= 1");
        if (!entries_.allFinite()) throw StructuralError("operator matrix has non-finite entries");
        real_ = entries_.imag().isZero(0.0);
        norm_ = two_norm(entries_);
    }

    /// Builds from row-major entries, the layout of the matrix file format.
    static OperatorMatrix from_row_major(Eigen::Index dim, std::span<const Complex> entries,
                                         std::string label = {}) {
        if (dim < 1) throw StructuralError("dim must be >= 1");
        if (static_cast<Eigen::Index>(entries.size()) != dim * dim) {
            throw StructuralError("expected " + std::to_string(dim * dim) + " entries, got " +
                                  std::to_string(entries.size()));
        }
        Matrix m(dim, dim);
        for (Eigen::Index i = 0; i < dim; ++i)
            for (Eigen::Index j = 0; j < dim; ++j) m(i, j) = entries[static_cast<std::size_t>(i * dim + j)];
        return OperatorMatrix(std::move(m), std::move(label));
    }

    Eigen::Index dim() const noexcept { return entries_.rows(); }
    const Matrix& matrix() const noexcept { return entries_; }
    const std::string& label() const noexcept { return label_; }
    /// Operator 2-norm ||A||, computed once at construction.
    double norm() const noexcept { return norm_; }
    /// All entries have zero imaginary part (real arithmetic suffices for e^{tA}).
    bool is_real() const noexcept { return real_; }

private:
    Matrix entries_;
    std::string label_;
    double norm_ = 0.0;
    bool real_ = false;
};

/// Certificate ||e^{tA}|| <= M e^{omega t} for all t >= 0.
struct GrowthBound {
    double M;
    double omega;

    GrowthBound(double m, double w) : M(m), omega(w) {
        if (!std::isfinite(m) || !std::isfinite(w)) throw DomainError("growth bound must be finite");
        if (m < 1.0) throw DomainError("growth bound requires M >= 1");
    }

    double operator()(double t) const { return M * std::exp(omega * t); }
};

namespace detail {

struct LanczosResult {
    double theta = 0.0;    // largest Ritz value
    double residual = 0.0; // ||B s - theta s|| for the Ritz pair
};

/// Deterministic unit start vector shared by all Lanczos runs.
inline Vector lanczos_start(Eigen::Index n) {
    std::mt19937_64 gen(0x5eb0u);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double re = u(gen);
        const double im = u(gen);
        v(i) = Complex(re, im);
    }
    return v / v.norm();
}

/// Largest eigenvalue of a Hermitian positive semidefinite operator given by
/// its action, with full reorthogonalization.
template <class Apply>
LanczosResult lanczos_largest(Apply&& apply, Eigen::Index n, double tol = 1e-14,
                              Eigen::Index max_iter = 300) {
    const Eigen::Index kmax = std::min(n, max_iter);
    Matrix basis(n, kmax);
    std::vector<double> alpha;
    std::vector<double> beta;
    basis.col(0) = lanczos_start(n);
    LanczosResult out;
    double previous = 0.0;
    for (Eigen::Index j = 0; j < kmax; ++j) {
        Vector w = apply(basis.col(j));
        const double a = basis.col(j).dot(w).real();
        alpha.push_back(a);
        for (int pass = 0; pass < 2; ++pass) {
            const auto active = basis.leftCols(j + 1);
            w -= active * (active.adjoint() * w);
        }
        const double b = w.norm();

        const auto k = static_cast<Eigen::Index>(alpha.size());
        Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), k);
        Eigen::VectorXd sub = k > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(beta.data(), k - 1))
                                    : Eigen::VectorXd();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
        tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        const double theta = tri.eigenvalues()(k - 1);
        const double last = std::abs(tri.eigenvectors()(k - 1, k - 1));
        out.theta = theta;
        out.residual = b * last;

        const bool invariant = b <= 1e-300 || b <= 1e-15 * std::max(theta, 1e-300);
        const bool converged = out.residual <= tol * theta ||
                               (j > 2 && std::abs(theta - previous) <= 0.1 * tol * theta &&
                                out.residual <= 1e3 * tol * theta);
        if (invariant || converged || j + 1 == kmax) break;
        previous = theta;
        beta.push_back(b);
        basis.col(j + 1) = w / b;
    }
    return out;
}

} // namespace detail

template <class Dense>
double two_norm_impl(const Dense& m) {
    if (m.size() == 0) return 0.0;
    if (m.rows() <= kDenseSvdLimit && m.cols() <= kDenseSvdLimit) {
        return lapack::singular_values(m)(0);
    }
    const auto r = detail::lanczos_largest(
        [&](const auto& v) -> Vector {
            if constexpr (std::is_same_v<typename Dense::Scalar, double>) {
                const Eigen::VectorXd re = m.transpose() * (m * v.real());
                const Eigen::VectorXd im = m.transpose() * (m * v.imag());
                Vector out(v.size());
                out.real() = re;
                out.imag() = im;
                return out;
            } else {
                Vector mv = m * v;
                return m.adjoint() * mv;
            }
        },
        m.cols());
    return std::sqrt(r.theta + r.residual);
}

template <class Derived>
double two_norm(const Eigen::MatrixBase<Derived>& m) {
    if constexpr (std::is_same_v<Derived, typename Derived::PlainObject>) {
        return two_norm_impl(m.derived());
    } else {
        return two_norm_impl(typename Derived::PlainObject(m));
    }
}

/// Eigenvalues with multiplicity, sorted by decreasing real part
/// (ties by decreasing imaginary part).
inline std::vector<Complex> eigenvalues(const OperatorMatrix& a) {
    const Vector w = lapack::general_eigenvalues(a.matrix());
    std::vector<Complex> out(w.data(), w.data() + w.size());
    std::sort(out.begin(), out.end(), [](Complex x, Complex y) { return x.real() > y.real(); });
    // Real parts equal up to rounding form one cluster, ordered by imaginary part.
    const double tol = 1e-12 * (1.0 + a.norm());
    for (auto first = out.begin(); first != out.end();) {
        auto last = std::find_if(first, out.end(),
                                 [&](Complex x) { return first->real() - x.real() > tol; });
        std::sort(first, last, [](Complex x, Complex y) { return x.imag() > y.imag(); });
        first = last;
    }
    return out;
}

inline double spectral_abscissa(std::span<const Complex> eigs) {
    double s = -std::numeric_limits<double>::infinity();
    for (Complex l : eigs) s = std::max(s, l.real());
    return s;
}

inline double spectral_abscissa(const OperatorMatrix& a) {
    const auto eigs = eigenvalues(a);
    return spectral_abscissa(eigs);
}

/// Largest eigenvalue of (A + A^*)/2. By Lumer-Phillips ||e^{tA}|| <= e^{mu t}.
inline double numerical_abscissa(const OperatorMatrix& a) {
    const Matrix h = 0.5 * (a.matrix() + a.matrix().adjoint());
    return lapack::hermitian_eigenvalues(h).maxCoeff();
}

/// Relative threshold below which sigma_min counts as zero.
inline double singularity_tolerance(const OperatorMatrix& a) { return 1e-12 * (1.0 + a.norm()); }

/// Evaluates sigma_min(zI - A) and (zI - A)^{-1} repeatedly for one A.
///
/// Dense inputs use a full SVD / LU per shift. Banded inputs above 128 rows
/// (the finite-difference gallery) use a banded LU and inverse Lanczos on
/// (zI-A)^{-*}(zI-A)^{-1}; the returned value is 1/sqrt(theta + residual),
/// which errs on the small side.
class ShiftedSolver {
public:
    enum class Backend { DenseSvd, BandedLanczos };

    explicit ShiftedSolver(const OperatorMatrix& a) : a_(a.matrix()), n_(a.dim()) {
        const auto bw = lapack::bandwidth(a_);
        if (n_ > 128 && 8 * (bw.lower + bw.upper + 1) <= n_) {
            backend_ = Backend::BandedLanczos;
            bw_ = bw;
        }
    }

    Backend backend() const noexcept { return backend_; }

    double sigma_min(Complex z) const {
        if (backend_ == Backend::DenseSvd) {
            Matrix shifted = -a_;
            shifted.diagonal().array() += z;
            const auto s = lapack::singular_values(std::move(shifted));
            return s(s.size() - 1);
        }
        const lapack::BandedLU lu(a_, bw_, z);
        if (lu.singular()) return 0.0;
        const auto r = detail::lanczos_largest(
            [&](const auto& v) -> Vector {
                Vector x = v;
                lu.solve(x, 'N');
                lu.solve(x, 'C');
                return x;
            },
            n_);
        if (!(r.theta > 0.0) || !std::isfinite(r.theta)) return 0.0;
        return 1.0 / std::sqrt(r.theta + r.residual);
    }

    /// Dense (zI - A)^{-1}.
    Matrix resolvent(Complex z) const {
        if (backend_ == Backend::DenseSvd) {
            Matrix shifted = -a_;
            shifted.diagonal().array() += z;
            return shifted.partialPivLu().inverse();
        }
        const lapack::BandedLU lu(a_, bw_, z);
        Matrix x = Matrix::Identity(n_, n_);
        lu.solve(x, 'N');
        return x;
    }

private:
    Matrix a_;
    Eigen::Index n_;
    Backend backend_ = Backend::DenseSvd;
    lapack::Bandwidth bw_;
};

/// Smallest singular value of zI - A.
inline double sigma_min(const OperatorMatrix& a, Complex z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw DomainError("z must be finite");
    if (a.dim() <= kDenseSvdLimit) {
        Matrix shifted = -a.matrix();
        shifted.diagonal().array() += z;
        const auto s = lapack::singular_values(std::move(shifted));
        return s(s.size() - 1);
    }
    return ShiftedSolver(a).sigma_min(z);
}

inline Complex nearest_eigenvalue(const OperatorMatrix& a, Complex z) {
    const auto eigs = eigenvalues(a);
    return *std::min_element(eigs.begin(), eigs.end(),
                             [z](Complex x, Complex y) { return std::abs(x - z) < std::abs(y - z); });
}

/// ||(zI - A)^{-1}|| = 1 / sigma_min(zI - A).
inline double resolvent_norm(const OperatorMatrix& a, Complex z) {
    const double s = sigma_min(a, z);
    if (s < singularity_tolerance(a)) {
        throw SingularityError("z is on the spectrum to working precision", nearest_eigenvalue(a, z));
    }
    return 1.0 / s;
}

namespace detail {

template <class Dense>
double one_norm(const Dense& m) {
    return m.cwiseAbs().colwise().sum().maxCoeff();
}

// Pade numerator coefficients b_k for degrees 3, 5, 7, 9, 13.
inline constexpr std::array<double, 4> kPade3{120.0, 60.0, 12.0, 1.0};
inline constexpr std::array<double, 6> kPade5{30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
inline constexpr std::array<double, 8> kPade7{17297280.0, 8648640.0, 1995840.0, 277200.0,
                                              25200.0,    1512.0,    56.0,      1.0};
inline constexpr std::array<double, 10> kPade9{17643225600.0, 8821612800.0, 2075673600.0,
                                               302702400.0,   30270240.0,   2162160.0,
                                               110880.0,      3960.0,       90.0,
                                               1.0};
inline constexpr std::array<double, 14> kPade13{
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

// Backward-error thresholds theta_m for the 1-norm of the scaled argument.
inline constexpr std::array<double, 5> kTheta{1.495585217958292e-2, 2.539398330063230e-1,
                                              9.504178996162932e-1, 2.097847961257068e0,
                                              5.371920351148152e0};

template <class Dense, std::size_t N>
Dense pade_low(const Dense& a, const std::array<double, N>& b) {
    const Eigen::Index n = a.rows();
    const Dense id = Dense::Identity(n, n);
    const Dense a2 = a * a;
    Dense u_inner = b[1] * id;
    Dense v = b[0] * id;
    Dense power = id;
    for (std::size_t k = 2; k < N; k += 2) {
        power = power * a2;
        v += b[k] * power;
        if (k + 1 < N) u_inner += b[k + 1] * power;
    }
    const Dense u = a * u_inner;
    return (v - u).partialPivLu().solve(v + u);
}

template <class Dense>
Dense pade13(const Dense& a) {
    const auto& b = kPade13;
    const Eigen::Index n = a.rows();
    const Dense id = Dense::Identity(n, n);
    const Dense a2 = a * a;
    const Dense a4 = a2 * a2;
    const Dense a6 = a4 * a2;
    const Dense u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                          b[3] * a2 + b[1] * id);
    const Dense v =
        a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
    return (v - u).partialPivLu().solve(v + u);
}

} // namespace detail

/// e^{M} by scaling and squaring with a diagonal Pade approximant
/// (degree 13 unless a lower degree already meets the backward-error bound).
template <class Dense>
Dense expm(const Dense& m) {
    if (m.rows() != m.cols()) throw StructuralError("expm needs a square matrix");
    if (!m.allFinite()) throw SaturationError("expm argument is not finite");
    const double norm1 = detail::one_norm(m);
    Dense result;
    if (norm1 <= detail::kTheta[0]) {
        result = detail::pade_low(m, detail::kPade3);
    } else if (norm1 <= detail::kTheta[1]) {
        result = detail::pade_low(m, detail::kPade5);
    } else if (norm1 <= detail::kTheta[2]) {
        result = detail::pade_low(m, detail::kPade7);
    } else if (norm1 <= detail::kTheta[3]) {
        result = detail::pade_low(m, detail::kPade9);
    } else {
        const int squarings =
            std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / detail::kTheta[4]))));
        result = detail::pade13(Dense(m / std::ldexp(1.0, squarings)));
        for (int k = 0; k < squarings; ++k) result = result * result;
    }
    if (!result.allFinite()) {
        throw SaturationError("matrix exponential overflowed (1-norm of argument " +
                              std::to_string(norm1) + ")");
    }
    return result;
}

inline void check_time(double t) {
    if (!std::isfinite(t)) throw DomainError("t must be finite");
    if (t < 0.0) throw DomainError("semigroup time must be >= 0, got " + std::to_string(t));
}

namespace detail {

/// Calls f(t, e^{tA}) along an ascending grid. A time that is exactly twice its
/// predecessor reuses the previous exponential by one squaring.
template <class Dense, class F>
void semigroup_walk(const Dense& a, std::span<const double> ts, F&& f) {
    Dense last;
    double last_t = -1.0;
    for (double t : ts) {
        check_time(t);
        if (last_t >= 0.0 && t < last_t) throw DomainError("time grid must be ascending");
        Dense e;
        if (t == 0.0) {
            e = Dense::Identity(a.rows(), a.cols());
        } else if (last_t > 0.0 && t == 2.0 * last_t) {
            e.noalias() = last * last;
        } else if (last_t > 0.0 && t == last_t) {
            e = last;
        } else {
            e = expm(Dense(t * a));
        }
        if (!e.allFinite()) throw SaturationError("matrix exponential overflowed at t = " + std::to_string(t));
        f(t, static_cast<const Dense&>(e));
        last = std::move(e);
        last_t = t;
    }
}

} // namespace detail

/// Calls f(t, e^{tA}) for every t of an ascending grid (complex storage).
template <class F>
void for_each_semigroup(const OperatorMatrix& a, std::span<const double> ts, F&& f) {
    if (a.is_real()) {
        detail::semigroup_walk(Eigen::MatrixXd(a.matrix().real()), ts,
                               [&](double t, const Eigen::MatrixXd& e) { f(t, Matrix(e.cast<Complex>())); });
    } else {
        detail::semigroup_walk(a.matrix(), ts, f);
    }
}

/// e^{tA}; real generators are exponentiated in real arithmetic.
inline Matrix semigroup(const OperatorMatrix& a, double t) {
    check_time(t);
    if (a.is_real()) return expm(Eigen::MatrixXd(t * a.matrix().real())).cast<Complex>();
    return expm(Matrix(t * a.matrix()));
}

/// ||e^{tA}||_2 over an ascending grid, reusing squarings for dyadic steps.
inline std::vector<double> semigroup_norms(const OperatorMatrix& a, std::span<const double> ts) {
    std::vector<double> out;
    out.reserve(ts.size());
    auto push = [&](double t, const auto& e) { out.push_back(t == 0.0 ? 1.0 : two_norm(e)); };
    if (a.is_real()) {
        detail::semigroup_walk(Eigen::MatrixXd(a.matrix().real()), ts, push);
    } else {
        detail::semigroup_walk(a.matrix(), ts, push);
    }
    return out;
}

/// ||e^{tA}||_2.
inline double semigroup_norm(const OperatorMatrix& a, double t) {
    check_time(t);
    if (t == 0.0) return 1.0;
    return semigroup_norms(a, std::span<const double>(&t, 1)).front();
}

/// || quadrature of int_0^horizon e^{tA} e^{-tz} dt  -  (zI - A)^{-1} ||,
/// composite Simpson with `panels` subintervals (even).
inline double laplace_identity_residual(const OperatorMatrix& a, Complex z, double horizon,
                                        int panels) {
    const double abscissa = spectral_abscissa(a);
    if (!(z.real() > abscissa)) {
        throw DivergenceError("Laplace integral diverges: Re z = " + std::to_string(z.real()) +
                              " <= spectral abscissa " + std::to_string(abscissa));
    }
    if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
    if (std::exp(horizon * (abscissa - z.real())) >= 1e-8) {
        throw DomainError("horizon too short: e^{horizon (abscissa - Re z)} >= 1e-8");
    }
    if (panels < 2 || panels % 2 != 0) throw DomainError("Simpson needs an even panel count >= 2");

    const Eigen::Index n = a.dim();
    const double h = horizon / panels;
    const Matrix step = semigroup(a, h) * std::exp(-h * z);
    Matrix current = Matrix::Identity(n, n);
    Matrix sum = current;
    for (int k = 1; k <= panels; ++k) {
        current = current * step;
        const double w = (k == panels) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        sum += w * current;
    }
    sum *= h / 3.0;
    Matrix shifted = -a.matrix();
    shifted.diagonal().array() += z;
    const Matrix resolvent = shifted.partialPivLu().inverse();
    return two_norm(Matrix(sum - resolvent));
}

} // namespace semibound
