#pragma once

// Finite-difference generators A = -P for the model operators, plus synthetic
// non-normal matrices. All builders are deterministic.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "semibound/errors.hpp"
#include "semibound/linalg.hpp"

namespace semibound {

/// Uniform grid with Dirichlet ends, centered second-order differences.
struct DiscretizationSpec {
    int n_points = 400;
    double L = 20.0;
    std::string scheme = "centered2";
    std::string boundary = "dirichlet";

    void validate() const {
        if (n_points < 16) throw DomainError("discretization needs n_points >= 16");
        if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("discretization needs L > 0");
        if (scheme != "centered2") throw DomainError("unsupported scheme: " + scheme);
        if (boundary != "dirichlet") throw DomainError("unsupported boundary: " + boundary);
    }
};

namespace detail {

/// A = D2 - i V(x) on interior nodes x_1 < ... < x_n of [lo, hi].
template <class Potential>
OperatorMatrix schrodinger_like(const DiscretizationSpec& spec, double lo, double hi, Potential v,
                                const std::string& label) {
    spec.validate();
    const Eigen::Index n = spec.n_points;
    const double h = (hi - lo) / static_cast<double>(n + 1);
    const double inv_h2 = 1.0 / (h * h);
    Matrix m = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double x = lo + h * static_cast<double>(j + 1);
        m(j, j) = Complex(-2.0 * inv_h2, -v(x));
        if (j + 1 < n) {
            m(j, j + 1) = inv_h2;
            m(j + 1, j) = inv_h2;
        }
    }
    return OperatorMatrix(std::move(m), label);
}

/// Portable standard normal: mt19937_64 bits through Box-Muller.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : gen_(seed) {}

    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        spare_ = rad * std::sin(2.0 * kPi * u2);
        has_spare_ = true;
        return rad * std::cos(2.0 * kPi * u2);
    }

    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace detail

/// A = -(D_x^2 + i x) on [0, L]; P's eigenvalues approach |a_j| e^{i pi/3} (a_j Airy zeros).
inline OperatorMatrix build_complex_airy(const DiscretizationSpec& spec = {400, 20.0}) {
    return detail::schrodinger_like(spec, 0.0, spec.L, [](double x) { return x; }, "airy");
}

/// A = -(D_x^2 + i x^2) on [-L, L]; P's eigenvalues approach e^{i pi/4}(2j + 1).
inline OperatorMatrix build_davies_oscillator(const DiscretizationSpec& spec = {600, 12.0}) {
    return detail::schrodinger_like(spec, -spec.L, spec.L, [](double x) { return x * x; }, "davies");
}

struct Spec2d {
    int nx = 40;
    int ny = 40;
    double L = 5.0;

    void validate() const {
        if (nx < 4 || ny < 4) throw DomainError("2-D grid needs at least 4 points per axis");
        if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("2-D grid needs L > 0");
    }
};

/// Quadratic Kramers-Fokker-Planck model with h = 1:
/// P = y d_x - x d_y + (gamma/2)(y - d_y)(y + d_y) on [-L, L]^2, A = -P.
/// The transport part uses centered differences (skew-symmetric); the
/// diffusion is assembled as (gamma/2) B^T B with B = y + forward difference,
/// so Re P >= 0 holds exactly on the grid. Unknown (i, j) sits at i * ny + j.
inline OperatorMatrix build_kfp_quadratic(double gamma = 1.0, const Spec2d& spec = {}) {
    spec.validate();
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("gamma must be positive");
    const int nx = spec.nx;
    const int ny = spec.ny;
    const double hx = 2.0 * spec.L / (nx + 1);
    const double hy = 2.0 * spec.L / (ny + 1);
    auto xs = [&](int i) { return -spec.L + hx * (i + 1); };
    auto ys = [&](int j) { return -spec.L + hy * (j + 1); };
    const Eigen::Index n = static_cast<Eigen::Index>(nx) * ny;
    auto idx = [&](int i, int j) { return static_cast<Eigen::Index>(i) * ny + j; };

    // B on one y-line: (B u)_j = y_j u_j + (u_{j+1} - u_j)/hy, u_ny = 0.
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(ny, ny);
    for (int j = 0; j < ny; ++j) {
        b(j, j) = ys(j) - 1.0 / hy;
        if (j + 1 < ny) b(j, j + 1) = 1.0 / hy;
    }
    const Eigen::MatrixXd diffusion = 0.5 * gamma * b.transpose() * b;

    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            const Eigen::Index r = idx(i, j);
            // y d_x
            if (i + 1 < nx) p(r, idx(i + 1, j)) += ys(j) / (2.0 * hx);
            if (i > 0) p(r, idx(i - 1, j)) -= ys(j) / (2.0 * hx);
            // -x d_y
            if (j + 1 < ny) p(r, idx(i, j + 1)) -= xs(i) / (2.0 * hy);
            if (j > 0) p(r, idx(i, j - 1)) += xs(i) / (2.0 * hy);
            for (int k = std::max(0, j - 1); k <= std::min(ny - 1, j + 1); ++k) p(r, idx(i, k)) += diffusion(j, k);
        }
    }
    return OperatorMatrix(Matrix((-p).cast<Complex>()), "kfp");
}

/// n x n Jordan block: lambda on the diagonal, 1 on the superdiagonal.
inline OperatorMatrix build_jordan(int n, Complex lambda) {
    if (n < 1) throw DomainError("jordan block needs n >= 1");
    Matrix m = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        m(i, i) = lambda;
        if (i + 1 < n) m(i, i + 1) = 1.0;
    }
    return OperatorMatrix(std::move(m), "jordan");
}

/// T(i, j) = first_col[i - j] below and on the diagonal, first_row[j - i] above;
/// missing entries are zero.
inline OperatorMatrix build_toeplitz(const std::vector<Complex>& first_col, const std::vector<Complex>& first_row,
                                     int n) {
    if (n < 1) throw DomainError("toeplitz matrix needs n >= 1");
    if (first_col.empty() || first_row.empty()) throw StructuralError("toeplitz needs a first row and column");
    if (first_col.front() != first_row.front())
        throw StructuralError("toeplitz first row and column disagree on the diagonal");
    Matrix m = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const auto k = static_cast<std::size_t>(std::abs(i - j));
            const auto& src = i >= j ? first_col : first_row;
            if (k < src.size()) m(i, j) = src[k];
        }
    }
    return OperatorMatrix(std::move(m), "toeplitz");
}

/// Q (D + d N) Q^*: D diagonal with Re in [-3, -0.5], N strictly upper
/// triangular Gaussian, Q a Haar-like unitary. departure = 0 gives a normal matrix.
inline OperatorMatrix build_random_nonnormal(int n, std::uint64_t seed, double departure) {
    if (n < 1) throw DomainError("random matrix needs n >= 1");
    if (!(departure >= 0.0) || !std::isfinite(departure)) throw DomainError("departure must be >= 0");
    detail::NormalStream g(seed);
    Matrix d = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) d(i, i) = Complex(-0.5 - 2.5 * g.uniform(), -2.0 + 4.0 * g.uniform());
    Matrix nil = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) nil(i, j) = Complex(g(), g()) / std::sqrt(2.0);
    Matrix z(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) z(i, j) = Complex(g(), g());
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ();
    const Matrix rr = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) {
        const Complex rd = rr(j, j);
        if (std::abs(rd) > 0.0) q.col(j) *= rd / std::abs(rd);
    }
    return OperatorMatrix(q * (d + departure * nil) * q.adjoint(),
                          "random_nonnormal(" + std::to_string(n) + "," + std::to_string(seed) + ")");
}

/// ||A A^* - A^* A||_2.
inline double departure_from_normality(const OperatorMatrix& a) {
    const Matrix& m = a.matrix();
    return two_norm(m * m.adjoint() - m.adjoint() * m);
}

inline const std::vector<std::string>& gallery_names() {
    static const std::vector<std::string> names{"airy", "davies", "kfp", "jordan", "toeplitz", "random_nonnormal"};
    return names;
}

namespace detail {

inline std::vector<Complex> complex_list(const nlohmann::json& j) {
    std::vector<Complex> out;
    for (const auto& e : j) {
        if (e.is_number()) out.emplace_back(e.get<double>(), 0.0);
        else if (e.is_array() && e.size() == 2) out.emplace_back(e[0].get<double>(), e[1].get<double>());
        else throw StructuralError("expected a number or [re, im]");
    }
    return out;
}

inline Complex complex_value(const nlohmann::json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
    throw StructuralError("expected a number or [re, im]");
}

} // namespace detail

/// Builds a gallery operator by name; params is a JSON object (missing keys take defaults).
inline OperatorMatrix build_gallery(const std::string& name, const nlohmann::json& params = nlohmann::json::object()) {
    try {
        const double shift = params.value("shift", 0.0);
        auto shifted = [&](OperatorMatrix a) {
            if (shift == 0.0) return a;
            Matrix m = a.matrix();
            m.diagonal().array() += shift;
            return OperatorMatrix(std::move(m), a.label());
        };
        if (name == "airy")
            return shifted(build_complex_airy({params.value("n", 400), params.value("L", 20.0)}));
        if (name == "davies")
            return shifted(build_davies_oscillator({params.value("n", 600), params.value("L", 12.0)}));
        if (name == "kfp")
            return shifted(build_kfp_quadratic(params.value("gamma", 1.0),
                                               {params.value("nx", 40), params.value("ny", 40), params.value("L", 5.0)}));
        if (name == "jordan") {
            const Complex lambda = params.contains("lambda") ? detail::complex_value(params["lambda"]) : Complex(-1.0);
            return shifted(build_jordan(params.value("n", 2), lambda));
        }
        if (name == "toeplitz") {
            if (!params.contains("first_col") || !params.contains("first_row") || !params.contains("n"))
                throw StructuralError("toeplitz needs first_col, first_row and n");
            return shifted(build_toeplitz(detail::complex_list(params["first_col"]),
                                          detail::complex_list(params["first_row"]), params["n"].get<int>()));
        }
        if (name == "random_nonnormal")
            return shifted(build_random_nonnormal(params.value("n", 8), params.value("seed", std::uint64_t{42}),
                                                  params.value("departure", 1.0)));
    } catch (const nlohmann::json::exception& e) {
        throw StructuralError("gallery '" + name + "': " + e.what());
    }
    throw StructuralError("unknown gallery operator '" + name + "'");
}

} // namespace semibound
