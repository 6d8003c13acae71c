#pragma once

// Self-improvement of a finite-horizon majorant. With m(t) = m~(t) e^{omega t}
// known on [0, T), the split bound at a = t/2 gives, for t >= T,
//     f~(t) = int_0^{t/2} f~(s)^2 ds,   f~ = r(omega) / m~,
// marched block by block over [T, 2T), [2T, 4T), ... f~ grows like e^{ct},
// so everything is kept as logarithms.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "semibound/bounds.hpp"
#include "semibound/errors.hpp"
#include "semibound/format.hpp"

namespace semibound {

namespace detail {

inline double log_add(double a, double b) {
    if (a == -INFINITY) return b;
    if (b == -INFINITY) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

/// ln m at s in [0, T], log-linear between nodes; s = T gives the left limit.
inline double log_tabulated(const Tabulated& m, double s) {
    if (s <= 0.0) return std::log(m.values.front());
    const auto it = std::upper_bound(m.grid.begin(), m.grid.end(), s);
    if (it == m.grid.end()) return std::log(m.values.back());
    const std::size_t i = static_cast<std::size_t>(it - m.grid.begin()) - 1;
    const double u = (s - m.grid[i]) / (m.grid[i + 1] - m.grid[i]);
    return (1.0 - u) * std::log(m.values[i]) + u * std::log(m.values[i + 1]);
}

} // namespace detail

class RecursionState {
public:
    double T = 0.0;
    double omega = 0.0;
    double r_omega = 0.0;
    double h = 0.0;
    std::size_t n_T = 0; // index of t = T
    int k0 = 0;

    std::size_t size() const noexcept { return log_f_.size(); }
    double t(std::size_t i) const { return static_cast<double>(i) * h; }
    double t_max() const { return t(size() - 1); }

    double log_f(std::size_t i) const { return log_f_[i]; }
    double log_m(std::size_t i) const { return std::log(r_omega) - log_f_[i]; }
    /// May overflow to infinity; use log_f for large t.
    double f(std::size_t i) const { return std::exp(log_f_[i]); }
    double m(std::size_t i) const { return std::exp(log_m(i)); }
    /// f~ at the left limit t -> T (the m0 side of the jump).
    double log_f_left_T() const { return log_f_left_T_; }
    /// inf of f~ over [0, T] (m0 side), i.e. r / sup m0.
    double log_F0() const { return log_F0_; }

    /// ln of int_0^{s} f~^2 for s on the half grid (s = j h / 2).
    double log_prefix_half(std::size_t twice_j) const;

    /// Index of t or DomainError when t is not a grid node.
    std::size_t index_of(double time) const {
        const double u = time / h;
        const double k = std::round(u);
        if (std::abs(u - k) > 1e-9 * std::max(1.0, u) || k < 0 || k >= static_cast<double>(size())) {
            std::ostringstream msg;
            msg << "t = " << time << " is not a node of the recursion grid (h = " << h << ", t_max = " << t_max()
                << ")";
            throw DomainError(msg.str());
        }
        return static_cast<std::size_t>(k);
    }

    /// 0 on [0, T), k on [T 2^{k-1}, T 2^k).
    int dyadic_block(std::size_t i) const {
        if (i < n_T) return 0;
        int k = 1;
        std::size_t edge = 2 * n_T;
        while (i >= edge) {
            edge *= 2;
            ++k;
        }
        return k;
    }

    /// t,f_tilde,m_tilde,dyadic_block_index; at most max_rows rows (uniform stride, last node kept).
    std::string to_csv(std::size_t max_rows = 4097) const {
        std::string out = "#T=" + format_double(T) + "\n#omega=" + format_double(omega) + "\n#r_omega=" +
                          format_double(r_omega) + "\n#h=" + format_double(h) + "\n#k0=" + std::to_string(k0) + "\n";
        out += "t,f_tilde,m_tilde,dyadic_block_index\n";
        const std::size_t stride = std::max<std::size_t>(1, (size() + max_rows - 2) / std::max<std::size_t>(1, max_rows - 1));
        for (std::size_t i = 0; i < size(); i += stride) out += row(i);
        if ((size() - 1) % stride != 0) out += row(size() - 1);
        return out;
    }

private:
    friend RecursionState extend_majorant(const Tabulated&, double, double, double, double);

    std::string row(std::size_t i) const {
        return format_double(t(i)) + "," + format_from_log(log_f_[i]) + "," + format_from_log(log_m(i)) + "," +
               std::to_string(dyadic_block(i)) + "\n";
    }

    std::vector<double> log_f_;
    std::vector<double> log_prefix_; // ln int_0^{jh} f~^2 (trapezoid)
    double log_f_left_T_ = 0.0;
    double log_F0_ = 0.0;
};

/// Smallest k >= 3 with 2^k >= max(2^6 / (T F0)^4, 8).
inline int k0_rule(double T, double F0) {
    if (!(T > 0.0) || !(F0 > 0.0)) throw DomainError("k0_rule needs T > 0 and F0 > 0");
    const double log2_target = std::max(6.0 - 4.0 * std::log2(T * F0), 3.0);
    int k = std::max(3, static_cast<int>(std::ceil(log2_target - 1e-12)));
    while (k > 3 && k - 1 >= log2_target) --k;
    while (k < log2_target) ++k;
    return k;
}

namespace detail {

/// ln (trapezoid of f^2 over a cell of width w with end values e^{la}, e^{lb}).
inline double log_cell(double w, double la, double lb) { return std::log(0.5 * w) + log_add(2.0 * la, 2.0 * lb); }

} // namespace detail

inline double RecursionState::log_prefix_half(std::size_t twice_j) const {
    const std::size_t j = twice_j / 2;
    if (twice_j % 2 == 0) return log_prefix_[j];
    // Midpoint of cell [j h, (j+1) h]: linear interpolation of f~ there.
    const double la = log_f_[j];
    const double lb = (j + 1 == n_T) ? log_f_left_T_ : log_f_[j + 1];
    const double lmid = detail::log_add(la, lb) - std::log(2.0);
    return detail::log_add(log_prefix_[j], detail::log_cell(0.5 * h, la, lmid));
}

/// Marches f~(t) = int_0^{t/2} f~^2 from m0 on [0, T) out to t_max.
inline RecursionState extend_majorant(const Tabulated& m0, double omega, double r_omega, double t_max, double h) {
    validate(WeightSpec{m0});
    if (!(r_omega > 0.0) || !std::isfinite(r_omega)) throw DomainError("extend_majorant: r(omega) must be positive");
    if (!std::isfinite(omega)) throw DomainError("extend_majorant: omega must be finite");
    const double T = m0.horizon_T;
    if (!(h > 0.0) || h > T / 512.0 * (1.0 + 1e-12)) throw DomainError("extend_majorant: need 0 < h <= T/512");
    const double nt = T / h;
    if (std::abs(nt - std::round(nt)) > 1e-9 * nt) throw DomainError("extend_majorant: T must be a multiple of h");
    if (!(t_max >= T)) throw DomainError("extend_majorant: t_max must be at least T");

    RecursionState s;
    s.T = T;
    s.omega = omega;
    s.r_omega = r_omega;
    s.h = h;
    s.n_T = static_cast<std::size_t>(std::round(nt));
    const std::size_t n = static_cast<std::size_t>(std::floor(t_max / h + 1e-9)) + 1;
    const double log_r = std::log(r_omega);

    s.log_f_.resize(n);
    double log_sup_m0 = -INFINITY;
    for (std::size_t i = 0; i < s.n_T; ++i) {
        const double lm = detail::log_tabulated(m0, static_cast<double>(i) * h);
        log_sup_m0 = std::max(log_sup_m0, lm);
        s.log_f_[i] = log_r - lm;
    }
    const double lm_T = detail::log_tabulated(m0, T);
    for (std::size_t i = 0; i < m0.grid.size() && m0.grid[i] <= T; ++i)
        log_sup_m0 = std::max(log_sup_m0, std::log(m0.values[i]));
    log_sup_m0 = std::max(log_sup_m0, lm_T);
    s.log_f_left_T_ = log_r - lm_T;
    s.log_F0_ = log_r - log_sup_m0;

    s.log_prefix_.assign(n, -INFINITY);
    auto extend_prefix = [&](std::size_t j) {
        // prefix_[j+1] from prefix_[j]; the cell ending at T uses the left limit.
        const double lb = (j + 1 == s.n_T) ? s.log_f_left_T_ : s.log_f_[j + 1];
        s.log_prefix_[j + 1] = detail::log_add(s.log_prefix_[j], detail::log_cell(h, s.log_f_[j], lb));
    };
    std::size_t built = 0; // prefix_ known on [0, built]
    for (std::size_t i = s.n_T; i < n; ++i) {
        const std::size_t need = (i + 1) / 2;
        while (built < need) extend_prefix(built++);
        s.log_f_[i] = s.log_prefix_half(i);
    }
    while (built + 1 < n) extend_prefix(built++);
    s.k0 = k0_rule(T, std::exp(s.log_F0_));
    return s;
}

/// max(sup_{[0,T)} m~, 1 / (r int_0^{T/2} m~^{-2})).
inline double uniform_constant(const RecursionState& s) {
    const double sup_m = std::exp(std::log(s.r_omega) - s.log_F0());
    // r^2 int_0^{T/2} m~^{-2} = int_0^{T/2} f~^2, so the second branch is r / prefix(T/2).
    const double second = std::exp(std::log(s.r_omega) - s.log_prefix_half(s.n_T));
    return std::max(sup_m, second);
}

/// F(0) = inf_{[0,T)} f~, F(k) = f~(T 2^{k-1}) for 1 <= k <= K.
inline std::map<int, double> dyadic_floors(const RecursionState& s, int K) {
    if (K < 0) throw DomainError("dyadic_floors: K must be non-negative");
    const double need = s.T * std::ldexp(1.0, K);
    if (s.t_max() < need * (1.0 - 1e-12)) {
        std::ostringstream msg;
        msg << "dyadic_floors: K = " << K << " needs t_max >= " << need << ", state has " << s.t_max();
        throw DomainError(msg.str());
    }
    std::map<int, double> F;
    F[0] = std::exp(s.log_F0());
    for (int k = 1; k <= K; ++k) F[k] = s.f(s.n_T << (k - 1));
    return F;
}

/// Same floors as logarithms (no overflow).
inline std::map<int, double> log_dyadic_floors(const RecursionState& s, int K) {
    const auto F = dyadic_floors(s, 0);
    std::map<int, double> out{{0, std::log(F.at(0))}};
    if (s.t_max() < s.T * std::ldexp(1.0, K) * (1.0 - 1e-12)) dyadic_floors(s, K); // throws
    for (int k = 1; k <= K; ++k) out[k] = s.log_f(s.n_T << (k - 1));
    return out;
}

/// Upper bound 2^{-(2^{-k0} t / T)^{1/2}} on m~(t) / (r T), for t / T >= 2^{k0 - 1}.
inline double stretched_bound(const RecursionState& s, double t) {
    if (t / s.T < std::ldexp(1.0, s.k0 - 1) * (1.0 - 1e-12)) {
        std::ostringstream msg;
        msg << "stretched_bound: t = " << t << " is below the threshold T 2^{k0-1} = " << s.T * std::ldexp(1.0, s.k0 - 1);
        throw DomainError(msg.str());
    }
    return std::exp2(-std::sqrt(std::ldexp(t / s.T, -s.k0)));
}

/// Checks on a marched state; each entry is (name, holds).
struct RecursionChecks {
    bool monotone = true;             // f~ nondecreasing on [T, t_max]
    bool product = true;              // f~ m~ = r
    bool chain = true;                // T F(k+1) >= (T F0)^2 + sum_{j=1}^{k-1} 2^{j-1} (T F(j))^2
    bool weak_chain = true;           // T F(k+1) >= 2^{k-2} (T F(k-1))^2
    bool floors_monotone = true;      // F(1) <= F(2) <= ...
    bool ln_doubling = true;          // ln T F(k0 + 2 nu) >= 2^nu ln 2
    bool stretched = true;            // m~(t)/(rT) <= 2^{-(2^{-k0} t/T)^{1/2}} (1 + 1e-3)
    int K = 0;                        // floors examined
    std::vector<std::string> failures;

    bool all() const { return failures.empty(); }
};

inline RecursionChecks check_recursion(const RecursionState& s) {
    RecursionChecks c;
    // Relative slack for one-sided trapezoid effects.
    const double slack = std::log1p(10.0 * s.h);
    for (std::size_t i = s.n_T + 1; i < s.size(); ++i)
        if (s.log_f(i) < s.log_f(i - 1)) {
            c.monotone = false;
            c.failures.push_back("f~ decreases at t = " + format_double(s.t(i)));
            break;
        }
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double prod = s.log_f(i) + s.log_m(i) - std::log(s.r_omega);
        if (std::abs(prod) > 1e-12) {
            c.product = false;
            c.failures.push_back("f~ m~ != r at t = " + format_double(s.t(i)));
            break;
        }
    }
    int K = 0;
    while (s.T * std::ldexp(1.0, K + 1) <= s.t_max() * (1.0 + 1e-12)) ++K;
    c.K = K;
    const auto F = log_dyadic_floors(s, K);
    const double log_T = std::log(s.T);
    for (int k = 1; k + 1 <= K; ++k) {
        double rhs = 2.0 * (log_T + F.at(0));
        for (int j = 1; j <= k - 1; ++j) rhs = detail::log_add(rhs, (j - 1) * std::log(2.0) + 2.0 * (log_T + F.at(j)));
        if (log_T + F.at(k + 1) < rhs - slack) {
            c.chain = false;
            c.failures.push_back("dyadic chain fails at k = " + std::to_string(k));
        }
        if (k >= 2 && log_T + F.at(k + 1) < (k - 2) * std::log(2.0) + 2.0 * (log_T + F.at(k - 1)) - slack) {
            c.weak_chain = false;
            c.failures.push_back("weak dyadic chain fails at k = " + std::to_string(k));
        }
    }
    for (int k = 2; k <= K; ++k)
        if (F.at(k) < F.at(k - 1)) {
            c.floors_monotone = false;
            c.failures.push_back("F(" + std::to_string(k) + ") < F(" + std::to_string(k - 1) + ")");
        }
    for (int nu = 1; s.k0 + 2 * nu <= K; ++nu) {
        if (log_T + F.at(s.k0 + 2 * nu) < std::ldexp(1.0, nu) * std::log(2.0) - slack) {
            c.ln_doubling = false;
            c.failures.push_back("ln-doubling fails at nu = " + std::to_string(nu));
        }
    }
    const std::size_t start = s.n_T << (s.k0 - 1);
    for (std::size_t i = start; i < s.size(); ++i) {
        const double lhs = s.log_m(i) - std::log(s.r_omega * s.T);
        const double rhs = std::log(stretched_bound(s, s.t(i))) + std::log1p(1e-3);
        if (lhs > rhs) {
            c.stretched = false;
            c.failures.push_back("stretched bound fails at t = " + format_double(s.t(i)));
            break;
        }
    }
    return c;
}

/// m(t) = m~(t) e^{omega t} on the grid nodes closest to ts (ts must be nodes).
inline BoundCurve appendix_curve(const RecursionState& s, const std::vector<double>& ts) {
    BoundCurve c;
    c.method = "appendix";
    c.set("omega", s.omega);
    c.set("r_omega", s.r_omega);
    c.set("T", s.T);
    c.set("h", s.h);
    for (double t : ts) {
        const std::size_t i = s.index_of(t);
        c.t.push_back(t);
        c.values.push_back(std::exp(s.log_m(i) + s.omega * t));
    }
    c.validate();
    return c;
}

} // namespace semibound
