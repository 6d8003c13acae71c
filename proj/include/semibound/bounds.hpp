#pragma once

// Explicit semigroup bounds driven by resolvent information.
//
// All bounds take r as the certified lower end r_lo of a sweep, so a sweep
// error can only loosen them. Evaluation is in the log domain wherever
// e^{omega t} or the weight norms can leave the double range.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "semibound/errors.hpp"
#include "semibound/format.hpp"
#include "semibound/optimize.hpp"
#include "semibound/resolvent_profile.hpp"

namespace semibound {

// ---------------------------------------------------------------------------
// Weights m(t) >= ||S(t)||

/// m(t) = M_hat e^{omega_hat t}.
struct Exponential {
    double M_hat = 1.0;
    double omega_hat = 0.0;
};

/// m given at nodes on [0, T], log-linear in between, +infinity from T on.
/// The value at T is the left limit.
struct Tabulated {
    std::vector<double> grid;
    std::vector<double> values;
    double horizon_T = 0.0;
};

using WeightSpec = std::variant<Exponential, Tabulated>;

inline void validate(const WeightSpec& m) {
    if (const auto* e = std::get_if<Exponential>(&m)) {
        if (!(e->M_hat >= 1.0) || !std::isfinite(e->M_hat) || !std::isfinite(e->omega_hat))
            throw DomainError("Exponential weight needs finite M_hat >= 1 and finite omega_hat");
        return;
    }
    const auto& tab = std::get<Tabulated>(m);
    if (tab.grid.size() < 2 || tab.grid.size() != tab.values.size())
        throw DomainError("Tabulated weight needs matching grid/values with at least two nodes");
    if (tab.grid.front() != 0.0) throw DomainError("Tabulated grid must start at 0");
    if (!(tab.horizon_T > 0.0) || !std::isfinite(tab.horizon_T))
        throw DomainError("Tabulated horizon must be positive and finite");
    if (tab.grid.back() < tab.horizon_T) throw DomainError("Tabulated grid must cover [0, T)");
    for (std::size_t i = 1; i < tab.grid.size(); ++i)
        if (!(tab.grid[i] > tab.grid[i - 1])) throw DomainError("Tabulated grid must be strictly ascending");
    for (double v : tab.values)
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("Tabulated values must be positive and finite");
}

/// Upper end of the support of 1/m (infinity for Exponential).
inline double weight_horizon(const WeightSpec& m) {
    if (const auto* tab = std::get_if<Tabulated>(&m)) return tab->horizon_T;
    return std::numeric_limits<double>::infinity();
}

/// m(s); +infinity at and beyond the horizon.
inline double weight_value(const WeightSpec& m, double s) {
    if (const auto* e = std::get_if<Exponential>(&m)) return e->M_hat * std::exp(e->omega_hat * s);
    const auto& tab = std::get<Tabulated>(m);
    if (s >= tab.horizon_T) return std::numeric_limits<double>::infinity();
    if (s <= 0.0) return tab.values.front();
    const auto it = std::upper_bound(tab.grid.begin(), tab.grid.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - tab.grid.begin()) - 1;
    const double u = (s - tab.grid[i]) / (tab.grid[i + 1] - tab.grid[i]);
    return std::exp((1.0 - u) * std::log(tab.values[i]) + u * std::log(tab.values[i + 1]));
}

namespace detail {

/// expm1(x)/x, continuous at 0.
inline double exprel(double x) {
    if (std::abs(x) < 1e-5) return 1.0 + x * (0.5 + x / 6.0);
    return std::expm1(x) / x;
}

/// ln(expm1(x)/x) for any real x, without overflow.
inline double log_exprel(double x) {
    if (std::abs(x) < 1e-5) return std::log1p(x * (0.5 + x / 6.0));
    if (x > 0.0) return x + std::log(-std::expm1(-x)) - std::log(x);
    return std::log(-std::expm1(x)) - std::log(-x);
}

/// Exact integral of exp(c0 + c1 s) over [x0, x1].
inline double exp_linear_integral(double c0, double c1, double x0, double x1) {
    const double len = x1 - x0;
    return std::exp(c0 + c1 * x0) * len * exprel(c1 * len);
}

} // namespace detail

/// ln of int_0^a m(s)^{-2} e^{2 omega s} ds.
inline double log_weight_integral(const WeightSpec& m, double omega, double a) {
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("weight norm needs a > 0");
    validate(m);
    if (const auto* e = std::get_if<Exponential>(&m)) {
        // int_0^a e^{2 delta s} ds / M^2 with delta = omega - omega_hat
        const double delta = omega - e->omega_hat;
        const double base = std::log(a) - 2.0 * std::log(e->M_hat);
        if (std::abs(delta) < 1e-8 * std::max(1.0, std::abs(e->omega_hat))) return base;
        return base + detail::log_exprel(2.0 * delta * a);
    }
    const auto& tab = std::get<Tabulated>(m);
    if (a > tab.horizon_T * (1.0 + 1e-14)) {
        std::ostringstream msg;
        msg << "weight norm over [0, " << a << "] exceeds the tabulated horizon T = " << tab.horizon_T;
        throw DomainError(msg.str());
    }
    a = std::min(a, tab.horizon_T);
    // ln m is linear on each cell, so the integrand is exp(linear) there.
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < tab.grid.size() && tab.grid[i] < a; ++i) {
        const double g0 = tab.grid[i];
        const double g1 = tab.grid[i + 1];
        const double l0 = std::log(tab.values[i]);
        const double slope = (std::log(tab.values[i + 1]) - l0) / (g1 - g0);
        const double c1 = 2.0 * omega - 2.0 * slope;
        const double c0 = -2.0 * l0 + 2.0 * slope * g0;
        sum += detail::exp_linear_integral(c0, c1, g0, std::min(g1, a));
    }
    return std::log(sum);
}

/// || 1/m ||_{e^{-omega .} L^2([0, a])} = (int_0^a m^{-2} e^{2 omega s} ds)^{1/2}.
inline double weight_norm(const WeightSpec& m, double omega, double a) {
    return std::exp(0.5 * log_weight_integral(m, omega, a));
}

// ---------------------------------------------------------------------------
// Bound curves

struct BoundCurve {
    std::vector<double> t;
    std::vector<double> values;
    std::string method;
    std::vector<std::pair<std::string, std::string>> params;

    void set(const std::string& key, double v) { set(key, format_double(v)); }
    void set(const std::string& key, const std::string& v) {
        for (auto& kv : params)
            if (kv.first == key) {
                kv.second = v;
                return;
            }
        params.emplace_back(key, v);
    }
    std::string param(const std::string& key) const {
        for (const auto& kv : params)
            if (kv.first == key) return kv.second;
        return {};
    }

    void validate() const {
        if (t.size() != values.size()) throw StructuralError("bound curve: grid and values differ in length");
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (!(t[i] > 0.0) || (i > 0 && !(t[i] > t[i - 1])))
                throw DomainError("bound curve: t grid must be positive and ascending");
            if (!(values[i] > 0.0) || !std::isfinite(values[i]))
                throw SaturationError("bound curve '" + method + "': value at t = " + format_double(t[i]) +
                                      " is not finite and positive");
        }
    }

    std::string to_csv() const {
        std::string out;
        for (const auto& [k, v] : params) out += "#" + k + "=" + v + "\n";
        out += "t,bound,method\n";
        for (std::size_t i = 0; i < t.size(); ++i)
            out += format_double(t[i]) + "," + format_double(values[i]) + "," + method + "\n";
        return out;
    }
};

inline void check_t(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("t must be positive and finite");
}

inline void check_r(double r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("r(omega) must be positive and finite");
}

// ---------------------------------------------------------------------------
// Main estimate: ||S(t)|| <= e^{omega t} / (r ||1/m||_{[0,a]} ||1/m||_{[0,t-a]})

inline double log_gps_bound(double r_omega, const WeightSpec& m, double omega, double t, double a) {
    check_r(r_omega);
    check_t(t);
    if (!(a > 0.0 && a < t)) throw DomainError("gps_bound: need 0 < a < t");
    return omega * t - std::log(r_omega) - 0.5 * log_weight_integral(m, omega, a) -
           0.5 * log_weight_integral(m, omega, t - a);
}

inline double gps_bound(double r_omega, const WeightSpec& m, double omega, double t, double a) {
    return std::exp(log_gps_bound(r_omega, m, omega, t, a));
}

/// Minimizes gps_bound over the split point a.
inline Minimum optimal_split(double r_omega, const WeightSpec& m, double omega, double t) {
    check_t(t);
    const double T = weight_horizon(m);
    if (t >= 2.0 * T) {
        std::ostringstream msg;
        msg << "optimal_split: t = " << t << " needs a, t - a <= T = " << T;
        throw DomainError(msg.str());
    }
    const double lo = std::max(0.0, t - T);
    const double hi = std::min(t, T);
    auto f = [&](double a) { return log_gps_bound(r_omega, m, omega, t, a); };
    // Closed endpoints are admissible unless they are 0 or t.
    const bool open = lo == 0.0 || hi == t;
    Minimum best = minimize_1d(f, lo, hi, open);
    // Interpolation kinks in a tabulated m can trap golden-section in a ripple;
    // the symmetric split is always a candidate.
    const double sym = f(0.5 * t);
    if (sym <= best.value) best = {0.5 * t, sym};
    best.value = std::exp(best.value);
    return best;
}

enum class SplitRule { Symmetric, Optimal };

inline BoundCurve gps_curve(double r_omega, const WeightSpec& m, double omega, const std::vector<double>& ts,
                            SplitRule rule = SplitRule::Symmetric) {
    BoundCurve c;
    c.method = "gps";
    c.set("omega", omega);
    c.set("r_omega", r_omega);
    c.set("split", rule == SplitRule::Symmetric ? "symmetric" : "optimal");
    if (const auto* e = std::get_if<Exponential>(&m)) {
        c.set("m", "exponential");
        c.set("M_hat", e->M_hat);
        c.set("omega_hat", e->omega_hat);
    } else {
        c.set("m", "tabulated");
        c.set("horizon_T", std::get<Tabulated>(m).horizon_T);
    }
    for (double t : ts) {
        c.t.push_back(t);
        c.values.push_back(rule == SplitRule::Symmetric ? gps_bound(r_omega, m, omega, t, 0.5 * t)
                                                        : optimal_split(r_omega, m, omega, t).value);
    }
    c.validate();
    return c;
}

// ---------------------------------------------------------------------------
// Exponential majorant, omega < omega_hat

inline void check_propa(double M_hat, double omega_hat, double omega, double r_omega) {
    if (!(M_hat >= 1.0)) throw DomainError("M_hat must be >= 1");
    check_r(r_omega);
    if (!(omega < omega_hat)) throw DomainError("this estimate needs omega < omega_hat; use gps with omega = omega_hat");
}

/// m^new(t) = 2 M^2 (omega_hat - omega) e^{omega t} / (r (1 - e^{(omega - omega_hat) t})).
inline double m_new(double M_hat, double omega_hat, double omega, double r_omega, double t) {
    check_propa(M_hat, omega_hat, omega, r_omega);
    check_t(t);
    const double d = omega_hat - omega;
    return 2.0 * M_hat * M_hat * d / (r_omega * -std::expm1(-d * t)) * std::exp(omega * t);
}

/// sup_t e^{-omega t} min(M e^{omega_hat t}, m^new(t)), by numeric maximization.
inline double combined_M(double M_hat, double omega_hat, double omega, double r_omega) {
    check_propa(M_hat, omega_hat, omega, r_omega);
    const double d = omega_hat - omega;
    const double K = 2.0 * M_hat * M_hat * d / r_omega;
    // Substituting u = e^{-d t} in (0, 1): min(M/u, K/(1-u)).
    auto neg = [&](double u) { return -std::min(M_hat / u, K / (1.0 - u)); };
    return -minimize_1d(neg, 0.0, 1.0, true, {4096, 1e-14, 400}).value;
}

/// ||S(t)|| <= M (1 + 2M (omega_hat - omega)/r) e^{omega t}.
inline double propa_constant(double M_hat, double omega_hat, double omega, double r_omega) {
    check_propa(M_hat, omega_hat, omega, r_omega);
    return M_hat * (1.0 + 2.0 * M_hat * (omega_hat - omega) / r_omega);
}

inline BoundCurve propa_curve(double M_hat, double omega_hat, double omega, double r_omega,
                              const std::vector<double>& ts) {
    const double M = propa_constant(M_hat, omega_hat, omega, r_omega);
    BoundCurve c;
    c.method = "propa";
    c.set("M_hat", M_hat);
    c.set("omega_hat", omega_hat);
    c.set("omega", omega);
    c.set("r_omega", r_omega);
    c.set("M", M);
    for (double t : ts) {
        check_t(t);
        c.t.push_back(t);
        c.values.push_back(M * std::exp(omega * t));
    }
    c.validate();
    return c;
}

/// Shifted estimate through omega' = omega - s r: valid for s in [0, 1), omega <= omega_hat
/// (omega = omega_hat only with s > 0).
inline double log_contrb_bound(double M_hat, double omega_hat, double omega, double r_omega, double s, double t) {
    if (!(s >= 0.0 && s < 1.0)) throw DomainError("s must lie in [0, 1)");
    if (!(M_hat >= 1.0)) throw DomainError("M_hat must be >= 1");
    check_r(r_omega);
    check_t(t);
    if (omega > omega_hat || (omega == omega_hat && s == 0.0))
        throw DomainError("contrb needs omega - s r(omega) < omega_hat");
    const double num = (1.0 - s) * r_omega + 2.0 * M_hat * (omega_hat - omega + s * r_omega);
    return std::log(M_hat) + std::log(num) - std::log((1.0 - s) * r_omega) + (omega - s * r_omega) * t;
}

inline double contrb_bound(double M_hat, double omega_hat, double omega, double r_omega, double s, double t) {
    return std::exp(log_contrb_bound(M_hat, omega_hat, omega, r_omega, s, t));
}

/// Best s in [0, 1) at fixed t.
inline Minimum optimal_contrb(double M_hat, double omega_hat, double omega, double r_omega, double t) {
    const double s_lo = omega == omega_hat ? 1e-12 : 0.0;
    auto f = [&](double s) { return log_contrb_bound(M_hat, omega_hat, omega, r_omega, s, t); };
    Minimum best = minimize_1d(f, s_lo, 1.0 - 1e-12);
    best.value = std::exp(best.value);
    return best;
}

enum class SRule { Optimal, Schedule };

inline BoundCurve contrb_curve(double M_hat, double omega_hat, double omega, double r_omega,
                               const std::vector<double>& ts, SRule rule = SRule::Optimal) {
    BoundCurve c;
    c.method = "contrb";
    c.set("M_hat", M_hat);
    c.set("omega_hat", omega_hat);
    c.set("omega", omega);
    c.set("r_omega", r_omega);
    c.set("s_rule", rule == SRule::Optimal ? "optimal" : "t/(1+t)");
    for (double t : ts) {
        c.t.push_back(t);
        c.values.push_back(rule == SRule::Optimal
                               ? optimal_contrb(M_hat, omega_hat, omega, r_omega, t).value
                               : contrb_bound(M_hat, omega_hat, omega, r_omega, t / (1.0 + t), t));
    }
    c.validate();
    return c;
}

/// The omega = omega_hat case: M ((1-s) + 2 M s)/(1-s) e^{(omega_hat - s r) t}, r = r(omega_hat).
inline double contrbprime_bound(double M_hat, double omega_hat, double r_hat, double s, double t) {
    if (!(s >= 0.0 && s < 1.0)) throw DomainError("s must lie in [0, 1)");
    if (!(M_hat >= 1.0)) throw DomainError("M_hat must be >= 1");
    check_r(r_hat);
    check_t(t);
    return M_hat * ((1.0 - s) + 2.0 * M_hat * s) / (1.0 - s) * std::exp((omega_hat - s * r_hat) * t);
}

inline BoundCurve contrbprime_curve(double M_hat, double omega_hat, double r_hat, const std::vector<double>& ts) {
    BoundCurve c;
    c.method = "contrbprime";
    c.set("M_hat", M_hat);
    c.set("omega_hat", omega_hat);
    c.set("r_omega_hat", r_hat);
    for (double t : ts) {
        auto f = [&](double s) { return std::log(contrbprime_bound(M_hat, omega_hat, r_hat, s, t)); };
        const Minimum best = minimize_1d(f, 0.0, 1.0 - 1e-12);
        c.t.push_back(t);
        c.values.push_back(std::exp(best.value));
    }
    c.validate();
    return c;
}

// ---------------------------------------------------------------------------
// Power trick: S(t) = S(t/N)^N with ||S(tau)|| <= 2 M^2 e^{omega_hat tau}/(r tau)

inline double log_power_bound(double M_hat, double r0, double t, int N) {
    if (!(M_hat >= 1.0)) throw DomainError("M_hat must be >= 1");
    check_r(r0);
    check_t(t);
    if (N < 1) throw DomainError("N must be >= 1");
    return N * std::log(2.0 * M_hat * M_hat * N / (r0 * t));
}

/// (2 M^2 N/(r0 t))^N, the bound for omega_hat = 0.
inline double power_bound(double M_hat, double r0, double t, int N) {
    return std::exp(log_power_bound(M_hat, r0, t, N));
}

struct PowerChoice {
    int N = 1;
    double value = 0.0;
};

/// Least bound over N in 1..ceil(alpha t) + 2.
inline PowerChoice optimal_power(double M_hat, double r0, double t, double alpha) {
    if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
    const int n_max = static_cast<int>(std::ceil(alpha * t)) + 2;
    PowerChoice best{1, std::numeric_limits<double>::infinity()};
    double best_log = std::numeric_limits<double>::infinity();
    for (int N = 1; N <= n_max; ++N) {
        const double l = log_power_bound(M_hat, r0, t, N);
        if (l < best_log) {
            best_log = l;
            best.N = N;
        }
    }
    best.value = std::exp(best_log);
    return best;
}

/// N = floor(alpha t), at least 1.
inline double scheduled_power(double M_hat, double r0, double t, double alpha) {
    const int N = std::max(1, static_cast<int>(std::floor(alpha * t)));
    return power_bound(M_hat, r0, t, N);
}

/// Curve for a general omega_hat: e^{omega_hat t} times the optimized power bound with r0 = r(omega_hat).
inline BoundCurve power_curve(double M_hat, double omega_hat, double r_hat, const std::vector<double>& ts,
                              double alpha) {
    if (!(alpha < r_hat / (2.0 * M_hat * M_hat)))
        throw DomainError("power schedule needs alpha < r/(2 M_hat^2)");
    BoundCurve c;
    c.method = "power";
    c.set("M_hat", M_hat);
    c.set("omega_hat", omega_hat);
    c.set("r_omega_hat", r_hat);
    c.set("alpha", alpha);
    for (double t : ts) {
        const auto p = optimal_power(M_hat, r_hat, t, alpha);
        c.t.push_back(t);
        c.values.push_back(std::exp(std::log(p.value) + omega_hat * t));
    }
    c.validate();
    return c;
}

// ---------------------------------------------------------------------------
// omega -> omega_0

/// Phi(t) = min over profile nodes in (omega0, omega0 + eps0] of t (omega - omega0) - ln r_lo(omega).
inline double phi_limit(const ResolventProfile& prof, double omega0, double t, double epsilon0,
                        double* argmin_omega = nullptr) {
    if (!(t >= 1.0)) throw DomainError("phi_limit needs t >= 1");
    if (!(epsilon0 > 0.0)) throw DomainError("phi_limit needs epsilon0 > 0");
    double best = std::numeric_limits<double>::infinity();
    double best_w = omega0;
    for (const auto& p : prof.points()) {
        if (!(p.omega > omega0 && p.omega <= omega0 + epsilon0) || !(p.r_lo > 0.0)) continue;
        const double v = t * (p.omega - omega0) - std::log(p.r_lo);
        if (v < best) {
            best = v;
            best_w = p.omega;
        }
    }
    if (!std::isfinite(best)) throw DomainError("phi_limit: no profile node in (omega0, omega0 + epsilon0]");
    if (argmin_omega) *argmin_omega = best_w;
    return best;
}

/// ||S(t)|| <= e^{omega0 t + Phi(t)} / int_0^{1/2} m^{-2} e^{2 omega0 s} ds, t >= 1.
inline BoundCurve phi_limit_curve(const ResolventProfile& prof, double omega0, const WeightSpec& m,
                                  const std::vector<double>& ts, double epsilon0) {
    const double log_k = log_weight_integral(m, omega0, 0.5);
    BoundCurve c;
    c.method = "phi_limit";
    c.set("omega0", omega0);
    c.set("epsilon0", epsilon0);
    c.set("log_K", log_k);
    for (double t : ts) {
        c.t.push_back(t);
        c.values.push_back(std::exp(omega0 * t + phi_limit(prof, omega0, t, epsilon0) - log_k));
    }
    c.validate();
    return c;
}

// ---------------------------------------------------------------------------
// Optimal cutoff chi(s) = C int_s^a m^{-2} e^{2 omega sigma} d sigma

struct OptimalCutoff {
    std::vector<double> s;
    std::vector<double> chi;
    double derivative_norm = 0.0;    // || chi' m ||_{e^{omega .} L^2}, by quadrature
    double reciprocal_weight = 0.0;  // 1 / || 1/m ||_{e^{-omega .} L^2([0, a])}
    double total_variation = 0.0;    // int_0^a |chi'|, by quadrature
};

namespace detail {

inline double simpson(const std::vector<double>& f, double h) {
    const std::size_t n = f.size() - 1; // even
    double acc = f.front() + f.back();
    for (std::size_t i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f[i];
    return acc * h / 3.0;
}

} // namespace detail

inline OptimalCutoff optimal_cutoff(const WeightSpec& m, double omega, double a, int n_grid = 4096) {
    if (!(a > 0.0)) throw DomainError("optimal_cutoff needs a > 0");
    if (n_grid < 4 || n_grid % 2) throw DomainError("optimal_cutoff needs an even n_grid >= 4");
    validate(m);
    if (a >= weight_horizon(m)) throw DomainError("optimal_cutoff: m is infinite inside [0, a]");

    const double log_total = log_weight_integral(m, omega, a);
    const double h = a / n_grid;
    OptimalCutoff out;
    out.s.resize(static_cast<std::size_t>(n_grid) + 1);
    out.chi.resize(out.s.size());
    for (int i = 0; i <= n_grid; ++i) {
        const double s = i == n_grid ? a : i * h;
        out.s[static_cast<std::size_t>(i)] = s;
        double chi = 0.0;
        if (i == 0) {
            chi = 1.0;
        } else if (i < n_grid) {
            chi = -std::expm1(log_weight_integral(m, omega, s) - log_total);
        }
        out.chi[static_cast<std::size_t>(i)] = std::clamp(chi, 0.0, 1.0);
    }
    // chi' by second-order finite differences, then both sides of Cauchy-Schwarz.
    const std::size_t n = out.s.size();
    std::vector<double> d(n);
    d[0] = (-3.0 * out.chi[0] + 4.0 * out.chi[1] - out.chi[2]) / (2.0 * h);
    d[n - 1] = (3.0 * out.chi[n - 1] - 4.0 * out.chi[n - 2] + out.chi[n - 3]) / (2.0 * h);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (out.chi[i + 1] - out.chi[i - 1]) / (2.0 * h);
    std::vector<double> sq(n);
    std::vector<double> ab(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = d[i] * weight_value(m, out.s[i]) * std::exp(-omega * out.s[i]);
        sq[i] = w * w;
        ab[i] = std::abs(d[i]);
    }
    out.derivative_norm = std::sqrt(detail::simpson(sq, h));
    out.total_variation = detail::simpson(ab, h);
    out.reciprocal_weight = std::exp(-0.5 * log_total);
    return out;
}

} // namespace semibound
