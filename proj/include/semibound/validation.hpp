#pragma once

// Domination suite: every bound family against ||e^{tA}|| on one operator,
// with parameters chosen from the spectrum and the numerical range.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "semibound/appendix_recursion.hpp"
#include "semibound/bounds.hpp"
#include "semibound/format.hpp"
#include "semibound/linalg.hpp"
#include "semibound/resolvent_profile.hpp"
#include "semibound/spectral_split.hpp"

namespace semibound {

struct SuiteOptions {
    std::vector<double> ts{0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
    double rel_width = kDefaultRelWidth;
    double appendix_T = 1.0;
    int appendix_steps = 1024; // h = T / steps
    bool sampled_split = false;
};

struct MethodResult {
    std::string label;
    BoundCurve curve;
    std::vector<double> truth; // the norm this method bounds, on curve.t
    double max_ratio = 0.0;    // max truth / bound
    bool applicable = true;
    std::string note;
    double seconds = 0.0;
};

/// Domination with relative slack: bound >= truth (1 - 1e-9).
inline constexpr double kDominationSlack = 1e-9;

/// Fallback enclosure width for line sweeps that hit the evaluation cap.
inline constexpr double kLooseRelWidth = 1e-2;

inline bool dominates(double max_ratio) { return max_ratio * (1.0 - kDominationSlack) <= 1.0; }

struct SuiteReport {
    std::string op;
    double alpha = 0.0; // spectral abscissa
    double mu = 0.0;    // numerical abscissa
    double norm = 0.0;
    std::vector<double> ts;
    std::vector<double> truth;
    std::vector<MethodResult> methods;
    std::vector<std::string> errors; // methods that failed numerically
    std::vector<Complex> spectrum;
    std::vector<RInterval> sweeps; // every half-plane r(omega) evaluated
    struct SplitDiagnostics {
        std::size_t inside = 0;
        double trace_error = 0.0; // |trace - #inside|
        double idempotency = 0.0;
        double commutation = 0.0;
        double projector_norm = 0.0;
    };
    std::optional<SplitDiagnostics> split; // set when the split was computed

    bool pass() const {
        if (!errors.empty()) return false;
        for (const auto& m : methods)
            if (m.applicable && !dominates(m.max_ratio)) return false;
        return true;
    }

    /// operator,method,t,truth,bound,ratio
    std::string to_csv() const {
        std::string out = "operator,method,t,truth,bound,ratio\n";
        for (const auto& m : methods) {
            if (!m.applicable) continue;
            for (std::size_t i = 0; i < m.curve.t.size(); ++i)
                out += op + "," + m.label + "," + format_double(m.curve.t[i]) + "," + format_double(m.truth[i]) + "," +
                       format_double(m.curve.values[i]) + "," + format_double(m.truth[i] / m.curve.values[i]) + "\n";
        }
        return out;
    }
};

namespace detail {

inline double max_ratio(const std::vector<double>& truth, const std::vector<double>& bound) {
    double worst = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) worst = std::max(worst, truth[i] / bound[i]);
    return worst;
}

/// Real part of the second spectral cluster (real parts closer than tol merge), or NaN.
inline double second_real_cluster(std::span<const Complex> eigs, double tol) {
    std::vector<double> re;
    for (Complex l : eigs) re.push_back(l.real());
    std::sort(re.rbegin(), re.rend());
    for (std::size_t i = 1; i < re.size(); ++i)
        if (re[i - 1] - re[i] > tol) return re[i];
    return NAN;
}

} // namespace detail

/// Split line halfway between the rightmost real-part cluster and the next one (NaN if none).
inline double default_split_line(std::span<const Complex> eigs, double tol) {
    const double next = detail::second_real_cluster(eigs, tol);
    if (std::isnan(next)) return NAN;
    return 0.5 * (spectral_abscissa(eigs) + next);
}

/// Runs every bound family on the sweeper's operator.
inline SuiteReport domination_suite(const LineSweeper& sw, const SuiteOptions& opt = {},
                                    const std::function<void(const std::string&)>& log = {}) {
    using clock = std::chrono::steady_clock;
    const OperatorMatrix& a = sw.op();
    SuiteReport rep;
    rep.op = a.label().empty() ? "operator" : a.label();
    rep.ts = opt.ts;
    rep.norm = a.norm();
    rep.spectrum = sw.spectrum();
    rep.alpha = sw.abscissa();
    rep.mu = sw.numerical_abscissa();
    rep.truth = semigroup_norms(a, opt.ts);
    const WeightSpec m = Exponential{1.0, rep.mu};

    auto run = [&](const std::string& label, auto&& body) {
        MethodResult r;
        r.label = label;
        r.truth = rep.truth;
        const auto t0 = clock::now();
        try {
            body(r);
            if (r.applicable) {
                r.curve.set("label", label);
                r.max_ratio = detail::max_ratio(r.truth, r.curve.values);
            }
        } catch (const HypothesisError& e) {
            r.applicable = false;
            r.note = e.what();
        } catch (const Error& e) {
            rep.errors.push_back(label + ": " + e.what());
            r.applicable = false;
            r.note = std::string("failed: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(clock::now() - t0).count();
        if (log)
            log(rep.op + " " + label + (r.applicable ? " max truth/bound " + format_double(r.max_ratio) : " n/a: " + r.note) +
                " (" + format_double(std::round(r.seconds * 100) / 100) + " s)");
        rep.methods.push_back(std::move(r));
    };

    auto sweep = [&](double w) {
        rep.sweeps.push_back(sw.sweep(w, opt.rel_width));
        return rep.sweeps.back().r_lo;
    };

    // gps on three lines right of the spectrum.
    const double spread = std::max(rep.mu - rep.alpha, 0.05 * (1.0 + std::abs(rep.alpha)));
    double mid_omega = 0.0, mid_r = 0.0;
    for (double f : {0.25, 0.5, 1.0}) {
        const double w = rep.alpha + f * spread;
        run("gps(omega=" + format_double(w) + ")", [&](MethodResult& r) {
            const double rw = sweep(w);
            if (f == 0.5) mid_omega = w, mid_r = rw;
            r.curve = gps_curve(rw, m, w, opt.ts);
        });
    }

    // Families that need alpha < omega < omega_hat = mu.
    const bool gap = rep.mu - rep.alpha > 1e-9 * (1.0 + std::abs(rep.alpha));
    const double wp = rep.alpha + 0.5 * (rep.mu - rep.alpha);
    double r_p = 0.0, r_hat = 0.0;
    auto need_gap = [&] {
        if (!gap)
            throw HypothesisError("numerical abscissa equals the spectral abscissa; no omega in (alpha, omega_hat)");
    };
    run("propa(omega=" + format_double(wp) + ")", [&](MethodResult& r) {
        need_gap();
        r_p = sweep(wp);
        r.curve = propa_curve(1.0, rep.mu, wp, r_p, opt.ts);
    });
    run("contrb(omega=" + format_double(wp) + ")", [&](MethodResult& r) {
        need_gap();
        if (!(r_p > 0.0)) r_p = sweep(wp);
        r.curve = contrb_curve(1.0, rep.mu, wp, r_p, opt.ts, SRule::Optimal);
    });
    run("contrbprime", [&](MethodResult& r) {
        need_gap();
        r_hat = sweep(rep.mu);
        r.curve = contrbprime_curve(1.0, rep.mu, r_hat, opt.ts);
    });
    run("power", [&](MethodResult& r) {
        need_gap();
        if (!(r_hat > 0.0)) r_hat = sweep(rep.mu);
        r.curve = power_curve(1.0, rep.mu, r_hat, opt.ts, r_hat / 4.0);
    });

    // Remainder of the spectral split.
    const double tol = contour_tolerance(a);
    const double w_split = default_split_line(sw.spectrum(), tol);
    auto split_with = [&](const std::string& label, bool sampled) {
        run(label, [&](MethodResult& r) {
            if (std::isnan(w_split)) throw HypothesisError("spectrum has a single real-part cluster; nothing to split off");
            const auto contour = split_contour(sw.spectrum(), w_split, tol);
            const auto sp = riesz_projection(a, contour, sw.spectrum());
            rep.split = SuiteReport::SplitDiagnostics{
                sp.sigma_plus.size(), std::abs(sp.trace - Complex(static_cast<double>(sp.sigma_plus.size()), 0.0)),
                sp.idempotency_defect, sp.commutation_defect, sp.projector.norm()};
            // Tiny r on the line makes a tight enclosure expensive; a looser one still certifies r_lo.
            double line_width = opt.rel_width;
            double rl = 0.0;
            try {
                rl = sw.sweep(w_split, line_width, SpectrumCheck::LineOnly).r_lo;
            } catch (const ConvergenceError&) {
                line_width = std::max(line_width, kLooseRelWidth);
                rl = sw.sweep(w_split, line_width, SpectrumCheck::LineOnly).r_lo;
            }
            const WeightSpec ms =
                sampled ? WeightSpec{sampled_complement_majorant(a, sp, 0.5 * opt.ts.back(), 64, rep.mu)} : m;
            const auto sr = split_report(a, sp, w_split, rl, ms, opt.ts);
            r.curve = sr.bound_curve();
            r.curve.set("r_rel_width", line_width);
            r.truth.clear();
            for (const auto& row : sr.rows) r.truth.push_back(row.R_true);
        });
    };
    split_with("split(omega_tilde=" + format_double(w_split) + ")", false);
    if (opt.sampled_split) split_with("split_sampled(omega_tilde=" + format_double(w_split) + ")", true);

    // Appendix extension of the Lumer-Phillips majorant beyond [0, T).
    run("appendix(omega=" + format_double(mid_omega) + ")", [&](MethodResult& r) {
        if (!(mid_r > 0.0)) throw HypothesisError("no r(omega) available for the appendix recursion");
        const double T = opt.appendix_T;
        const Tabulated m0{{0.0, T}, {1.0, std::exp((rep.mu - mid_omega) * T)}, T};
        const auto state = extend_majorant(m0, mid_omega, mid_r, opt.ts.back(), T / opt.appendix_steps);
        r.curve = appendix_curve(state, opt.ts);
    });
    return rep;
}

inline SuiteReport domination_suite(const OperatorMatrix& a, const SuiteOptions& opt = {},
                                    const std::function<void(const std::string&)>& log = {}) {
    return domination_suite(LineSweeper(a), opt, log);
}

} // namespace semibound
