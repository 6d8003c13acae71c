#pragma once

// Deterministic 1-D minimization: a coarse uniform grid locates the basin,
// golden-section refines it. Ties go to the smaller parameter.

#include <cmath>
#include <functional>
#include <limits>

#include "semibound/errors.hpp"

namespace semibound {

struct Minimum {
    double x = 0.0;
    double value = std::numeric_limits<double>::infinity();
};

struct MinimizeOptions {
    int grid_points = 256;
    double rel_tol = 1e-8;
    int max_iter = 200;
};

/// Minimizes f over [lo, hi]. When `open` is set the endpoints are excluded
/// from the grid (f may be undefined there).
inline Minimum minimize_1d(const std::function<double(double)>& f, double lo, double hi,
                           bool open = false, MinimizeOptions opt = {}) {
    if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
        throw DomainError("minimize_1d: empty or non-finite interval");
    const int n = opt.grid_points;
    auto node = [&](int i) {
        return open ? lo + (hi - lo) * (i + 1) / (n + 1) : lo + (hi - lo) * i / (n - 1);
    };
    int best = -1;
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double v = f(node(i));
        if (v < best_val) { // strict: earliest (smallest x) wins ties
            best_val = v;
            best = i;
        }
    }
    if (best < 0) throw ConvergenceError("minimize_1d: objective is not finite on the grid");

    double a = best > 0 ? node(best - 1) : (open ? lo + 0.5 * (node(0) - lo) : lo);
    double b = best < n - 1 ? node(best + 1) : (open ? hi - 0.5 * (hi - node(n - 1)) : hi);
    constexpr double inv_phi = 0.6180339887498949;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    Minimum out{node(best), best_val};
    const double scale = std::max(std::abs(lo), std::abs(hi));
    for (int it = 0; it < opt.max_iter && (b - a) > opt.rel_tol * std::max(scale, 1e-300); ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if (fc < out.value || (fc == out.value && c < out.x)) out = {c, fc};
    if (fd < out.value) out = {d, fd};
    return out;
}

} // namespace semibound
