#pragma once

// Certified enclosures of r(omega) = 1 / sup_{Re z >= omega} ||(z - A)^{-1}||.
//
// For a matrix the sup over the closed half-plane is attained on its boundary
// line, so r(omega) = inf_y sigma_min(omega + iy - A). sigma_min is 1-Lipschitz
// in z, which turns a finite set of samples into a certified lower bound.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "semibound/errors.hpp"
#include "semibound/linalg.hpp"
#include "semibound/parallel.hpp"

namespace semibound {

inline constexpr double kDefaultRelWidth = 1e-4;

/// Certified enclosure of r on one line Re z = omega.
struct RInterval {
    double omega = 0.0;
    double r_lo = 0.0;
    double r_hi = 0.0;
    double argmin_y = 0.0;
    double window_Y = 0.0;
    int evaluations = 0;
};

/// Which hypothesis guards the sweep.
enum class SpectrumCheck {
    HalfPlane, // no eigenvalue with Re >= omega (r of the half-plane)
    LineOnly,  // no eigenvalue on the line itself; spectrum may lie to the right
};

/// Reusable sweep context: one operator, its factorization backend and spectrum.
class LineSweeper {
public:
    explicit LineSweeper(const OperatorMatrix& a) : LineSweeper(a, eigenvalues(a)) {}

    LineSweeper(const OperatorMatrix& a, std::vector<Complex> eigs)
        : a_(a), solver_(a), eigs_(std::move(eigs)), abscissa_(spectral_abscissa(eigs_)) {
        // Field of values W(A) lies in the box [re_lo, re_hi] x [im_lo, im_hi], and
        // sigma_min(zI - A) >= dist(z, W(A)).
        const Matrix& m = a_.matrix();
        const Eigen::VectorXd re = lapack::hermitian_eigenvalues(Matrix(0.5 * (m + m.adjoint())));
        const Eigen::VectorXd im =
            lapack::hermitian_eigenvalues(Matrix((m - m.adjoint()) * Complex(0.0, -0.5)));
        re_range_ = {re(0), re(re.size() - 1)};
        im_range_ = {im(0), im(im.size() - 1)};
    }

    const OperatorMatrix& op() const noexcept { return a_; }
    const std::vector<Complex>& spectrum() const noexcept { return eigs_; }
    double abscissa() const noexcept { return abscissa_; }
    double sigma(Complex z) const { return solver_.sigma_min(z); }
    /// max eigenvalue of (A + A^*)/2.
    double numerical_abscissa() const noexcept { return re_range_.second; }
    /// Lower bound on sigma_min(zI - A) from the field of values.
    double range_bound(Complex z) const {
        return std::max(interval_distance(z.real(), z.real(), re_range_), interval_distance(z.imag(), z.imag(), im_range_));
    }

    /// Minimum distance between the line and the spectrum is below this: "on the line".
    double line_tolerance() const { return 1e-10 * (1.0 + a_.norm()); }

    RInterval sweep(double omega, double rel_width = kDefaultRelWidth,
                    SpectrumCheck check = SpectrumCheck::HalfPlane, int max_evaluations = 400000) const;

private:
    OperatorMatrix a_;
    ShiftedSolver solver_;
    std::vector<Complex> eigs_;
    double abscissa_;
    std::pair<double, double> re_range_;
    std::pair<double, double> im_range_;

    static double interval_distance(double lo, double hi, std::pair<double, double> r) {
        return std::max({0.0, r.first - hi, lo - r.second});
    }
};

inline RInterval LineSweeper::sweep(double omega, double rel_width, SpectrumCheck check,
                                    int max_evaluations) const {
    if (!std::isfinite(omega)) throw DomainError("omega must be finite");
    if (!(rel_width > 0.0 && rel_width <= 0.5)) throw DomainError("rel_width must lie in (0, 0.5]");
    if (check == SpectrumCheck::HalfPlane) {
        if (abscissa_ >= omega) {
            std::ostringstream msg;
            msg << "spectrum in the half-plane Re z >= " << omega << " (spectral abscissa "
                << abscissa_ << "); r(omega) is zero";
            throw HypothesisError(msg.str());
        }
    } else {
        for (Complex l : eigs_) {
            if (std::abs(l.real() - omega) < line_tolerance()) {
                std::ostringstream msg;
                msg << "eigenvalue " << l.real() << (l.imag() < 0 ? "" : "+") << l.imag()
                    << "i lies on the line Re z = " << omega;
                throw HypothesisError(msg.str());
            }
        }
    }

    const double norm = a_.norm();
    const double line_floor = interval_distance(omega, omega, re_range_);
    // sigma_min on the segment [y0, y1] is at least this.
    auto range_lb = [&](double y0, double y1) {
        return std::max(line_floor, interval_distance(y0, y1, im_range_));
    };

    RInterval out;
    out.omega = omega;
    int evals = 0;
    auto g = [&](double y) {
        ++evals;
        return sigma(Complex(omega, y));
    };

    struct Node {
        double y;
        double v;
    };
    struct Gap {
        double lb;
        Node left;
        Node right;
        bool operator<(const Gap& o) const { return lb > o.lb; } // min-heap on lb
    };
    auto gap = [&](const Node& l, const Node& r) {
        const double cone = 0.5 * (l.v + r.v - (r.y - l.y));
        return Gap{std::max(cone, range_lb(l.y, r.y)), l, r};
    };

    double best = std::numeric_limits<double>::infinity();
    double best_y = 0.0;
    auto record = [&](const Node& n) {
        if (n.v < best || (n.v == best && std::abs(n.y) < std::abs(best_y))) {
            best = n.v;
            best_y = n.y;
        }
    };

    // Outside [im_lo - pad, im_hi + pad] sigma_min >= pad, so once pad >= best
    // the window holds the infimum.
    std::priority_queue<Gap> gaps;
    std::vector<Node> seed;
    constexpr int kSeeds = 129;
    double pad = std::max(1.0, 0.125 * (im_range_.second - im_range_.first));
    double y_lo = 0.0, y_hi = 0.0;
    for (;;) {
        gaps = {};
        seed.clear();
        best = std::numeric_limits<double>::infinity();
        y_lo = im_range_.first - pad;
        y_hi = im_range_.second + pad;
        for (int i = 0; i < kSeeds; ++i) {
            const double y = y_lo + (y_hi - y_lo) * i / (kSeeds - 1);
            seed.push_back({y, g(y)});
            record(seed.back());
        }
        if (pad >= best || line_floor >= best) break;
        pad = 2.0 * best;
        if (pad > 1e12 * (1.0 + norm + std::abs(omega)))
            throw ConvergenceError("sweep window enlargement did not terminate");
    }
    for (int i = 0; i + 1 < kSeeds; ++i) gaps.push(gap(seed[i], seed[i + 1]));

    const double tail_lb = std::max(pad, line_floor);
    const double abs_floor = 1e-15 * (1.0 + norm);
    for (;;) {
        const double lb = std::max(0.0, std::min(gaps.top().lb, tail_lb));
        if (best <= lb * (1.0 + rel_width) || best - lb <= abs_floor) {
            out.r_lo = std::min(lb, best);
            break;
        }
        if (evals >= max_evaluations) {
            std::ostringstream msg;
            msg << "line sweep at omega = " << omega << " hit the evaluation cap (" << max_evaluations
                << "); enclosure [" << lb << ", " << best << "]";
            throw ConvergenceError(msg.str());
        }
        const Gap top = gaps.top();
        gaps.pop();
        // Split where the two Lipschitz cones meet.
        double y = 0.5 * (top.left.y + top.right.y) + 0.5 * (top.left.v - top.right.v);
        const double span = top.right.y - top.left.y;
        y = std::clamp(y, top.left.y + 0.05 * span, top.right.y - 0.05 * span);
        const Node mid{y, g(y)};
        record(mid);
        gaps.push(gap(top.left, mid));
        gaps.push(gap(mid, top.right));
    }
    const double Y = std::max(std::abs(y_lo), std::abs(y_hi));
    out.r_hi = best;
    out.argmin_y = best_y;
    out.window_Y = Y;
    out.evaluations = evals;
    return out;
}

/// Certified [r_lo, r_hi] for the half-plane Re z >= omega.
inline RInterval r_of_omega(const OperatorMatrix& a, double omega, double rel_width = kDefaultRelWidth) {
    return LineSweeper(a).sweep(omega, rel_width, SpectrumCheck::HalfPlane);
}

/// Same enclosure for the line Re z = omega only (spectrum may lie to the right).
inline RInterval r_on_line(const OperatorMatrix& a, double omega, double rel_width = kDefaultRelWidth) {
    return LineSweeper(a).sweep(omega, rel_width, SpectrumCheck::LineOnly);
}

/// Lower bound r(omega) - (omega - omega') for r(omega'), valid for
/// omega' in (omega - r(omega), omega].
inline double lipschitz_extend(double r_at_omega, double omega, double omega_prime) {
    if (!(r_at_omega > 0.0)) throw DomainError("lipschitz_extend: r(omega) must be positive");
    if (omega_prime > omega) throw DomainError("lipschitz_extend: omega' must not exceed omega");
    if (omega_prime <= omega - r_at_omega) {
        std::ostringstream msg;
        msg << "lipschitz_extend: omega' = " << omega_prime << " is outside (omega - r(omega), omega] = ("
            << omega - r_at_omega << ", " << omega << "]";
        throw DomainError(msg.str());
    }
    return r_at_omega - (omega - omega_prime);
}

/// Map omega -> certified r, over an ascending grid.
class ResolventProfile {
public:
    ResolventProfile() = default;

    explicit ResolventProfile(std::vector<RInterval> points) : points_(std::move(points)) {
        for (std::size_t i = 1; i < points_.size(); ++i)
            if (!(points_[i].omega > points_[i - 1].omega))
                throw DomainError("profile omega grid must be strictly ascending");
        for (const auto& p : points_)
            if (!(p.r_lo >= 0.0 && p.r_lo <= p.r_hi)) throw DomainError("profile needs 0 <= r_lo <= r_hi");
    }

    /// Profile given exactly by a function (r_lo = r_hi = r(omega)); used for model profiles.
    static ResolventProfile from_function(const std::function<double(double)>& r,
                                          const std::vector<double>& omega_grid) {
        std::vector<RInterval> pts;
        pts.reserve(omega_grid.size());
        for (double w : omega_grid) {
            const double v = r(w);
            pts.push_back({w, v, v, 0.0, 0.0, 0});
        }
        return ResolventProfile(std::move(pts));
    }

    const std::vector<RInterval>& points() const noexcept { return points_; }
    bool empty() const noexcept { return points_.empty(); }
    std::size_t size() const noexcept { return points_.size(); }

    /// Largest certification width max(r_hi - r_lo).
    double grid_resolution() const {
        double d = 0.0;
        for (const auto& p : points_) d = std::max(d, p.r_hi - p.r_lo);
        return d;
    }

    double sweep_window() const {
        double y = 0.0;
        for (const auto& p : points_) y = std::max(y, p.window_Y);
        return y;
    }

    /// Consecutive pairs whose enclosures rule out a slope in [0, 1].
    std::vector<std::size_t> slope_violations(double tol = 0.0) const {
        std::vector<std::size_t> bad;
        for (std::size_t i = 1; i < points_.size(); ++i) {
            const auto& p = points_[i - 1];
            const auto& q = points_[i];
            const double dw = q.omega - p.omega;
            if (q.r_hi < p.r_lo - tol || q.r_lo - p.r_hi > dw + tol) bad.push_back(i);
        }
        return bad;
    }

    std::string to_csv() const {
        std::ostringstream out;
        out.precision(17);
        out << "omega,r_lo,r_hi,argmin_y,window_Y\n";
        for (const auto& p : points_)
            out << p.omega << ',' << p.r_lo << ',' << p.r_hi << ',' << p.argmin_y << ',' << p.window_Y << '\n';
        return out.str();
    }

private:
    std::vector<RInterval> points_;
};

/// Sweeps every omega (in parallel) and checks 0 <= dr/domega <= 1 up to the
/// certification widths.
inline ResolventProfile profile(const LineSweeper& sweeper, const std::vector<double>& omega_grid,
                                double rel_width = kDefaultRelWidth) {
    std::vector<RInterval> pts(omega_grid.size());
    parallel_for(omega_grid.size(), [&](std::size_t i) { pts[i] = sweeper.sweep(omega_grid[i], rel_width); });
    ResolventProfile prof(std::move(pts));
    const auto bad = prof.slope_violations(1e-12 * (1.0 + sweeper.op().norm()));
    if (!bad.empty()) {
        const auto& q = prof.points()[bad.front()];
        std::ostringstream msg;
        msg << "profile slope outside [0, 1] near omega = " << q.omega;
        throw ConvergenceError(msg.str());
    }
    return prof;
}

inline ResolventProfile profile(const OperatorMatrix& a, const std::vector<double>& omega_grid,
                                double rel_width = kDefaultRelWidth) {
    return profile(LineSweeper(a), omega_grid, rel_width);
}

/// Growth abscissa. For a matrix this is the spectral abscissa; the probes
/// confirm r > 0 and nondecreasing to its right.
inline double omega0_estimate(const LineSweeper& sweeper, const std::vector<double>& probe_omegas,
                              double rel_width = 1e-2) {
    std::vector<double> probes = probe_omegas;
    std::sort(probes.begin(), probes.end());
    for (double w : probes)
        if (!(w > sweeper.abscissa())) throw DomainError("omega0_estimate: probes must lie right of the spectrum");
    double prev_hi = 0.0;
    for (double w : probes) {
        const RInterval r = sweeper.sweep(w, rel_width);
        if (!(r.r_hi > 0.0)) throw ConvergenceError("omega0_estimate: r vanished right of the spectrum");
        if (r.r_hi < prev_hi * (1.0 - 2.0 * rel_width))
            throw ConvergenceError("omega0_estimate: r decreased along the probe grid");
        prev_hi = r.r_hi;
    }
    return sweeper.abscissa();
}

inline double omega0_estimate(const OperatorMatrix& a, const std::vector<double>& probe_omegas) {
    return omega0_estimate(LineSweeper(a), probe_omegas);
}

struct HilleYosidaReport {
    struct ResolventSample {
        double lambda;
        double resolvent_norm;
        double bound; // 1 / (lambda - omega)
        bool pass;
    };
    struct SemigroupSample {
        double t;
        double norm;
        double bound; // e^{omega t}
        bool pass;
    };
    std::vector<ResolventSample> resolvent;
    std::vector<SemigroupSample> semigroup;

    bool resolvent_pass() const {
        return std::all_of(resolvent.begin(), resolvent.end(), [](const auto& s) { return s.pass; });
    }
    bool semigroup_pass() const {
        return std::all_of(semigroup.begin(), semigroup.end(), [](const auto& s) { return s.pass; });
    }
    bool pass() const { return resolvent_pass() && semigroup_pass(); }
};

/// Samples both sides of: ||e^{tA}|| <= e^{omega t} for all t  <=>  ||(lambda - A)^{-1}|| <= 1/(lambda - omega)
/// for all lambda > omega.
inline HilleYosidaReport hille_yosida_check(const OperatorMatrix& a, double omega,
                                            const std::vector<double>& lambda_grid,
                                            const std::vector<double>& t_grid = {0.1, 0.25, 0.5, 1.0, 2.0, 4.0}) {
    constexpr double tol = 1e-12;
    HilleYosidaReport rep;
    for (double l : lambda_grid) {
        if (!(l > omega)) throw DomainError("hille_yosida_check: lambda must exceed omega");
        const double rn = resolvent_norm(a, l);
        const double b = 1.0 / (l - omega);
        rep.resolvent.push_back({l, rn, b, rn <= b * (1.0 + tol)});
    }
    for (double t : t_grid) {
        const double s = semigroup_norm(a, t);
        const double b = std::exp(omega * t);
        rep.semigroup.push_back({t, s, b, s <= b * (1.0 + tol)});
    }
    return rep;
}

} // namespace semibound
