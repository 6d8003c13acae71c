#pragma once

// Riesz projection onto the spectrum enclosed by a contour, and the bound on
// the remainder R(t) = e^{tA}(I - P) of the split e^{tA} = e^{tA}P + R(t).

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "semibound/bounds.hpp"
#include "semibound/format.hpp"
#include "semibound/linalg.hpp"
#include "semibound/parallel.hpp"
#include "semibound/resolvent_profile.hpp"

namespace semibound {

// ---------------------------------------------------------------------------
// Contours

struct Contour {
    enum class Kind { Circle, Rectangle };

    Kind kind = Kind::Circle;
    Complex center{};
    double radius = 1.0;
    Complex lower_left{};
    Complex upper_right{};
    /// Trapezoid nodes on a circle; total Gauss-Legendre nodes (16 per panel) on a rectangle.
    int nodes = 256;

    static Contour circle(Complex c, double r, int nodes = 256) {
        if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("circle radius must be positive");
        if (nodes < 4) throw DomainError("contour needs at least 4 nodes");
        Contour k;
        k.kind = Kind::Circle;
        k.center = c;
        k.radius = r;
        k.nodes = nodes;
        return k;
    }

    static Contour rectangle(Complex ll, Complex ur, int nodes = 256) {
        if (!(ur.real() > ll.real()) || !(ur.imag() > ll.imag()))
            throw DomainError("rectangle needs upper_right strictly above and right of lower_left");
        if (nodes < 64) throw DomainError("rectangle contour needs at least 64 nodes");
        Contour k;
        k.kind = Kind::Rectangle;
        k.lower_left = ll;
        k.upper_right = ur;
        k.nodes = nodes;
        return k;
    }

    bool encloses(Complex z) const {
        if (kind == Kind::Circle) return std::abs(z - center) < radius;
        return z.real() > lower_left.real() && z.real() < upper_right.real() && z.imag() > lower_left.imag() &&
               z.imag() < upper_right.imag();
    }

    /// Euclidean distance from z to the curve.
    double distance(Complex z) const {
        if (kind == Kind::Circle) return std::abs(std::abs(z - center) - radius);
        const double x0 = lower_left.real(), x1 = upper_right.real();
        const double y0 = lower_left.imag(), y1 = upper_right.imag();
        const double x = z.real(), y = z.imag();
        if (encloses(z)) return std::min({x - x0, x1 - x, y - y0, y1 - y});
        const double dx = std::max({x0 - x, 0.0, x - x1});
        const double dy = std::max({y0 - y, 0.0, y - y1});
        return std::hypot(dx, dy);
    }

    std::string describe() const {
        std::ostringstream s;
        s.precision(12);
        if (kind == Kind::Circle)
            s << "circle(center=" << center.real() << (center.imag() < 0 ? "" : "+") << center.imag()
              << "i, radius=" << radius << ", nodes=" << nodes << ")";
        else
            s << "rectangle([" << lower_left.real() << ", " << upper_right.real() << "] x [" << lower_left.imag()
              << ", " << upper_right.imag() << "], nodes=" << nodes << ")";
        return s.str();
    }
};

/// P = sum_k w_k (z_k - A)^{-1}.
struct QuadratureNode {
    Complex z;
    Complex w;
};

namespace detail {

/// n-point Gauss-Legendre rule on [-1, 1] (Golub-Welsch).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        j(k, k - 1) = j(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        x[static_cast<std::size_t>(k)] = es.eigenvalues()(k);
        const double v = es.eigenvectors()(0, k);
        w[static_cast<std::size_t>(k)] = 2.0 * v * v;
    }
    return {x, w};
}

inline constexpr int kPanelNodes = 16;

} // namespace detail

/// Quadrature nodes for (1/2 pi i) of the counterclockwise contour integral.
inline std::vector<QuadratureNode> quadrature(const Contour& c) {
    std::vector<QuadratureNode> out;
    if (c.kind == Contour::Kind::Circle) {
        const int n = c.nodes;
        out.reserve(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            // Half-step offset: on real-symmetric setups nodes come in conjugate pairs k, n-1-k.
            const double theta = 2.0 * kPi * (k + 0.5) / n;
            const Complex e = std::polar(1.0, theta);
            out.push_back({c.center + c.radius * e, c.radius * e / static_cast<double>(n)});
        }
        return out;
    }
    const Complex ll = c.lower_left, ur = c.upper_right;
    const Complex lr(ur.real(), ll.imag()), ul(ll.real(), ur.imag());
    const Complex corners[5] = {ll, lr, ur, ul, ll};
    const double perimeter = 2.0 * ((ur.real() - ll.real()) + (ur.imag() - ll.imag()));
    const int panels = std::max(4, c.nodes / detail::kPanelNodes);
    const auto [gx, gw] = detail::gauss_legendre(detail::kPanelNodes);
    const Complex two_pi_i(0.0, 2.0 * kPi);
    for (int e = 0; e < 4; ++e) {
        const Complex from = corners[e], to = corners[e + 1];
        const double len = std::abs(to - from);
        const int np = std::max(1, static_cast<int>(std::lround(panels * len / perimeter)));
        const Complex step = (to - from) / static_cast<double>(np);
        for (int p = 0; p < np; ++p) {
            const Complex mid = from + (p + 0.5) * step;
            for (std::size_t q = 0; q < gx.size(); ++q)
                out.push_back({mid + 0.5 * gx[q] * step, 0.5 * gw[q] * step / two_pi_i});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Riesz projection

struct SpectralSplit {
    OperatorMatrix projector;
    double complement_norm = 0.0; // ||I - P||
    std::vector<Complex> sigma_plus;
    Contour contour;
    Complex trace{};
    double idempotency_defect = 0.0; // ||P^2 - P||
    double commutation_defect = 0.0; // ||AP - PA||
};

namespace detail {

/// Sum of term(i) over [lo, hi) by recursive halving. The tree shape depends
/// only on the range, so the rounding is the same for any thread count.
template <class Dense, class Term>
Dense pairwise_sum(std::size_t lo, std::size_t hi, const Term& term) {
    if (hi - lo == 1) return term(lo);
    const std::size_t mid = lo + (hi - lo) / 2;
    Dense left = pairwise_sum<Dense>(lo, mid, term);
    left += pairwise_sum<Dense>(mid, hi, term);
    return left;
}

template <class Dense, class Term>
Dense parallel_pairwise_sum(std::size_t count, const Term& term) {
    // Cut the tree at the first depth with at least as many subtrees as workers.
    std::vector<std::pair<std::size_t, std::size_t>> leaves{{0, count}};
    const std::size_t want = std::min<std::size_t>(thread_limit(), count);
    while (leaves.size() < want) {
        std::vector<std::pair<std::size_t, std::size_t>> next;
        for (auto [lo, hi] : leaves) {
            if (hi - lo == 1) {
                next.emplace_back(lo, hi);
                continue;
            }
            const std::size_t mid = lo + (hi - lo) / 2;
            next.emplace_back(lo, mid);
            next.emplace_back(mid, hi);
        }
        if (next.size() == leaves.size()) break;
        leaves = std::move(next);
    }
    if (leaves.size() == 1) return pairwise_sum<Dense>(0, count, term);
    std::vector<Dense> parts(leaves.size());
    parallel_for(leaves.size(), [&](std::size_t i) { parts[i] = pairwise_sum<Dense>(leaves[i].first, leaves[i].second, term); });
    // Recombine along the same tree.
    std::size_t cursor = 0;
    auto combine = [&](auto&& self, std::size_t lo, std::size_t hi) -> Dense {
        if (cursor < leaves.size() && leaves[cursor] == std::make_pair(lo, hi)) return std::move(parts[cursor++]);
        const std::size_t mid = lo + (hi - lo) / 2;
        Dense left = self(self, lo, mid);
        left += self(self, mid, hi);
        return left;
    };
    return combine(combine, 0, count);
}

} // namespace detail

/// Minimum distance between the contour and the spectrum that is accepted.
inline double contour_tolerance(const OperatorMatrix& a) { return 1e-6 * (1.0 + a.norm()); }

/// P = (1/2 pi i) of the contour integral of (z - A)^{-1}, validated before return.
inline SpectralSplit riesz_projection(const OperatorMatrix& a, const Contour& contour,
                                      std::vector<Complex> eigs = {}) {
    if (eigs.empty()) eigs = eigenvalues(a);
    const double tol = contour_tolerance(a);
    std::vector<Complex> inside;
    for (Complex l : eigs) {
        if (contour.distance(l) <= tol) {
            std::ostringstream msg;
            msg << "contour " << contour.describe() << " passes within " << contour.distance(l)
                << " of the eigenvalue " << l.real() << (l.imag() < 0 ? "" : "+") << l.imag()
                << "i; the projection would be ill-conditioned";
            throw HypothesisError(msg.str());
        }
        if (contour.encloses(l)) inside.push_back(l);
    }

    const ShiftedSolver solver(a);
    const auto nodes = quadrature(contour);
    Matrix p;
    const bool conjugate_pairs = a.is_real() && contour.kind == Contour::Kind::Circle &&
                                 contour.center.imag() == 0.0 && contour.nodes % 2 == 0;
    if (conjugate_pairs) {
        // R(conj z) = conj R(z): node pairs k, N-1-k contribute 2 Re(w R(z)).
        const std::size_t half = nodes.size() / 2;
        const Eigen::MatrixXd re = detail::parallel_pairwise_sum<Eigen::MatrixXd>(half, [&](std::size_t k) {
            return Eigen::MatrixXd(2.0 * (nodes[k].w * solver.resolvent(nodes[k].z)).real());
        });
        p = re.cast<Complex>();
    } else {
        p = detail::parallel_pairwise_sum<Matrix>(nodes.size(), [&](std::size_t k) {
            return Matrix(nodes[k].w * solver.resolvent(nodes[k].z));
        });
    }
    if (!p.allFinite()) throw ConvergenceError("Riesz projection: non-finite quadrature sum");

    SpectralSplit out{OperatorMatrix(p, "riesz_projector"), 0.0, inside, contour, p.trace(), 0.0, 0.0};
    const double pn = out.projector.norm();
    out.idempotency_defect = two_norm(Matrix(p * p - p));
    out.commutation_defect = two_norm(Matrix(a.matrix() * p - p * a.matrix()));

    const double rounded = std::round(out.trace.real());
    auto fail = [&](const std::string& what) {
        std::ostringstream msg;
        msg << "Riesz projection on " << contour.describe() << ": " << what << "; increase the node count";
        throw ConvergenceError(msg.str());
    };
    if (std::abs(out.trace.real() - rounded) > 1e-6 || std::abs(out.trace.imag()) > 1e-6)
        fail("trace " + format_double(out.trace.real()) + " is not an integer");
    if (static_cast<std::size_t>(rounded) != inside.size())
        fail("trace " + format_double(rounded) + " differs from the " + std::to_string(inside.size()) +
             " enclosed eigenvalues");
    if (out.idempotency_defect > 1e-8 * (1.0 + pn * pn))
        fail("||P^2 - P|| = " + format_double(out.idempotency_defect));
    if (out.commutation_defect > 1e-8 * a.norm() * (1.0 + pn))
        fail("||AP - PA|| = " + format_double(out.commutation_defect));

    Matrix complement = -p;
    complement.diagonal().array() += 1.0;
    out.complement_norm = two_norm(complement);
    return out;
}

// ---------------------------------------------------------------------------
// Automatic contours around {Re lambda > omega_tilde}

namespace detail {

inline void check_line_gap(std::span<const Complex> eigs, double omega_tilde, double tol) {
    for (Complex l : eigs) {
        if (std::abs(l.real() - omega_tilde) < tol) {
            std::ostringstream msg;
            msg.precision(12);
            msg << "spectrum on the line: eigenvalue " << l.real() << (l.imag() < 0 ? "" : "+") << l.imag()
                << "i lies within " << tol << " of Re z = " << omega_tilde
                << " (the split needs no spectrum on that line)";
            throw HypothesisError(msg.str());
        }
    }
}

} // namespace detail

/// Circle around sigma_+ = {Re lambda > omega_tilde}: centroid, radius 1.25 x the
/// spread. When that circle would swallow excluded spectrum, the radius falls
/// back to the midpoint between the spread and the nearest excluded eigenvalue.
inline Contour auto_contour(std::span<const Complex> eigs, double omega_tilde, double tol, int nodes = 256) {
    detail::check_line_gap(eigs, omega_tilde, tol);
    std::vector<Complex> plus, minus;
    for (Complex l : eigs) (l.real() > omega_tilde ? plus : minus).push_back(l);
    if (plus.empty()) throw HypothesisError("no spectrum to the right of Re z = " + format_double(omega_tilde));
    Complex c{};
    for (Complex l : plus) c += l;
    c /= static_cast<double>(plus.size());
    // Conjugate-closed sets (real A) have a real centroid; drop eigensolver noise.
    if (std::abs(c.imag()) <= 1e-12 * (1.0 + std::abs(c))) c = c.real();
    double spread = 0.0;
    for (Complex l : plus) spread = std::max(spread, std::abs(l - c));
    double excluded = std::numeric_limits<double>::infinity();
    for (Complex l : minus) excluded = std::min(excluded, std::abs(l - c));

    double r = 1.25 * spread;
    if (r - spread <= 10.0 * tol) {
        // Singleton or numerically coincident cluster.
        r = std::isfinite(excluded) ? 0.5 * (spread + excluded) : spread + 1.0;
    } else if (r >= excluded - 10.0 * tol) {
        r = 0.5 * (spread + excluded);
    }
    if (!(r - spread > 10.0 * tol) || !(excluded - r > 10.0 * tol)) {
        std::ostringstream msg;
        msg << "no circle about the centroid separates the " << plus.size()
            << " eigenvalues right of Re z = " << omega_tilde << " (spread " << spread
            << ") from the rest (nearest at " << excluded << ")";
        throw HypothesisError(msg.str());
    }
    return Contour::circle(c, r, nodes);
}

inline Contour auto_contour(const OperatorMatrix& a, double omega_tilde, int nodes = 256) {
    const auto eigs = eigenvalues(a);
    return auto_contour(eigs, omega_tilde, contour_tolerance(a), nodes);
}

/// Rectangle with its left edge on Re z = omega_tilde, padded by the line gap g
/// on the other three sides. It encloses exactly {Re lambda > omega_tilde} for
/// any spectrum; panels have length about g.
inline Contour line_rectangle(std::span<const Complex> eigs, double omega_tilde, double tol) {
    detail::check_line_gap(eigs, omega_tilde, tol);
    double gap = std::numeric_limits<double>::infinity();
    double re_max = -std::numeric_limits<double>::infinity();
    double im_lo = std::numeric_limits<double>::infinity(), im_hi = -im_lo;
    for (Complex l : eigs) {
        gap = std::min(gap, std::abs(l.real() - omega_tilde));
        if (l.real() > omega_tilde) {
            re_max = std::max(re_max, l.real());
            im_lo = std::min(im_lo, l.imag());
            im_hi = std::max(im_hi, l.imag());
        }
    }
    if (!std::isfinite(re_max)) throw HypothesisError("no spectrum to the right of Re z = " + format_double(omega_tilde));
    const Complex ll(omega_tilde, im_lo - gap), ur(re_max + gap, im_hi + gap);
    const double perimeter = 2.0 * ((ur.real() - ll.real()) + (ur.imag() - ll.imag()));
    const int panels = std::max(4, static_cast<int>(std::ceil(perimeter / gap)));
    return Contour::rectangle(ll, ur, panels * detail::kPanelNodes);
}

/// Trapezoid nodes for a circle: the error decays like rho^N with rho the
/// worst ratio |lambda - c|/radius (inside) or radius/|lambda - c| (outside).
/// Power of two in [64, 1024] reaching rho^N <= 1e-16.
inline int recommended_nodes(const Contour& c, std::span<const Complex> eigs) {
    if (c.kind != Contour::Kind::Circle) return c.nodes;
    double rho = 0.0;
    for (Complex l : eigs) {
        const double d = std::abs(l - c.center);
        rho = std::max(rho, d < c.radius ? d / c.radius : c.radius / d);
    }
    int n = 64;
    while (n < 1024 && n * std::log(std::max(rho, 1e-300)) > std::log(1e-16)) n *= 2;
    return n;
}

/// Circle when one separates sigma_+, otherwise the line rectangle. nodes = 0
/// picks the circle's node count with recommended_nodes.
inline Contour split_contour(std::span<const Complex> eigs, double omega_tilde, double tol, int nodes = 0) {
    try {
        Contour c = auto_contour(eigs, omega_tilde, tol, nodes > 0 ? nodes : 256);
        if (nodes == 0) c.nodes = recommended_nodes(c, eigs);
        return c;
    } catch (const HypothesisError&) {
        detail::check_line_gap(eigs, omega_tilde, tol);
        return line_rectangle(eigs, omega_tilde, tol);
    }
}

// ---------------------------------------------------------------------------
// Remainder bound ||R(t)|| <= e^{w t} / (r ||1/m||_{[0,a]} ||1/m||_{[0,t-a]}) ||I - P||

inline double split_bound_value(double r_line, const WeightSpec& m, double omega_tilde, double t, double a,
                                double complement_norm) {
    return std::exp(log_gps_bound(r_line, m, omega_tilde, t, a) + std::log(complement_norm));
}

/// Certified majorant of ||e^{sA}(I - P)|| on [0, horizon]: exact samples on a
/// uniform grid, pushed forward by e^{mu h} (mu = numerical abscissa) so the
/// log-linear interpolant dominates between samples too.
inline Tabulated sampled_complement_majorant(const OperatorMatrix& a, const SpectralSplit& sp, double horizon,
                                             int steps, double mu) {
    if (!(horizon > 0.0) || steps < 1) throw DomainError("sampled majorant needs horizon > 0 and steps >= 1");
    const double h = horizon / steps;
    const Matrix step = semigroup(a, h);
    Matrix e = -sp.projector.matrix();
    e.diagonal().array() += 1.0;
    Tabulated m;
    m.horizon_T = horizon;
    m.grid.push_back(0.0);
    m.values.push_back(std::max(1.0, sp.complement_norm));
    const double grow = std::exp(mu * h);
    for (int i = 1; i <= steps; ++i) {
        e = step * e;
        const double sample = two_norm(e) * (1.0 + 1e-10);
        m.grid.push_back(i == steps ? horizon : i * h);
        m.values.push_back(std::max(sample, m.values.back() * grow));
    }
    validate(m);
    return m;
}

struct SplitRow {
    double t;
    double R_true;
    double R_bound;
    double leading_term_norm;
};

struct SplitReport {
    double omega_tilde = 0.0;
    double r_line = 0.0;
    double complement_norm = 0.0;
    std::string majorant;
    std::string contour;
    std::vector<SplitRow> rows;

    double max_ratio() const {
        double worst = 0.0;
        for (const auto& r : rows) worst = std::max(worst, r.R_true / r.R_bound);
        return worst;
    }

    BoundCurve bound_curve() const {
        BoundCurve c;
        c.method = "split";
        c.set("omega_tilde", omega_tilde);
        c.set("r_line", r_line);
        c.set("complement_norm", complement_norm);
        c.set("m", majorant);
        for (const auto& r : rows) {
            c.t.push_back(r.t);
            c.values.push_back(r.R_bound);
        }
        return c;
    }

    std::string to_csv() const {
        std::string out = "#omega_tilde=" + format_double(omega_tilde) + "\n#r_line=" + format_double(r_line) +
                          "\n#complement_norm=" + format_double(complement_norm) + "\n#m=" + majorant +
                          "\n#contour=" + contour + "\n";
        out += "t,R_true,R_bound,leading_term_norm\n";
        for (const auto& r : rows)
            out += format_double(r.t) + "," + format_double(r.R_true) + "," + format_double(r.R_bound) + "," +
                   format_double(r.leading_term_norm) + "\n";
        return out;
    }
};

/// Truth ||e^{tA}(I-P)||, ||e^{tA}P|| and the remainder bound on an ascending t grid.
inline SplitReport split_report(const OperatorMatrix& a, const SpectralSplit& sp, double omega_tilde, double r_line,
                                const WeightSpec& m, const std::vector<double>& ts,
                                SplitRule rule = SplitRule::Symmetric) {
    validate(m);
    SplitReport rep;
    rep.omega_tilde = omega_tilde;
    rep.r_line = r_line;
    rep.complement_norm = sp.complement_norm;
    rep.majorant = std::holds_alternative<Exponential>(m) ? "exponential" : "tabulated";
    rep.contour = sp.contour.describe();
    const Matrix& p = sp.projector.matrix();
    for_each_semigroup(a, ts, [&](double t, const Matrix& e) {
        check_t(t);
        const Matrix lead = e * p;
        SplitRow row{t, two_norm(Matrix(e - lead)), 0.0, two_norm(lead)};
        const double split = rule == SplitRule::Symmetric ? 0.5 * t : optimal_split(r_line, m, omega_tilde, t).x;
        row.R_bound = split_bound_value(r_line, m, omega_tilde, t, split, sp.complement_norm);
        rep.rows.push_back(row);
    });
    return rep;
}

/// One-shot form: contour, projection and r on the line are all computed here.
/// Returns (||e^{tA}(I - P)||, bound).
inline std::pair<double, double> split_bound(const OperatorMatrix& a, double omega_tilde, const WeightSpec& m,
                                             double t, double split_a) {
    check_t(t);
    if (!(split_a > 0.0 && split_a < t)) throw DomainError("split_bound: need 0 < a < t");
    const LineSweeper sweeper(a);
    const auto contour = split_contour(sweeper.spectrum(), omega_tilde, contour_tolerance(a));
    const auto sp = riesz_projection(a, contour, sweeper.spectrum());
    const double r = sweeper.sweep(omega_tilde, kDefaultRelWidth, SpectrumCheck::LineOnly).r_lo;
    const Matrix e = semigroup(a, t);
    Matrix complement = -sp.projector.matrix();
    complement.diagonal().array() += 1.0;
    return {two_norm(Matrix(e * complement)), split_bound_value(r, m, omega_tilde, t, split_a, sp.complement_norm)};
}

} // namespace semibound
