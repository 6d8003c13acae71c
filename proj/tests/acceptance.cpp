// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "oracles.hpp"
#include "semibound/appendix_recursion.hpp"
#include "semibound/bounds.hpp"
#include "semibound/gallery.hpp"
#include "semibound/resolvent_profile.hpp"
#include "semibound/spectral_split.hpp"
#include "semibound/validation.hpp"

using namespace semibound;

namespace {

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

int failures = 0;

void report(int n, const std::string& title, Verdict& v) {
    std::cout << "criterion " << n << ": " << (v.pass ? "PASS" : "FAIL") << "  " << title << " " << v.detail.str()
              << std::endl;
    if (!v.pass) ++failures;
}

template <class F>
void guarded(int n, const std::string& title, F&& body) {
    Verdict v;
    try {
        body(v);
    } catch (const std::exception& e) {
        v.require(false, std::string("exception: ") + e.what());
    }
    report(n, title, v);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct GalleryCase {
    OperatorMatrix a;
    std::unique_ptr<LineSweeper> sweeper;
    SuiteReport report;
};

std::vector<GalleryCase> build_cases() {
    std::vector<OperatorMatrix> ops{
        build_gallery("airy", {{"n", 400}}),
        build_gallery("davies", {{"n", 600}}),
        build_gallery("kfp", {{"nx", 40}, {"ny", 40}}),
        build_gallery("jordan", {{"n", 4}, {"lambda", -0.5}}),
        build_gallery("toeplitz", {{"n", 16}, {"first_col", {-2.0, 0.5}}, {"first_row", {-2.0, 1.0}}}),
    };
    for (std::uint64_t seed : {1, 2, 3}) ops.push_back(build_random_nonnormal(12, seed, 2.0));
    std::vector<GalleryCase> cases;
    for (auto& a : ops) cases.push_back({std::move(a), nullptr, {}});
    return cases;
}

double log_of(double x) { return std::log(x); }

} // namespace

int main() {
    const auto t_all = std::chrono::steady_clock::now();
    auto cases = build_cases();
    const std::vector<double> ts{0.25, 0.5, 1.0, 2.0, 4.0, 8.0};

    guarded(1, "domination suite over the gallery", [&](Verdict& v) {
        const auto t0 = std::chrono::steady_clock::now();
        int checked = 0, skipped = 0;
        for (auto& c : cases) {
            c.sweeper = std::make_unique<LineSweeper>(c.a);
            SuiteOptions opt;
            opt.ts = ts;
            c.report = domination_suite(*c.sweeper, opt, [](const std::string& line) { std::cerr << line << "\n"; });
            for (const auto& m : c.report.methods) {
                if (m.applicable) {
                    ++checked;
                    v.require(dominates(m.max_ratio), c.report.op + " " + m.label + " ratio " + format_double(m.max_ratio));
                } else {
                    ++skipped;
                }
            }
            for (const auto& e : c.report.errors) v.require(false, c.report.op + " " + e);
        }
        const double secs = seconds_since(t0);
        v.detail << "(" << checked << " bound curves dominate, " << skipped << " not applicable, " << std::fixed
                 << std::setprecision(1) << secs << " s)";
        v.require(secs < 600.0, "runtime above 10 minutes");
    });

    guarded(2, "scalar and closed-form oracles", [&](Verdict& v) {
        const OperatorMatrix scalar(Matrix::Constant(1, 1, Complex(-1.0, 0.0)));
        for (double w : {-0.5, 0.0, 1.0, 3.0}) {
            const auto r = r_of_omega(scalar, w);
            v.require(std::abs(r.r_lo / (w + 1.0) - 1.0) <= 1e-4 && std::abs(r.r_hi / (w + 1.0) - 1.0) <= 1e-4,
                      "r(omega) = omega + 1 at omega = " + format_double(w));
        }
        const double r0 = r_of_omega(scalar, 0.0).r_lo;
        const double g = gps_bound(r0, Exponential{1.0, -1.0}, 0.0, 2.0, 1.0);
        v.require(std::abs(g - 0.31304) <= 1e-4, "gps_bound(t=2) = " + format_double(g));
        v.require(g >= std::exp(-2.0), "gps_bound below e^-2");
        v.require(propa_constant(1.0, 0.0, -0.5, 0.5) == 3.0, "propa constant");
        for (auto [M, w, r] : {std::tuple{1.0, -0.5, 0.5}, std::tuple{2.0, -0.3, 0.4}}) {
            const double c = 2.0 * M * std::abs(w) / r;
            const double grid = oracle::grid_sup_open([&](double u) { return std::min(1.0 / u, c / (1.0 - u)); }, 0.0, 1.0,
                                                      1000000);
            v.require(std::abs(grid - (1.0 + c)) <= 1e-5, "sup-over-u identity");
        }
        v.detail << "(gps " << format_double(g) << ")";
    });

    guarded(3, "Lipschitz lower bound and profile slopes", [&](Verdict& v) {
        int pairs_total = 0;
        double worst_lip = -INFINITY, worst_slope = 0.0;
        for (auto& c : cases) {
            if (!c.sweeper) throw Error("criterion 1 did not build the sweepers");
            // Distinct omegas swept by the suite, topped up to five points (ten pairs).
            std::vector<RInterval> pts;
            auto add = [&](const RInterval& p) {
                for (const auto& q : pts)
                    if (q.omega == p.omega) return;
                pts.push_back(p);
            };
            for (const auto& p : c.report.sweeps) add(p);
            const double spread = std::max(c.report.mu - c.report.alpha, 0.05 * (1.0 + std::abs(c.report.alpha)));
            for (double f = 2.0; pts.size() < 5; f += 1.0) add(c.sweeper->sweep(c.report.alpha + f * spread));
            std::sort(pts.begin(), pts.end(), [](const RInterval& x, const RInterval& y) { return x.omega < y.omega; });
            int pairs = 0;
            for (std::size_t i = 0; i < pts.size() && pairs < 10; ++i)
                for (std::size_t j = i + 1; j < pts.size() && pairs < 10; ++j, ++pairs) {
                    // omega' = pts[i] < omega = pts[j]
                    const double slack = pts[i].r_hi - (pts[j].r_lo - (pts[j].omega - pts[i].omega));
                    worst_lip = std::max(worst_lip, -slack);
                    v.require(slack >= -1e-6, c.report.op + " Lipschitz pair at omega " + format_double(pts[j].omega));
                }
            pairs_total += pairs;
            v.require(pairs == 10, c.report.op + " has fewer than 10 pairs");
            for (std::size_t i = 1; i < pts.size(); ++i) {
                const double dw = pts[i].omega - pts[i - 1].omega;
                const double s_hi = (pts[i].r_hi - pts[i - 1].r_lo) / dw;
                const double s_lo = (pts[i].r_lo - pts[i - 1].r_hi) / dw;
                worst_slope = std::max({worst_slope, -s_hi, s_lo - 1.0});
                v.require(s_hi >= -1e-3 && s_lo <= 1.0 + 1e-3, c.report.op + " slope near omega " + format_double(pts[i].omega));
            }
        }
        v.detail << "(" << pairs_total << " pairs, worst Lipschitz excess " << format_double(worst_lip)
                 << ", worst slope excess " << format_double(worst_slope) << ")";
    });

    guarded(4, "spectral fidelity of Airy and Davies", [&](Verdict& v) {
        auto by_modulus = [](std::vector<Complex> e) {
            std::sort(e.begin(), e.end(), [](Complex x, Complex y) { return std::abs(x) < std::abs(y); });
            return e;
        };
        const auto airy = by_modulus(cases[0].report.spectrum);
        const double l1 = -oracle::airy_zero(-2.3);
        const double mod_err = std::abs(std::abs(airy[0]) - l1) / l1;
        const double arg_err = std::abs(std::arg(-airy[0]) - kPi / 3.0) * 180.0 / kPi;
        v.require(mod_err <= 0.01, "Airy |lambda_1|");
        v.require(arg_err <= 1.0, "Airy arg lambda_1");
        const auto davies = by_modulus(cases[1].report.spectrum);
        double worst = 0.0;
        for (int j = 0; j < 3; ++j) {
            const Complex want = -(2.0 * j + 1.0) * std::polar(1.0, kPi / 4.0);
            worst = std::max(worst, std::abs(davies[static_cast<std::size_t>(j)] - want) / std::abs(want));
        }
        v.require(worst <= 0.01, "Davies eigenvalues");
        v.detail << "(Airy |lambda| err " << format_double(mod_err) << ", arg err " << format_double(arg_err)
                 << " deg; Davies worst rel err " << format_double(worst) << ")";
    });

    guarded(5, "Riesz split and remainder bound", [&](Verdict& v) {
        int splits = 0;
        for (auto& c : cases) {
            const double line = default_split_line(c.report.spectrum, contour_tolerance(c.a));
            if (std::isnan(line)) continue; // single real-part cluster (Jordan block)
            if (!c.report.split) {
                v.require(false, c.report.op + " split not computed");
                continue;
            }
            ++splits;
            const auto& d = *c.report.split;
            const double pn = d.projector_norm;
            v.require(d.trace_error <= 1e-6, c.report.op + " trace");
            v.require(d.idempotency <= 1e-8 * (1.0 + pn * pn), c.report.op + " idempotency");
            v.require(d.commutation <= 1e-8 * c.a.norm() * (1.0 + pn), c.report.op + " commutation");
            for (const auto& m : c.report.methods)
                if (m.label.rfind("split", 0) == 0)
                    v.require(m.applicable && dominates(m.max_ratio), c.report.op + " remainder bound");
        }
        // Davies remainder decays like e^{-3 cos(pi/4) t}.
        const auto& dv = cases[1];
        const double w = -2.0;
        const auto sp = riesz_projection(dv.a, split_contour(dv.report.spectrum, w, contour_tolerance(dv.a)), dv.report.spectrum);
        const double r = dv.sweeper->sweep(w, kDefaultRelWidth, SpectrumCheck::LineOnly).r_lo;
        const std::vector<double> tw{2.0, 3.0, 4.0, 5.0, 6.0};
        const auto rep = split_report(dv.a, sp, w, r, Exponential{1.0, dv.report.mu}, tw);
        v.require(rep.max_ratio() <= 1.0, "Davies remainder bound at omega_tilde = -2");
        std::vector<double> lr;
        for (const auto& row : rep.rows) lr.push_back(std::log(row.R_true));
        const double slope = oracle::fit_slope(tw, lr);
        v.require(std::abs(slope + 3.0 * std::cos(kPi / 4.0)) <= 0.05, "Davies slope " + format_double(slope));
        v.detail << "(" << splits << " splits; Davies log-slope " << format_double(slope) << " vs "
                 << format_double(-3.0 * std::cos(kPi / 4.0)) << ")";
    });

    guarded(6, "appendix recursion", [&](Verdict& v) {
        const Tabulated one{{0.0, 1.0}, {1.0, 1.0}, 1.0};
        const auto s = extend_majorant(one, 0.0, 1.0, 4096.0, 1.0 / 1024);
        const auto F = dyadic_floors(s, 1);
        v.require(F.at(0) == 1.0, "F(0) = " + format_double(F.at(0)));
        v.require(std::abs(F.at(1) - 0.5) <= 1e-14, "F(1) = " + format_double(F.at(1)));
        v.require(s.k0 == 6, "k0 = " + std::to_string(s.k0));
        const auto checks = check_recursion(s);
        for (const auto& f : checks.failures) v.require(false, f);
        v.require(checks.all(), "recursion inequalities");
        auto at = [&](int n) { return std::exp(extend_majorant(one, 0.0, 1.0, 8.0, 1.0 / n).log_f(static_cast<std::size_t>(8 * n))); };
        const double f1 = at(512), f2 = at(1024), f3 = at(2048);
        const double factor = std::abs(f2 - f1) / std::abs(f3 - f2);
        v.require(factor >= 3.0, "refinement factor " + format_double(factor));
        v.detail << "(F(1) " << format_double(F.at(1)) << ", k0 " << s.k0 << ", K " << checks.K << ", refinement factor "
                 << format_double(factor) << ")";
    });

    guarded(7, "cross identities", [&](Verdict& v) {
        auto diag = [](std::vector<double> d) {
            Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
            for (std::size_t i = 0; i < d.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = d[i];
            return OperatorMatrix(m);
        };
        const double l1 = laplace_identity_residual(diag({-1.0}), 1.0, 40.0, 4096);
        const double l2 = laplace_identity_residual(diag({-1.0, -2.0}), Complex(0.5, 1.0), 40.0, 4096);
        v.require(l1 < 1e-6 && l2 < 1e-6, "Laplace identity");
        double cs = 0.0;
        const Tabulated wavy{{0.0, 0.5, 1.0, 1.5, 2.0}, {1.0, 1.8, 1.2, 2.5, 2.0}, 2.0};
        for (const auto& [m, omega] : {std::pair{WeightSpec{Exponential{1.0, -1.0}}, 0.0},
                                       std::pair{WeightSpec{Exponential{2.0, 0.4}}, -0.3}, std::pair{WeightSpec{wavy}, -0.3}}) {
            const auto c = optimal_cutoff(m, omega, 1.5, 4096);
            cs = std::max(cs, std::abs(c.derivative_norm / c.reciprocal_weight - 1.0));
        }
        v.require(cs <= 1e-6, "Cauchy-Schwarz equality");
        const double M = 1.7, wh = 0.2, w = -0.4, r = 0.35, t = 2.5;
        const double closed = std::exp(w * t) * 2 * M * M * (wh - w) / (r * (1 - std::exp((w - wh) * t)));
        const double gps = gps_bound(r, Exponential{M, wh}, w, t, t / 2);
        v.require(std::abs(gps / closed - 1.0) <= 1e-10, "gps symmetric split closed form");
        v.detail << "(Laplace residuals " << format_double(l1) << ", " << format_double(l2) << "; CS defect "
                 << format_double(cs) << ")";
    });

    guarded(8, "behavior as omega approaches omega_0", [&](Verdict& v) {
        std::vector<double> grid;
        for (int i = 0; i <= 4000; ++i) grid.push_back(std::pow(10.0, -6.0 + 6.0 * i / 4000));
        const std::vector<double> tt{10.0, 100.0, 1000.0};
        std::vector<double> lt;
        for (double t : tt) lt.push_back(std::log(t));
        const auto lin = phi_limit_curve(ResolventProfile::from_function([](double x) { return x; }, grid), 0.0,
                                         Exponential{1.0, 0.0}, tt, 1.0);
        std::vector<double> lb;
        std::transform(lin.values.begin(), lin.values.end(), std::back_inserter(lb), log_of);
        const double p = oracle::fit_slope(lt, lb);
        v.require(p <= 1.05, "polynomial exponent " + format_double(p));
        const auto st = phi_limit_curve(
            ResolventProfile::from_function([](double x) { return std::exp(-1.0 / (2.0 * x)); }, grid), 0.0,
            Exponential{1.0, 0.0}, tt, 1.0);
        std::vector<double> llb;
        for (double b : st.values) llb.push_back(std::log(std::log(b)));
        const double q = oracle::fit_slope(lt, llb);
        v.require(std::abs(q - 0.5) <= 0.05, "stretched exponent " + format_double(q));
        v.detail << "(growth exponent " << format_double(p) << ", stretched exponent " << format_double(q) << ")";
    });

    std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << " ("
              << std::fixed << std::setprecision(1) << seconds_since(t_all) << " s)" << std::endl;
    return failures == 0 ? 0 : 1;
}
