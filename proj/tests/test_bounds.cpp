#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "semibound/bounds.hpp"

using namespace semibound;
using Catch::Approx;

namespace {

Tabulated tabulate(const std::function<double(double)>& m, double T, int n) {
    Tabulated tab;
    tab.horizon_T = T;
    for (int i = 0; i <= n; ++i) {
        tab.grid.push_back(T * i / n);
        tab.values.push_back(m(T * i / n));
    }
    return tab;
}

} // namespace

TEST_CASE("weight_norm closed forms", "[bounds]") {
    CHECK(weight_norm(Exponential{1.0, 0.0}, 0.0, 1.0) == Approx(1.0).epsilon(1e-15));
    CHECK(weight_norm(Exponential{1.0, -1.0}, 0.0, 1.0) ==
          Approx(std::sqrt((std::exp(2.0) - 1.0) / 2.0)).epsilon(1e-14));
    CHECK(weight_norm(Exponential{1.0, -1.0}, 0.0, 1.0) == Approx(1.78734).epsilon(1e-5));

    // Symmetric split of an exponential majorant, omega < omega_hat.
    for (double M : {1.0, 2.5}) {
        const double wh = 0.3, w = -0.7, t = 3.0;
        const double half = weight_norm(Exponential{M, wh}, w, t / 2);
        const double closed = (1.0 / (2 * M * M * (wh - w))) * (1.0 - std::exp((w - wh) * t));
        CHECK(half * half == Approx(closed).epsilon(1e-12));
        // omega = omega_hat branch: t/(2 M^2)
        const double eq = weight_norm(Exponential{M, wh}, wh, t / 2);
        CHECK(eq * eq == Approx(t / (2 * M * M)).epsilon(1e-14));
        const double near = weight_norm(Exponential{M, wh}, wh + 1e-10, t / 2);
        CHECK(near * near == Approx(t / (2 * M * M)).epsilon(1e-8));
    }
    CHECK_THROWS_AS(weight_norm(Exponential{1.0, 0.0}, 0.0, 0.0), DomainError);
    CHECK_THROWS_AS(weight_norm(Exponential{0.5, 0.0}, 0.0, 1.0), DomainError);
}

TEST_CASE("weight_norm for tabulated weights", "[bounds]") {
    // m(s) = e^{-s} is exactly log-linear, so the tabulated norm is exact.
    const auto tab = tabulate([](double s) { return std::exp(-s); }, 2.0, 7);
    CHECK(weight_norm(tab, 0.0, 1.0) == Approx(weight_norm(Exponential{1.0, -1.0}, 0.0, 1.0)).epsilon(1e-13));
    // A curved weight converges to the Simpson reference as the table is refined.
    auto m = [](double s) { return 1.0 + s * s; };
    auto integrand = [&](double s) { return 1.0 / (m(s) * m(s)) * std::exp(2 * 0.3 * s); };
    double ref = 0.0;
    const int n = 20000;
    for (int i = 0; i <= n; ++i) ref += (i == 0 || i == n ? 1 : (i % 2 ? 4 : 2)) * integrand(1.5 * i / n);
    ref *= 1.5 / n / 3.0;
    CHECK(std::pow(weight_norm(tabulate(m, 2.0, 2048), 0.3, 1.5), 2) == Approx(ref).epsilon(1e-6));
    CHECK_THROWS_AS(weight_norm(tab, 0.0, 2.5), DomainError);
    Tabulated bad = tab;
    bad.values[3] = 0.0;
    CHECK_THROWS_AS(weight_norm(bad, 0.0, 1.0), DomainError);
    CHECK(std::isinf(weight_value(tab, 2.0)));
}

TEST_CASE("gps_bound examples", "[bounds]") {
    const double b = gps_bound(1.0, Exponential{1.0, -1.0}, 0.0, 2.0, 1.0);
    CHECK(b == Approx(2.0 / (std::exp(2.0) - 1.0)).epsilon(1e-13));
    CHECK(b == Approx(0.31304).margin(1e-4));
    CHECK(b >= std::exp(-2.0));

    for (double t : {0.5, 3.0, 10.0}) CHECK(gps_bound(0.7, Exponential{1.0, 0.0}, 0.0, t, t / 2) == Approx(2 / (0.7 * t)).epsilon(1e-14));

    // Symmetric split against the closed-form denominator.
    const double M = 1.7, wh = 0.2, w = -0.4, r = 0.35, t = 2.5;
    const double closed = std::exp(w * t) * 2 * M * M * (wh - w) / (r * (1 - std::exp((w - wh) * t)));
    CHECK(gps_bound(r, Exponential{M, wh}, w, t, t / 2) == Approx(closed).epsilon(1e-10));
    CHECK(gps_bound(r, Exponential{M, wh}, w, t, t / 2) == Approx(m_new(M, wh, w, r, t)).epsilon(1e-10));

    CHECK_THROWS_AS(gps_bound(1.0, Exponential{}, 0.0, 2.0, 0.0), DomainError);
    CHECK_THROWS_AS(gps_bound(1.0, Exponential{}, 0.0, 2.0, 2.0), DomainError);
    // Large t stays finite through the log domain.
    CHECK(std::isfinite(gps_bound(1.0, Exponential{1.0, 5.0}, -1.0, 800.0, 400.0)));
}

TEST_CASE("optimal_split", "[bounds]") {
    for (double t : {0.3, 2.0, 7.0}) {
        const auto e = optimal_split(0.5, Exponential{2.0, 0.3}, -0.2, t);
        CHECK(std::abs(e.x - t / 2) <= 1e-6 * t);
        const auto one = optimal_split(1.0, tabulate([](double) { return 1.0; }, 10.0, 16), 0.0, t);
        CHECK(std::abs(one.x - t / 2) <= 1e-6 * t);
    }
    // Large early, small late: a grid-search oracle never beats the optimizer.
    const auto tab = tabulate([](double s) { return s < 1.0 ? 6.0 - 4.0 * s : 2.0 * std::exp(-(s - 1.0)); }, 2.0, 400);
    for (double t : {1.0, 2.0, 3.0}) {
        const auto best = optimal_split(0.8, tab, 0.1, t);
        const double lo = std::max(0.0, t - 2.0), hi = std::min(t, 2.0);
        const auto [ax, grid] = oracle::grid_min([&](double a) { return gps_bound(0.8, tab, 0.1, t, a); },
                                                 lo + 1e-9 * t, hi - 1e-9 * t, 1000);
        (void)ax;
        CHECK(best.value <= grid * (1 + 1e-9));
        CHECK(best.value <= gps_bound(0.8, tab, 0.1, t, t / 2) * (1 + 1e-12));
    }
    CHECK_THROWS_AS(optimal_split(1.0, tab, 0.0, 4.0), DomainError);
}

TEST_CASE("m_new, combined M and the propa constant", "[bounds]") {
    CHECK(m_new(1.0, 0.0, -0.5, 0.5, 60.0) * std::exp(0.5 * 60.0) == Approx(2.0).epsilon(1e-12));
    const double small = m_new(1.0, 0.0, -0.5, 0.5, 1e-6);
    CHECK(small * 1e-6 == Approx(2.0 / 0.5).epsilon(1e-5));
    CHECK(combined_M(1.0, 0.0, -0.5, 0.5) == Approx(3.0).epsilon(1e-9));
    CHECK(combined_M(2.0, 1.3, -0.5, 0.25) == Approx(propa_constant(2.0, 1.3, -0.5, 0.25)).epsilon(1e-9));

    CHECK(propa_constant(1.0, 0.0, -0.5, 0.5) == 3.0);
    CHECK(propa_constant(1.5, 0.0, -0.5, 1e300) == Approx(1.5));
    const double grid = oracle::grid_sup_open(
        [](double u) { return std::min(1.0 / u, 2.0 * 1.0 * 0.5 / (0.5 * (1.0 - u))); }, 0.0, 1.0, 1000000);
    CHECK(grid == Approx(1.0 + 2.0 * 1.0 * 0.5 / 0.5).margin(1e-5));
    CHECK_THROWS_AS(propa_constant(1.0, 0.0, 0.0, 0.5), DomainError);
    CHECK_THROWS_AS(m_new(1.0, 0.0, 0.5, 0.5, 1.0), DomainError);
}

TEST_CASE("contrb family", "[bounds]") {
    for (double t : {0.5, 1.0, 4.0})
        CHECK(contrb_bound(1.3, 0.2, -0.5, 0.4, 0.0, t) ==
              Approx(propa_constant(1.3, 0.2, -0.5, 0.4) * std::exp(-0.5 * t)).epsilon(1e-14));

    // s = t/(1+t): decay at rate omega - r up to a linear factor.
    const double w = -0.5, r = 0.4;
    std::vector<double> ratio;
    for (double t : {10.0, 100.0, 1000.0}) ratio.push_back(std::exp(log_contrb_bound(1.0, 0.0, w, r, t / (1 + t), t) - (w - r) * t) / t);
    CHECK(ratio[2] <= ratio[1] * 1.05);
    CHECK(ratio[1] <= ratio[0] * 1.5);

    const auto best = optimal_contrb(1.0, 0.0, w, r, 5.0);
    for (double s : {0.0, 0.2, 0.5, 0.9}) CHECK(best.value <= contrb_bound(1.0, 0.0, w, r, s, 5.0) * (1 + 1e-12));
    CHECK_THROWS_AS(contrb_bound(1.0, 0.0, w, r, 1.0, 1.0), DomainError);

    // omega = omega_hat limit coincides with the primed form.
    CHECK(contrb_bound(1.4, 0.0, 0.0, 0.6, 0.3, 2.0) == Approx(contrbprime_bound(1.4, 0.0, 0.6, 0.3, 2.0)).epsilon(1e-13));
}

TEST_CASE("power trick", "[bounds]") {
    CHECK(power_bound(1.0, 1.0, 4.0, 1) == Approx(0.5).epsilon(1e-15));
    CHECK(power_bound(1.0, 1.0, 4.0, 2) == Approx(1.0).epsilon(1e-15));
    const auto p = optimal_power(1.0, 1.0, 4.0, 0.25);
    CHECK(p.N == 1);
    CHECK(p.value == Approx(0.5));
    CHECK(scheduled_power(1.0, 1.0, 40.0, 0.25) == Approx(std::pow(0.5, 10)).epsilon(1e-13));
    CHECK(scheduled_power(1.0, 1.0, 40.0, 0.25) == Approx(9.77e-4).epsilon(1e-3));

    for (double t : {3.0, 17.0, 60.0}) {
        const auto best = optimal_power(1.3, 0.8, t, 0.8 / (4 * 1.3));
        for (int N = 1; N <= static_cast<int>(std::ceil(0.8 / (4 * 1.3) * t)) + 2; ++N)
            CHECK(best.value <= power_bound(1.3, 0.8, t, N) * (1 + 1e-14));
    }

    // Log-linear decay of the schedule for alpha = r0/(4 M).
    const double M = 1.0, r0 = 1.0, alpha = r0 / (4 * M);
    std::vector<double> ts, ls;
    for (double t = 200; t <= 2000; t += 100) {
        ts.push_back(t);
        ls.push_back(std::log(scheduled_power(M, r0, t, alpha)));
    }
    const double slope = oracle::fit_slope(ts, ls);
    CHECK(slope < 0.0);
    CHECK(slope <= -alpha * std::log(r0 / (2 * M * alpha)) * (1 - 1e-2));
    CHECK_THROWS_AS(power_curve(1.0, 0.0, 1.0, {1.0}, 0.5), DomainError);
}

TEST_CASE("phi_limit on model profiles", "[bounds]") {
    std::vector<double> grid;
    for (int i = 0; i <= 4000; ++i) grid.push_back(std::pow(10.0, -6.0 + 6.0 * i / 4000));
    const auto lin = ResolventProfile::from_function([](double x) { return x; }, grid);
    for (double t : {10.0, 100.0, 1000.0}) {
        double w = 0.0;
        CHECK(phi_limit(lin, 0.0, t, 1.0, &w) == Approx(1.0 + std::log(t)).epsilon(1e-5));
        CHECK(w == Approx(1.0 / t).epsilon(5e-3));
        CHECK(phi_limit(lin, 0.0, t, 1.0) <= t * 1.0 - std::log(1.0));
    }
    const auto stretched = ResolventProfile::from_function([](double x) { return std::exp(-1.0 / (2.0 * x)); }, grid);
    for (double t : {10.0, 100.0, 1000.0}) {
        CHECK(phi_limit(stretched, 0.0, t, 1.0) == Approx(2.0 * std::sqrt(t / 2.0)).epsilon(1e-4));
        CHECK(phi_limit(stretched, 0.0, t, 1.0) / t < 2.0 / std::sqrt(t));
    }
    const auto curve = phi_limit_curve(lin, 0.0, Exponential{1.0, 0.0}, {10.0, 100.0, 1000.0}, 1.0);
    CHECK(curve.values[0] == Approx(2.0 * std::exp(1.0) * 10.0).epsilon(1e-5));
    CHECK_THROWS_AS(phi_limit(lin, 5.0, 10.0, 1.0), DomainError);
    CHECK_THROWS_AS(phi_limit(lin, 0.0, 0.5, 1.0), DomainError);
}

TEST_CASE("optimal cutoff", "[bounds]") {
    const auto unit = optimal_cutoff(Exponential{1.0, 0.0}, 0.0, 1.0, 4096);
    for (std::size_t i = 0; i < unit.s.size(); i += 97) CHECK(unit.chi[i] == Approx(1.0 - unit.s[i]).margin(1e-13));
    CHECK(unit.derivative_norm == Approx(1.0).epsilon(1e-10));
    CHECK(unit.reciprocal_weight == Approx(1.0).epsilon(1e-14));

    const auto ex = optimal_cutoff(Exponential{1.0, -1.0}, 0.0, 1.0, 4096);
    const double e2 = std::exp(2.0);
    for (std::size_t i = 0; i < ex.s.size(); i += 101)
        CHECK(ex.chi[i] == Approx((e2 - std::exp(2 * ex.s[i])) / (e2 - 1)).margin(1e-13));
    CHECK(ex.derivative_norm == Approx(ex.reciprocal_weight).epsilon(1e-6));

    const auto tab = tabulate([](double s) { return 1.0 + 0.5 * std::sin(3 * s) + s; }, 3.0, 1000);
    for (const auto& m : {WeightSpec{Exponential{2.0, 0.4}}, WeightSpec{tab}}) {
        const auto c = optimal_cutoff(m, -0.3, 2.0, 4096);
        CHECK(c.chi.front() == 1.0);
        CHECK(c.chi.back() == 0.0);
        for (std::size_t i = 1; i < c.chi.size(); ++i) CHECK(c.chi[i] <= c.chi[i - 1]);
        CHECK(c.total_variation == Approx(1.0).epsilon(1e-6));
        CHECK(c.derivative_norm == Approx(c.reciprocal_weight).epsilon(1e-6));
    }
    CHECK_THROWS_AS(optimal_cutoff(tab, 0.0, 3.0), DomainError);
}

TEST_CASE("bound curve csv", "[bounds]") {
    const auto c = gps_curve(1.0, Exponential{1.0, -1.0}, 0.0, {1.0, 2.0});
    const auto csv = c.to_csv();
    CHECK(csv.find("#omega=0\n") != std::string::npos);
    CHECK(csv.find("t,bound,method\n") != std::string::npos);
    CHECK(csv.find("\n2,") != std::string::npos);
}
