#include <catch_amalgamated.hpp>

#include "semibound/gallery.hpp"
#include "semibound/plot.hpp"
#include "semibound/validation.hpp"

using namespace semibound;

namespace {

BoundCurve curve(std::vector<double> t, std::vector<double> v, const std::string& method) {
    BoundCurve c;
    c.t = std::move(t);
    c.values = std::move(v);
    c.method = method;
    return c;
}

std::size_t count(const std::string& s, const std::string& needle) {
    std::size_t n = 0;
    for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
    return n;
}

} // namespace

TEST_CASE("plot: one truth and one bound", "[plot]") {
    const auto truth = curve({1, 2, 4}, {1.0, 0.5, 0.1}, "truth");
    const auto b = curve({1, 2, 4}, {2.0, 1.0, 0.5}, "gps");
    const auto svg = plot_data({b}, truth, "jordan & co");
    CHECK(count(svg, "<polyline") == 2);
    CHECK(svg.find(">gps</text>") != std::string::npos);
    CHECK(svg.find(">truth</text>") != std::string::npos);
    CHECK(svg.find("jordan &amp; co") != std::string::npos);
    CHECK(svg.find("version=\"1.1\"") != std::string::npos);
    CHECK(svg == plot_data({b}, truth, "jordan & co"));
}

TEST_CASE("plot: resampling and errors", "[plot]") {
    const auto truth = curve({1, 2, 3}, {1.0, 1.0, 1.0}, "truth");
    const auto b = curve({1, 3}, {1.0, 100.0}, "propa");
    // Midpoint in log space: sqrt(1 * 100) = 10.
    CHECK(detail::log_resample(b, 2.0) == Catch::Approx(std::log(10.0)));
    CHECK(std::isnan(detail::log_resample(b, 4.0)));
    CHECK_THROWS_AS(plot_data({}, truth), DomainError);
    auto labelled = b;
    labelled.set("label", "propa(omega=-0.25)");
    CHECK(curve_label(labelled) == "propa(omega=-0.25)");
    CHECK(plot_data({labelled}, truth).find("propa(omega=-0.25)") != std::string::npos);
}

TEST_CASE("split line sits between the first two real-part clusters", "[suite]") {
    const std::vector<Complex> e{Complex(-1.0, 2.0), Complex(-1.0, -2.0), -3.0, -5.0};
    CHECK(default_split_line(e, 1e-6) == -2.0);
    CHECK(std::isnan(default_split_line(std::vector<Complex>{-1.0, Complex(-1.0, 1.0)}, 1e-6)));
}

TEST_CASE("domination suite on small operators", "[suite]") {
    const std::vector<OperatorMatrix> ops{
        build_gallery("jordan", {{"n", 2}, {"lambda", -1.0}}),
        build_gallery("toeplitz", {{"n", 16}, {"first_col", {-2.0, 0.5}}, {"first_row", {-2.0, 1.0}}}),
        build_random_nonnormal(8, 7, 2.0)};
    for (const auto& a : ops) {
        SuiteOptions opt;
        opt.sampled_split = true;
        const auto rep = domination_suite(a, opt);
        INFO(rep.op);
        for (const auto& e : rep.errors) INFO(e);
        for (const auto& m : rep.methods) {
            INFO(m.label << " " << m.note << " " << m.max_ratio);
            CHECK((!m.applicable || dominates(m.max_ratio)));
        }
        CHECK(rep.pass());
        CHECK(rep.methods.size() == 10);
        CHECK(rep.to_csv().rfind("operator,method,t,truth,bound,ratio\n", 0) == 0);
    }
}

TEST_CASE("split is not applicable to a single Jordan block", "[suite]") {
    const auto rep = domination_suite(build_jordan(3, -1.0));
    bool saw = false;
    for (const auto& m : rep.methods)
        if (m.label.rfind("split", 0) == 0) {
            saw = true;
            CHECK(!m.applicable);
        }
    CHECK(saw);
    CHECK(rep.errors.empty());
}
