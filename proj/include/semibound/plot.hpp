#pragma once

// Static semilog SVG line chart of a truth curve against bound curves.
// Output depends only on the inputs (fixed number formatting, no timestamps).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>
#include <vector>

#include "semibound/bounds.hpp"
#include "semibound/errors.hpp"

namespace semibound {

namespace detail {

inline std::string fixed(double x, int digits = 2) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, digits);
    return std::string(buf, res.ptr);
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

/// ln of the curve at t by linear interpolation of ln(value); NaN outside its range.
inline double log_resample(const BoundCurve& c, double t) {
    if (c.t.empty() || t < c.t.front() || t > c.t.back()) return NAN;
    const auto it = std::lower_bound(c.t.begin(), c.t.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - c.t.begin());
    if (c.t[i] == t) return c.values[i] > 0.0 ? std::log(c.values[i]) : NAN;
    const double u = (t - c.t[i - 1]) / (c.t[i] - c.t[i - 1]);
    if (!(c.values[i] > 0.0) || !(c.values[i - 1] > 0.0)) return NAN;
    return (1.0 - u) * std::log(c.values[i - 1]) + u * std::log(c.values[i]);
}

} // namespace detail

/// Legend label: the curve's "label" parameter when set, else its method tag.
inline std::string curve_label(const BoundCurve& c) {
    const std::string l = c.param("label");
    return l.empty() ? c.method : l;
}

/// Truth and bounds on the truth grid (bounds resampled log-linearly), log10 y axis.
inline std::string plot_data(const std::vector<BoundCurve>& curves, const BoundCurve& truth,
                             const std::string& title = "") {
    if (curves.empty()) throw DomainError("plot_data: no bound curves to plot");
    if (truth.t.empty()) throw DomainError("plot_data: empty truth curve");
    constexpr double W = 800, H = 500, left = 80, right = 200, top = 40, bottom = 60;
    const double pw = W - left - right, ph = H - top - bottom;

    std::vector<std::vector<double>> logs; // log10 per series, NaN = gap
    auto series = [&](const BoundCurve& c) {
        std::vector<double> v;
        for (double t : truth.t) v.push_back(detail::log_resample(c, t) / std::log(10.0));
        return v;
    };
    logs.push_back(series(truth));
    for (const auto& c : curves) logs.push_back(series(c));

    double lo = INFINITY, hi = -INFINITY;
    for (const auto& s : logs)
        for (double v : s)
            if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
    if (!std::isfinite(lo)) throw DomainError("plot_data: no positive values to plot");
    lo = std::floor(lo);
    hi = std::max(std::ceil(hi), lo + 1.0);
    const double t0 = truth.t.front(), t1 = std::max(truth.t.back(), t0 + 1e-12);
    auto X = [&](double t) { return left + pw * (t - t0) / (t1 - t0); };
    auto Y = [&](double l) { return top + ph * (hi - l) / (hi - lo); };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"};
    std::string s;
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"800\" height=\"500\" viewBox=\"0 0 800 500\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";
    if (!title.empty())
        s += "<text x=\"" + detail::fixed(left) + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" +
             detail::xml_escape(title) + "</text>\n";
    s += "<rect x=\"" + detail::fixed(left) + "\" y=\"" + detail::fixed(top) + "\" width=\"" + detail::fixed(pw) +
         "\" height=\"" + detail::fixed(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
    const int decades = static_cast<int>(hi - lo);
    const int step = std::max(1, decades / 10);
    for (int d = static_cast<int>(lo); d <= static_cast<int>(hi); d += step) {
        const std::string y = detail::fixed(Y(d));
        s += "<line x1=\"" + detail::fixed(left) + "\" y1=\"" + y + "\" x2=\"" + detail::fixed(left + pw) + "\" y2=\"" + y +
             "\" stroke=\"#dddddd\"/>\n";
        s += "<text x=\"" + detail::fixed(left - 6) + "\" y=\"" + y +
             "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\" dominant-baseline=\"middle\">1e" +
             std::to_string(d) + "</text>\n";
    }
    for (double t : truth.t) {
        s += "<text x=\"" + detail::fixed(X(t)) + "\" y=\"" + detail::fixed(top + ph + 16) +
             "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" + format_double(t) + "</text>\n";
    }
    s += "<text x=\"" + detail::fixed(left + pw / 2) + "\" y=\"" + detail::fixed(H - 16) +
         "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">t</text>\n";

    for (std::size_t k = 0; k < logs.size(); ++k) {
        const std::string color = k == 0 ? "black" : palette[(k - 1) % 10];
        const std::string dash = k == 0 ? "" : " stroke-dasharray=\"6 3\"";
        std::string pts;
        auto flush = [&] {
            if (!pts.empty())
                s += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"" + dash + " points=\"" + pts +
                     "\"/>\n";
            pts.clear();
        };
        for (std::size_t i = 0; i < truth.t.size(); ++i) {
            const double v = logs[k][i];
            if (!std::isfinite(v)) {
                flush();
                continue;
            }
            if (!pts.empty()) pts += ' ';
            pts += detail::fixed(X(truth.t[i])) + "," + detail::fixed(Y(v));
        }
        flush();
        const double ly = top + 14.0 + 18.0 * static_cast<double>(k);
        const std::string label = k == 0 ? curve_label(truth) : curve_label(curves[k - 1]);
        s += "<line x1=\"" + detail::fixed(left + pw + 12) + "\" y1=\"" + detail::fixed(ly) + "\" x2=\"" +
             detail::fixed(left + pw + 36) + "\" y2=\"" + detail::fixed(ly) + "\" stroke=\"" + color +
             "\" stroke-width=\"2\"" + dash + "/>\n";
        s += "<text x=\"" + detail::fixed(left + pw + 42) + "\" y=\"" + detail::fixed(ly) +
             "\" font-family=\"sans-serif\" font-size=\"11\" dominant-baseline=\"middle\">" +
             detail::xml_escape(label) + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

} // namespace semibound
