#pragma once

// Batch runs: a JSON config names one operator and a list of tasks; each task
// writes its CSV (and optionally SVG) into the output directory, and a summary
// records max truth/bound per bound method.

#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semibound/appendix_recursion.hpp"
#include "semibound/bounds.hpp"
#include "semibound/errors.hpp"
#include "semibound/format.hpp"
#include "semibound/gallery.hpp"
#include "semibound/matrix_io.hpp"
#include "semibound/plot.hpp"
#include "semibound/resolvent_profile.hpp"
#include "semibound/spectral_split.hpp"
#include "semibound/validation.hpp"

namespace semibound {

/// Malformed or inconsistent run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

enum ExitCode : int {
    kExitOk = 0,
    kExitDominationFailed = 1,
    kExitConfig = 2,
    kExitHypothesis = 3,
    kExitNumeric = 4,
};

struct OperatorSource {
    std::string gallery; // empty when matrix_file is used
    nlohmann::json params = nlohmann::json::object();
    std::string matrix_file; // as written; resolved against RunConfig::base_dir
};

struct TaskSpec {
    std::string type; // profile | bound | validate | split | recursion
    std::vector<double> omega;
    std::vector<double> t;
    std::vector<std::string> methods;   // bound
    std::optional<WeightSpec> m;        // default Exponential{1, numerical abscissa}
    std::string split = "symmetric";    // gps/split time split: symmetric | optimal
    std::optional<double> power_alpha;  // default r/(4 M_hat)
    std::optional<double> omega_tilde;  // split
    std::optional<Contour> contour;     // split
    std::string majorant = "user";      // split: user | sampled
    double rel_width = kDefaultRelWidth;
    double T = 1.0;                     // recursion horizon of m0
    int steps = 1024;                   // recursion: h = T / steps
    std::optional<double> t_max;
    std::optional<double> r;
};

struct RunConfig {
    OperatorSource op;
    std::vector<TaskSpec> tasks;
    std::string output_dir = "semibound_out";
    std::uint64_t seed = 42;
    bool plot = false;
    std::filesystem::path base_dir; // for relative paths; not serialized
};

inline const std::vector<std::string>& bound_methods() {
    static const std::vector<std::string> m{"gps", "propa", "contrb", "contrbprime", "power"};
    return m;
}

namespace detail {

using nlohmann::json;

inline double number(const json& j, const std::string& what) {
    if (!j.is_number()) throw ConfigError(what + " must be a number");
    return j.get<double>();
}

/// A list of numbers, or {"start", "stop", "step"} (stop included), or
/// {"start", "stop", "count", "spacing": "linear" | "log"}.
inline std::vector<double> grid(const json& j, const std::string& what) {
    std::vector<double> out;
    if (j.is_number()) return {j.get<double>()};
    if (j.is_array()) {
        for (const auto& e : j) out.push_back(number(e, what));
        return out;
    }
    if (!j.is_object() || !j.contains("start") || !j.contains("stop"))
        throw ConfigError(what + " must be a list or a {start, stop, step|count} range");
    const double a = number(j["start"], what + ".start"), b = number(j["stop"], what + ".stop");
    if (!(b >= a)) throw ConfigError(what + ": stop must not be below start");
    if (j.contains("step")) {
        const double h = number(j["step"], what + ".step");
        if (!(h > 0.0)) throw ConfigError(what + ".step must be positive");
        const auto n = static_cast<long>(std::floor((b - a) / h * (1.0 + 1e-12) + 1e-9));
        if (n > 1000000) throw ConfigError(what + ": too many grid points");
        for (long k = 0; k <= n; ++k) out.push_back(a + static_cast<double>(k) * h);
        return out;
    }
    if (!j.contains("count") || !j["count"].is_number_integer() || j["count"].get<int>() < 1)
        throw ConfigError(what + " range needs a positive step or an integer count >= 1");
    const int n = j["count"].get<int>();
    const std::string spacing = j.value("spacing", std::string("linear"));
    if (spacing != "linear" && spacing != "log") throw ConfigError(what + ".spacing must be linear or log");
    if (spacing == "log" && !(a > 0.0)) throw ConfigError(what + ": log spacing needs start > 0");
    for (int k = 0; k < n; ++k) {
        const double u = n == 1 ? 0.0 : static_cast<double>(k) / (n - 1);
        out.push_back(spacing == "log" ? a * std::pow(b / a, u) : a + u * (b - a));
    }
    return out;
}

inline void require_time_grid(const std::vector<double>& t, const std::string& what) {
    if (t.empty()) throw ConfigError(what + ": empty t grid");
    for (std::size_t i = 0; i < t.size(); ++i)
        if (!(t[i] > 0.0) || !std::isfinite(t[i]) || (i > 0 && !(t[i] > t[i - 1])))
            throw ConfigError(what + ": t grid must be positive and strictly ascending");
}

inline WeightSpec weight_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("m must be an object");
    const std::string type = j.value("type", std::string("exponential"));
    WeightSpec m;
    if (type == "exponential") {
        m = Exponential{j.contains("M_hat") ? number(j["M_hat"], "m.M_hat") : 1.0,
                        j.contains("omega_hat") ? number(j["omega_hat"], "m.omega_hat") : 0.0};
    } else if (type == "tabulated") {
        if (!j.contains("grid") || !j.contains("values") || !j.contains("horizon_T"))
            throw ConfigError("tabulated m needs grid, values and horizon_T");
        m = Tabulated{grid(j["grid"], "m.grid"), grid(j["values"], "m.values"), number(j["horizon_T"], "m.horizon_T")};
    } else {
        throw ConfigError("unknown m type '" + type + "'");
    }
    try {
        validate(m);
    } catch (const Error& e) {
        throw ConfigError(std::string("m: ") + e.what());
    }
    return m;
}

inline json weight_to_json(const WeightSpec& m) {
    if (const auto* e = std::get_if<Exponential>(&m))
        return {{"type", "exponential"}, {"M_hat", e->M_hat}, {"omega_hat", e->omega_hat}};
    const auto& t = std::get<Tabulated>(m);
    return {{"type", "tabulated"}, {"grid", t.grid}, {"values", t.values}, {"horizon_T", t.horizon_T}};
}

inline json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

inline Contour contour_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("contour must be an object");
    const std::string kind = j.value("kind", std::string("circle"));
    const int nodes = j.value("nodes", 256);
    try {
        if (kind == "circle") {
            if (!j.contains("center") || !j.contains("radius")) throw ConfigError("circle contour needs center and radius");
            return Contour::circle(complex_value(j["center"]), number(j["radius"], "contour.radius"), nodes);
        }
        if (kind == "rectangle") {
            if (!j.contains("lower_left") || !j.contains("upper_right"))
                throw ConfigError("rectangle contour needs lower_left and upper_right");
            return Contour::rectangle(complex_value(j["lower_left"]), complex_value(j["upper_right"]), nodes);
        }
    } catch (const DomainError& e) {
        throw ConfigError(std::string("contour: ") + e.what());
    } catch (const StructuralError& e) {
        throw ConfigError(std::string("contour: ") + e.what());
    }
    throw ConfigError("unknown contour kind '" + kind + "'");
}

inline json contour_to_json(const Contour& c) {
    if (c.kind == Contour::Kind::Circle)
        return {{"kind", "circle"}, {"center", complex_to_json(c.center)}, {"radius", c.radius}, {"nodes", c.nodes}};
    return {{"kind", "rectangle"},
            {"lower_left", complex_to_json(c.lower_left)},
            {"upper_right", complex_to_json(c.upper_right)},
            {"nodes", c.nodes}};
}

inline TaskSpec task_from_json(const json& j, std::size_t index) {
    const std::string where = "tasks[" + std::to_string(index) + "]";
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
        throw ConfigError(where + " needs a string \"type\"");
    TaskSpec t;
    t.type = j["type"].get<std::string>();
    static const std::vector<std::string> types{"profile", "bound", "validate", "split", "recursion"};
    if (std::find(types.begin(), types.end(), t.type) == types.end())
        throw ConfigError(where + ": unknown task type '" + t.type + "'");
    if (j.contains("omega")) t.omega = grid(j["omega"], where + ".omega");
    if (j.contains("t")) t.t = grid(j["t"], where + ".t");
    if (j.contains("method")) t.methods.push_back(j["method"].get<std::string>());
    if (j.contains("methods"))
        for (const auto& m : j["methods"]) t.methods.push_back(m.get<std::string>());
    if (j.contains("m")) t.m = weight_from_json(j["m"]);
    t.split = j.value("split", t.split);
    if (j.contains("power_alpha")) t.power_alpha = number(j["power_alpha"], where + ".power_alpha");
    if (j.contains("omega_tilde")) t.omega_tilde = number(j["omega_tilde"], where + ".omega_tilde");
    if (j.contains("contour")) t.contour = contour_from_json(j["contour"]);
    t.majorant = j.value("majorant", t.majorant);
    if (j.contains("rel_width")) t.rel_width = number(j["rel_width"], where + ".rel_width");
    if (j.contains("T")) t.T = number(j["T"], where + ".T");
    t.steps = j.value("steps", t.steps);
    if (j.contains("t_max")) t.t_max = number(j["t_max"], where + ".t_max");
    if (j.contains("r")) t.r = number(j["r"], where + ".r");

    if (t.split != "symmetric" && t.split != "optimal") throw ConfigError(where + ".split must be symmetric or optimal");
    if (t.majorant != "user" && t.majorant != "sampled") throw ConfigError(where + ".majorant must be user or sampled");
    if (!(t.rel_width > 0.0 && t.rel_width < 1.0)) throw ConfigError(where + ".rel_width must lie in (0, 1)");
    if (!(t.T > 0.0) || t.steps < 512) throw ConfigError(where + ": recursion needs T > 0 and steps >= 512");
    for (const auto& m : t.methods)
        if (std::find(bound_methods().begin(), bound_methods().end(), m) == bound_methods().end())
            throw ConfigError(where + ": unknown bound method '" + m + "'");
    if (t.type == "profile" && t.omega.empty()) throw ConfigError(where + ": profile needs an omega grid");
    if (t.type == "profile")
        for (std::size_t i = 1; i < t.omega.size(); ++i)
            if (!(t.omega[i] > t.omega[i - 1])) throw ConfigError(where + ": omega grid must be strictly ascending");
    if (t.type == "split" && !t.omega_tilde) throw ConfigError(where + ": split needs omega_tilde");
    if (t.type == "bound" || t.type == "validate" || t.type == "split") require_time_grid(t.t, where);
    if (!t.t.empty()) require_time_grid(t.t, where);
    return t;
}

inline json task_to_json(const TaskSpec& t) {
    json j{{"type", t.type}};
    if (!t.omega.empty()) j["omega"] = t.omega;
    if (!t.t.empty()) j["t"] = t.t;
    if (!t.methods.empty()) j["methods"] = t.methods;
    if (t.m) j["m"] = weight_to_json(*t.m);
    j["split"] = t.split;
    if (t.power_alpha) j["power_alpha"] = *t.power_alpha;
    if (t.omega_tilde) j["omega_tilde"] = *t.omega_tilde;
    if (t.contour) j["contour"] = contour_to_json(*t.contour);
    j["majorant"] = t.majorant;
    j["rel_width"] = t.rel_width;
    j["T"] = t.T;
    j["steps"] = t.steps;
    if (t.t_max) j["t_max"] = *t.t_max;
    if (t.r) j["r"] = *t.r;
    return j;
}

} // namespace detail

inline std::filesystem::path resolved_matrix_file(const RunConfig& c) {
    const std::filesystem::path p(c.op.matrix_file);
    return p.is_absolute() || c.base_dir.empty() ? p : c.base_dir / p;
}

/// Parses and validates a config; relative matrix paths resolve against base_dir.
inline RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    RunConfig c;
    c.base_dir = base_dir;
    try {
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
        if (!j.contains("operator") || !j["operator"].is_object()) throw ConfigError("config needs an \"operator\" object");
        const auto& op = j["operator"];
        if (op.contains("gallery") == op.contains("matrix_file"))
            throw ConfigError("operator needs exactly one of \"gallery\" or \"matrix_file\"");
        if (op.contains("gallery")) {
            c.op.gallery = op["gallery"].get<std::string>();
            const auto& names = gallery_names();
            if (std::find(names.begin(), names.end(), c.op.gallery) == names.end())
                throw ConfigError("unknown gallery operator '" + c.op.gallery + "'");
            if (op.contains("params")) {
                if (!op["params"].is_object()) throw ConfigError("operator.params must be an object");
                c.op.params = op["params"];
            }
        } else {
            c.op.matrix_file = op["matrix_file"].get<std::string>();
        }
        if (j.contains("seed")) {
            if (!j["seed"].is_number_integer() || j["seed"].get<std::int64_t>() < 0) throw ConfigError("seed must be a non-negative integer");
            c.seed = j["seed"].get<std::uint64_t>();
        }
        c.output_dir = j.value("output_dir", c.output_dir);
        c.plot = j.value("plot", false);
        if (!j.contains("tasks") || !j["tasks"].is_array() || j["tasks"].empty())
            throw ConfigError("config needs a non-empty \"tasks\" list");
        for (std::size_t i = 0; i < j["tasks"].size(); ++i) c.tasks.push_back(detail::task_from_json(j["tasks"][i], i));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!c.op.matrix_file.empty() && !std::filesystem::is_regular_file(resolved_matrix_file(c)))
        throw ConfigError("matrix file not found: " + resolved_matrix_file(c).string());
    return c;
}

inline nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json op;
    if (c.op.matrix_file.empty()) {
        op["gallery"] = c.op.gallery;
        op["params"] = c.op.params;
    } else {
        op["matrix_file"] = c.op.matrix_file;
    }
    nlohmann::json tasks = nlohmann::json::array();
    for (const auto& t : c.tasks) tasks.push_back(detail::task_to_json(t));
    return {{"operator", op}, {"tasks", tasks}, {"output_dir", c.output_dir}, {"seed", c.seed}, {"plot", c.plot}};
}

inline RunConfig load_config(const std::filesystem::path& path) {
    if (!std::filesystem::is_regular_file(path)) throw ConfigError("config file not found: " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return config_from_json(j, path.parent_path());
}

/// The operator a config names; random gallery operators take the run seed unless params set one.
inline OperatorMatrix build_operator(const RunConfig& c) {
    if (!c.op.matrix_file.empty()) return load_matrix(resolved_matrix_file(c));
    auto params = c.op.params;
    if (c.op.gallery == "random_nonnormal" && !params.contains("seed")) params["seed"] = c.seed;
    return build_gallery(c.op.gallery, params);
}

struct SummaryRow {
    std::size_t task = 0;
    std::string type;
    std::string method;
    double max_ratio = NAN; // max over t of truth / bound; NaN when not a bound
    std::string status;     // pass | fail | n/a
    std::string note;
};

struct RunResult {
    int exit_code = kExitOk;
    std::string message;
    std::vector<SummaryRow> rows;
    std::vector<std::filesystem::path> files;

    bool dominated() const {
        for (const auto& r : rows)
            if (r.status == "fail") return false;
        return true;
    }
};

inline std::string summary_csv(const RunConfig& c, const RunResult& res) {
    std::string out = "#seed=" + std::to_string(c.seed) + "\n";
    out += "task,type,method,max_truth_over_bound,status,note\n";
    for (const auto& r : res.rows) {
        std::string note = r.note;
        std::replace(note.begin(), note.end(), ',', ';');
        std::replace(note.begin(), note.end(), '\n', ' ');
        out += std::to_string(r.task) + "," + r.type + "," + r.method + "," +
               (std::isnan(r.max_ratio) ? std::string() : format_double(r.max_ratio)) + "," + r.status + "," + note + "\n";
    }
    return out;
}

namespace detail {

struct TaskContext {
    const RunConfig& config;
    const OperatorMatrix& a;
    const LineSweeper& sweeper;
    RunResult& result;
    std::size_t index;
    const std::function<void(const std::string&)>& log;

    std::filesystem::path path(const std::string& suffix) const {
        return std::filesystem::path(config.output_dir) / ("task" + std::to_string(index) + "_" + suffix);
    }
    void write(const std::string& suffix, const std::string& content) const {
        const auto p = path(suffix);
        write_file_atomic(p, content);
        result.files.push_back(p);
        if (log) log("wrote " + p.string());
    }
    void row(const std::string& type, const std::string& method, double ratio, std::string note = {}) const {
        const std::string status = std::isnan(ratio) ? "n/a" : dominates(ratio) ? "pass" : "fail";
        result.rows.push_back({index, type, method, ratio, status, std::move(note)});
        if (log) log("task " + std::to_string(index) + " " + method + ": " +
                     (std::isnan(ratio) ? status : "max truth/bound " + format_double(ratio) + " " + status));
    }
    WeightSpec weight(const TaskSpec& t) const { return t.m ? *t.m : WeightSpec{Exponential{1.0, sweeper.numerical_abscissa()}}; }
    double default_omega() const {
        const double alpha = sweeper.abscissa(), mu = sweeper.numerical_abscissa();
        return alpha + 0.5 * std::max(mu - alpha, 0.05 * (1.0 + std::abs(alpha)));
    }
};

inline BoundCurve truth_curve(const std::vector<double>& ts, const std::vector<double>& values) {
    BoundCurve c;
    c.t = ts;
    c.values = values;
    c.method = "semigroup_norm";
    return c;
}

inline std::string truth_csv(const std::vector<double>& ts, const std::vector<double>& values) {
    std::string out = "t,semigroup_norm\n";
    for (std::size_t i = 0; i < ts.size(); ++i) out += format_double(ts[i]) + "," + format_double(values[i]) + "\n";
    return out;
}

inline void run_profile(const TaskSpec& t, const TaskContext& ctx) {
    const auto prof = profile(ctx.sweeper, t.omega, t.rel_width);
    ctx.write("profile.csv", prof.to_csv());
    ctx.row("profile", "profile", NAN, std::to_string(prof.size()) + " points");
}

inline const Exponential& exponential_m(const WeightSpec& m, const std::string& method) {
    const auto* e = std::get_if<Exponential>(&m);
    if (!e) throw ConfigError(method + " needs an exponential m (M_hat, omega_hat)");
    return *e;
}

inline void run_bound(const TaskSpec& t, const TaskContext& ctx) {
    const WeightSpec m = ctx.weight(t);
    const auto truth = semigroup_norms(ctx.a, t.t);
    ctx.write("truth.csv", truth_csv(t.t, truth));
    const std::vector<double> omegas = t.omega.empty() ? std::vector<double>{ctx.default_omega()} : t.omega;
    const std::vector<std::string> methods = t.methods.empty() ? std::vector<std::string>{"gps"} : t.methods;
    const SplitRule rule = t.split == "optimal" ? SplitRule::Optimal : SplitRule::Symmetric;
    std::vector<BoundCurve> curves;
    auto emit = [&](BoundCurve c, const std::string& label) {
        c.set("label", label);
        ctx.write("bound_" + label + ".csv", c.to_csv());
        ctx.row("bound", label, detail::max_ratio(truth, c.values));
        curves.push_back(std::move(c));
    };
    for (const auto& method : methods) {
        if (method == "gps" || method == "propa" || method == "contrb") {
            for (std::size_t k = 0; k < omegas.size(); ++k) {
                const double w = omegas[k];
                const std::string label = omegas.size() == 1 ? method : method + "_" + std::to_string(k);
                const double r = ctx.sweeper.sweep(w, t.rel_width).r_lo;
                if (method == "gps") {
                    emit(gps_curve(r, m, w, t.t, rule), label);
                } else {
                    const auto& e = exponential_m(m, method);
                    emit(method == "propa" ? propa_curve(e.M_hat, e.omega_hat, w, r, t.t)
                                           : contrb_curve(e.M_hat, e.omega_hat, w, r, t.t, SRule::Optimal),
                         label);
                }
            }
        } else {
            const auto& e = exponential_m(m, method);
            const double r_hat = ctx.sweeper.sweep(e.omega_hat, t.rel_width).r_lo;
            if (method == "contrbprime")
                emit(contrbprime_curve(e.M_hat, e.omega_hat, r_hat, t.t), method);
            else
                emit(power_curve(e.M_hat, e.omega_hat, r_hat, t.t, t.power_alpha.value_or(r_hat / (4.0 * e.M_hat))), method);
        }
    }
    if (ctx.config.plot) ctx.write("bound.svg", plot_data(curves, truth_curve(t.t, truth), ctx.a.label()));
}

inline void run_validate(const TaskSpec& t, const TaskContext& ctx) {
    SuiteOptions opt;
    opt.ts = t.t;
    opt.rel_width = t.rel_width;
    opt.appendix_T = t.T;
    opt.appendix_steps = t.steps;
    opt.sampled_split = t.majorant == "sampled";
    const auto rep = domination_suite(ctx.sweeper, opt, ctx.log);
    ctx.write("validate.csv", rep.to_csv());
    std::vector<BoundCurve> curves;
    for (const auto& m : rep.methods) {
        if (!m.applicable) {
            ctx.result.rows.push_back({ctx.index, "validate", m.label, NAN,
                                       m.note.rfind("failed:", 0) == 0 ? "fail" : "n/a", m.note});
            continue;
        }
        ctx.result.rows.push_back({ctx.index, "validate", m.label, m.max_ratio, dominates(m.max_ratio) ? "pass" : "fail", {}});
        if (m.truth == rep.truth) curves.push_back(m.curve);
    }
    if (ctx.config.plot && !curves.empty())
        ctx.write("validate.svg", plot_data(curves, truth_curve(rep.ts, rep.truth), rep.op));
}

inline void run_split(const TaskSpec& t, const TaskContext& ctx) {
    const double w = *t.omega_tilde;
    const auto& eigs = ctx.sweeper.spectrum();
    const Contour contour = t.contour ? *t.contour : split_contour(eigs, w, contour_tolerance(ctx.a));
    const auto sp = riesz_projection(ctx.a, contour, eigs);
    const double r = ctx.sweeper.sweep(w, t.rel_width, SpectrumCheck::LineOnly).r_lo;
    const WeightSpec m = t.majorant == "sampled"
                             ? WeightSpec{sampled_complement_majorant(ctx.a, sp, 0.5 * t.t.back(), 64,
                                                                      ctx.sweeper.numerical_abscissa())}
                             : ctx.weight(t);
    const auto rep = split_report(ctx.a, sp, w, r, m, t.t, t.split == "optimal" ? SplitRule::Optimal : SplitRule::Symmetric);
    ctx.write("split.csv", rep.to_csv());
    ctx.row("split", "split", rep.max_ratio(),
            "trace " + format_double(sp.trace.real()) + ", idempotency " + format_double(sp.idempotency_defect) +
                ", commutation " + format_double(sp.commutation_defect));
    if (ctx.config.plot) {
        std::vector<double> truth;
        for (const auto& row : rep.rows) truth.push_back(row.R_true);
        auto tc = truth_curve(t.t, truth);
        tc.method = "remainder_norm";
        ctx.write("split.svg", plot_data({rep.bound_curve()}, tc, ctx.a.label()));
    }
}

inline void run_recursion(const TaskSpec& t, const TaskContext& ctx) {
    const double w = t.omega.empty() ? ctx.default_omega() : t.omega.front();
    const double r = t.r ? *t.r : ctx.sweeper.sweep(w, t.rel_width).r_lo;
    Tabulated m0;
    const WeightSpec m = ctx.weight(t);
    if (const auto* e = std::get_if<Exponential>(&m)) {
        m0 = Tabulated{{0.0, t.T}, {e->M_hat, e->M_hat * std::exp((e->omega_hat - w) * t.T)}, t.T};
    } else {
        // Rescale a tabulated majorant of ||S|| to one of ||S|| e^{-omega s}.
        m0 = std::get<Tabulated>(m);
        for (std::size_t i = 0; i < m0.grid.size(); ++i) m0.values[i] *= std::exp(-w * m0.grid[i]);
    }
    const double t_max = t.t_max.value_or(t.t.empty() ? 8.0 * m0.horizon_T : t.t.back());
    const auto state = extend_majorant(m0, w, r, t_max, m0.horizon_T / t.steps);
    ctx.write("recursion.csv", state.to_csv());
    const auto checks = check_recursion(state);
    std::string note = "k0 " + std::to_string(state.k0) + ", K " + std::to_string(checks.K);
    for (const auto& f : checks.failures) note += "; " + f;
    ctx.result.rows.push_back({ctx.index, "recursion", "recursion_checks", NAN, checks.all() ? "pass" : "fail", note});
    if (ctx.log) ctx.log("task " + std::to_string(ctx.index) + " recursion checks " + (checks.all() ? "pass" : "fail"));
    if (!t.t.empty()) {
        const auto truth = semigroup_norms(ctx.a, t.t);
        auto c = appendix_curve(state, t.t);
        c.set("label", "appendix");
        ctx.write("truth.csv", truth_csv(t.t, truth));
        ctx.write("bound_appendix.csv", c.to_csv());
        ctx.row("recursion", "appendix", detail::max_ratio(truth, c.values));
        if (ctx.config.plot) ctx.write("recursion.svg", plot_data({c}, truth_curve(t.t, truth), ctx.a.label()));
    }
}

} // namespace detail

/// Runs every task in order. Never throws for run-time failures: they map to exit codes.
inline RunResult run(const RunConfig& config, const std::function<void(const std::string&)>& log = {}) {
    RunResult res;
    try {
        std::filesystem::create_directories(config.output_dir);
        const OperatorMatrix a = build_operator(config);
        if (log) log("operator " + (a.label().empty() ? std::string("matrix") : a.label()) + ", n = " + std::to_string(a.dim()));
        const LineSweeper sweeper(a);
        for (std::size_t i = 0; i < config.tasks.size(); ++i) {
            const auto& t = config.tasks[i];
            const detail::TaskContext ctx{config, a, sweeper, res, i, log};
            if (t.type == "profile") detail::run_profile(t, ctx);
            else if (t.type == "bound") detail::run_bound(t, ctx);
            else if (t.type == "validate") detail::run_validate(t, ctx);
            else if (t.type == "split") detail::run_split(t, ctx);
            else detail::run_recursion(t, ctx);
        }
        res.exit_code = res.dominated() ? kExitOk : kExitDominationFailed;
        res.message = res.dominated() ? "all domination checks passed" : "a domination check failed";
    } catch (const ConfigError& e) {
        res.exit_code = kExitConfig, res.message = std::string("config error: ") + e.what();
    } catch (const StructuralError& e) {
        res.exit_code = kExitConfig, res.message = std::string("input error: ") + e.what();
    } catch (const DomainError& e) {
        res.exit_code = kExitConfig, res.message = std::string("parameter error: ") + e.what();
    } catch (const HypothesisError& e) {
        res.exit_code = kExitHypothesis, res.message = std::string("hypothesis violated: ") + e.what();
    } catch (const Error& e) {
        res.exit_code = kExitNumeric, res.message = std::string("numeric failure: ") + e.what();
    } catch (const std::filesystem::filesystem_error& e) {
        res.exit_code = kExitConfig, res.message = std::string("output error: ") + e.what();
    }
    try {
        const auto p = std::filesystem::path(config.output_dir) / "summary.csv";
        write_file_atomic(p, summary_csv(config, res));
        res.files.push_back(p);
    } catch (const std::exception& e) {
        if (res.exit_code == kExitOk) res.exit_code = kExitConfig, res.message = std::string("output error: ") + e.what();
    }
    return res;
}

} // namespace semibound
