// semibound: command-line front end.
//
//   semibound run <config.json>
//   semibound gallery <name> [--params JSON] [--emit] [--output FILE]
//   semibound profile|bound|split|recursion|validate  [operator flags] [task flags]
//
// Subcommand flags are assembled into the same JSON config that `run` reads,
// so validation and exit codes are shared.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "semibound/orchestrator.hpp"

using namespace semibound;
using nlohmann::json;

namespace {

struct OperatorFlags {
    std::string gallery;
    std::string params = "{}";
    std::string matrix;
    std::string output_dir = "semibound_out";
    std::uint64_t seed = 42;
    bool plot = false;
};

struct TaskFlags {
    std::vector<double> omega, t;
    std::string omega_range, t_range, t_log;
    std::vector<std::string> methods;
    std::string m, contour, split, majorant;
    double rel_width = 0.0, power_alpha = NAN, omega_tilde = NAN, T = 0.0, t_max = NAN, r = NAN;
    int steps = 0;
};

void add_operator_flags(CLI::App* cmd, OperatorFlags& f) {
    cmd->add_option("--gallery", f.gallery, "gallery operator name")->check(CLI::IsMember(gallery_names()));
    cmd->add_option("--params", f.params, "gallery parameters as a JSON object");
    cmd->add_option("--matrix", f.matrix, "matrix file (JSON: dim, entries, label)");
    cmd->add_option("--output-dir", f.output_dir, "directory for CSV/SVG output");
    cmd->add_option("--seed", f.seed, "seed for random gallery operators");
    cmd->add_flag("--plot", f.plot, "also write SVG charts");
}

void add_grid_flags(CLI::App* cmd, TaskFlags& f, bool omega) {
    if (omega) {
        cmd->add_option("--omega", f.omega, "omega values, comma separated (use --omega=-0.5,0)")->delimiter(',');
        cmd->add_option("--omega-range", f.omega_range, "omega grid start:stop:step");
    }
    cmd->add_option("--t", f.t, "time grid, comma separated")->delimiter(',');
    cmd->add_option("--t-range", f.t_range, "time grid start:stop:step");
    cmd->add_option("--t-log", f.t_log, "log-spaced time grid start:stop:count");
    cmd->add_option("--rel-width", f.rel_width, "relative width of the certified r(omega) enclosure");
}

json parse_json_flag(const std::string& text, const std::string& flag) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(flag + ": " + e.what());
    }
}

json range(const std::string& spec, const std::string& flag, bool log_count) {
    std::vector<double> v;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        const auto colon = spec.find(':', pos);
        const std::string part = spec.substr(pos, colon == std::string::npos ? std::string::npos : colon - pos);
        try {
            std::size_t used = 0;
            v.push_back(std::stod(part, &used));
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
            throw ConfigError(flag + ": expected start:stop:" + (log_count ? "count" : "step") + ", got '" + spec + "'");
        }
        if (colon == std::string::npos) break;
        pos = colon + 1;
    }
    if (v.size() != 3) throw ConfigError(flag + ": expected three numbers separated by ':'");
    if (log_count) return {{"start", v[0]}, {"stop", v[1]}, {"count", static_cast<int>(v[2])}, {"spacing", "log"}};
    return {{"start", v[0]}, {"stop", v[1]}, {"step", v[2]}};
}

json config_json(const std::string& type, const OperatorFlags& o, const TaskFlags& f) {
    json op;
    if (!o.matrix.empty()) op["matrix_file"] = o.matrix;
    if (!o.gallery.empty()) {
        op["gallery"] = o.gallery;
        op["params"] = parse_json_flag(o.params, "--params");
    }
    json task{{"type", type}};
    if (!f.omega.empty()) task["omega"] = f.omega;
    if (!f.omega_range.empty()) task["omega"] = range(f.omega_range, "--omega-range", false);
    if (!f.t.empty()) task["t"] = f.t;
    if (!f.t_range.empty()) task["t"] = range(f.t_range, "--t-range", false);
    if (!f.t_log.empty()) task["t"] = range(f.t_log, "--t-log", true);
    if (!f.methods.empty()) task["methods"] = f.methods;
    if (!f.m.empty()) task["m"] = parse_json_flag(f.m, "--m");
    if (!f.contour.empty()) task["contour"] = parse_json_flag(f.contour, "--contour");
    if (!f.split.empty()) task["split"] = f.split;
    if (!f.majorant.empty()) task["majorant"] = f.majorant;
    if (f.rel_width > 0.0) task["rel_width"] = f.rel_width;
    if (!std::isnan(f.power_alpha)) task["power_alpha"] = f.power_alpha;
    if (!std::isnan(f.omega_tilde)) task["omega_tilde"] = f.omega_tilde;
    if (f.T > 0.0) task["T"] = f.T;
    if (f.steps > 0) task["steps"] = f.steps;
    if (!std::isnan(f.t_max)) task["t_max"] = f.t_max;
    if (!std::isnan(f.r)) task["r"] = f.r;
    return {{"operator", op}, {"tasks", json::array({task})}, {"output_dir", o.output_dir}, {"seed", o.seed},
            {"plot", o.plot}};
}

void print_summary(const RunResult& res) {
    for (const auto& r : res.rows) {
        std::cout << "task " << r.task << "  " << r.type << "  " << r.method << "  ";
        if (!std::isnan(r.max_ratio)) std::cout << "max truth/bound " << format_double(r.max_ratio) << "  ";
        std::cout << r.status;
        if (!r.note.empty()) std::cout << "  (" << r.note << ")";
        std::cout << "\n";
    }
}

int execute(const RunConfig& config) {
    const auto res = run(config, [](const std::string& line) { std::cerr << line << "\n"; });
    print_summary(res);
    std::cerr << res.message << "\n";
    return res.exit_code;
}

int gallery_command(const std::string& name, const std::string& params, bool emit, const std::string& output) {
    const auto a = build_gallery(name, parse_json_flag(params, "--params"));
    if (emit) {
        if (output.empty()) std::cout << to_json(a).dump() << "\n";
        else save_matrix(output, a);
        return kExitOk;
    }
    const auto eigs = eigenvalues(a);
    std::cout << "label " << a.label() << "\n"
              << "dim " << a.dim() << "\n"
              << "norm " << format_double(a.norm()) << "\n"
              << "spectral_abscissa " << format_double(spectral_abscissa(eigs)) << "\n"
              << "numerical_abscissa " << format_double(numerical_abscissa(a)) << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"semibound: certified semigroup decay bounds from resolvent estimates"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "run every task of a JSON config");
    run_cmd->add_option("config", config_path, "config file")->required();

    std::string gallery_name, gallery_params = "{}", gallery_output;
    bool emit = false;
    auto* gallery_cmd = app.add_subcommand("gallery", "build a gallery operator");
    gallery_cmd->add_option("name", gallery_name, "operator name")->required()->check(CLI::IsMember(gallery_names()));
    gallery_cmd->add_option("--params", gallery_params, "parameters as a JSON object");
    gallery_cmd->add_flag("--emit", emit, "write the matrix as JSON");
    gallery_cmd->add_option("--output", gallery_output, "matrix file for --emit (default stdout)");

    OperatorFlags op;
    TaskFlags tf;
    auto* profile_cmd = app.add_subcommand("profile", "certified r(omega) on an omega grid");
    auto* bound_cmd = app.add_subcommand("bound", "bound curves against the semigroup norm");
    auto* split_cmd = app.add_subcommand("split", "Riesz split and remainder bound");
    auto* recursion_cmd = app.add_subcommand("recursion", "extend a majorant on [0, T) to all t");
    auto* validate_cmd = app.add_subcommand("validate", "every bound family against the semigroup norm");
    for (auto* cmd : {profile_cmd, bound_cmd, split_cmd, recursion_cmd, validate_cmd}) add_operator_flags(cmd, op);
    add_grid_flags(profile_cmd, tf, true);
    add_grid_flags(bound_cmd, tf, true);
    add_grid_flags(split_cmd, tf, false);
    add_grid_flags(recursion_cmd, tf, true);
    add_grid_flags(validate_cmd, tf, false);
    bound_cmd->add_option("--method", tf.methods, "gps, propa, contrb, contrbprime, power (repeatable)")->delimiter(',');
    for (auto* cmd : {bound_cmd, split_cmd, recursion_cmd})
        cmd->add_option("--m", tf.m, "majorant as JSON, e.g. {\"type\":\"exponential\",\"M_hat\":1,\"omega_hat\":0}");
    for (auto* cmd : {bound_cmd, split_cmd}) cmd->add_option("--split", tf.split, "time split: symmetric or optimal");
    bound_cmd->add_option("--power-alpha", tf.power_alpha, "schedule parameter of the power bound");
    split_cmd->add_option("--omega-tilde", tf.omega_tilde, "splitting line Re z = omega_tilde")->required();
    split_cmd->add_option("--contour", tf.contour, "contour as JSON (default: automatic)");
    for (auto* cmd : {split_cmd, validate_cmd}) cmd->add_option("--majorant", tf.majorant, "user or sampled");
    for (auto* cmd : {recursion_cmd, validate_cmd}) {
        cmd->add_option("--T", tf.T, "horizon of the initial majorant");
        cmd->add_option("--steps", tf.steps, "grid cells per T (>= 512)");
    }
    recursion_cmd->add_option("--t-max", tf.t_max, "march the recursion up to this time");
    recursion_cmd->add_option("--r", tf.r, "r(omega); swept when omitted");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (run_cmd->parsed()) return execute(load_config(config_path));
        if (gallery_cmd->parsed()) return gallery_command(gallery_name, gallery_params, emit, gallery_output);
        for (auto* cmd : {profile_cmd, bound_cmd, split_cmd, recursion_cmd, validate_cmd})
            if (cmd->parsed()) return execute(config_from_json(config_json(cmd->get_name(), op, tf)));
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const StructuralError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DomainError& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const HypothesisError& e) {
        std::cerr << "hypothesis violated: " << e.what() << "\n";
        return kExitHypothesis;
    } catch (const Error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
