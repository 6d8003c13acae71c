#include <catch_amalgamated.hpp>

#include <filesystem>

#include "semibound/orchestrator.hpp"

using namespace semibound;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("semibound_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

json jordan_config(const fs::path& out) {
    return {{"operator", {{"gallery", "jordan"}, {"params", {{"n", 2}, {"lambda", -1.0}}}}},
            {"tasks",
             {{{"type", "profile"}, {"omega", {-0.5, 0.0}}},
              {{"type", "bound"}, {"methods", {"gps"}}, {"t", {{"start", 1}, {"stop", 10}, {"step", 1}}}}}},
            {"output_dir", out.string()},
            {"seed", 7},
            {"plot", true}};
}

} // namespace

TEST_CASE("jordan config: profile and gps bound", "[cli]") {
    const auto out = scratch("jordan");
    const auto cfg = config_from_json(jordan_config(out));
    REQUIRE(cfg.tasks[1].t.size() == 10);
    CHECK(cfg.tasks[1].t.back() == 10.0);
    const auto res = run(cfg);
    INFO(res.message);
    CHECK(res.exit_code == kExitOk);
    bool saw_gps = false;
    for (const auto& r : res.rows)
        if (r.method == "gps") {
            saw_gps = true;
            CHECK(r.max_ratio <= 1.0);
        }
    CHECK(saw_gps);
    for (const char* f : {"task0_profile.csv", "task1_truth.csv", "task1_bound_gps.csv", "task1_bound.svg", "summary.csv"})
        CHECK(fs::is_regular_file(out / f));
    const auto profile_csv = read_file(out / "task0_profile.csv");
    CHECK(profile_csv.rfind("omega,r_lo,r_hi,argmin_y,window_Y\n", 0) == 0);

    // Reproducible summary and byte-identical plot.
    const auto summary = read_file(out / "summary.csv");
    const auto svg = read_file(out / "task1_bound.svg");
    CHECK(summary.find("#seed=7\n") == 0);
    run(cfg);
    CHECK(read_file(out / "summary.csv") == summary);
    CHECK(read_file(out / "task1_bound.svg") == svg);
}

TEST_CASE("config round trip", "[cli]") {
    auto j = jordan_config("unused");
    j["tasks"].push_back({{"type", "split"},
                          {"omega_tilde", -2.0},
                          {"t", {{"start", 0.5}, {"stop", 8}, {"count", 5}, {"spacing", "log"}}},
                          {"contour", {{"kind", "circle"}, {"center", {-1.0, 0.0}}, {"radius", 0.5}, {"nodes", 64}}},
                          {"m", {{"type", "exponential"}, {"M_hat", 2.0}, {"omega_hat", 0.1}}}});
    j["tasks"].push_back({{"type", "recursion"}, {"omega", -0.5}, {"T", 2.0}, {"steps", 2048}, {"t_max", 16.0}, {"r", 0.3},
                          {"m", {{"type", "tabulated"}, {"grid", {0.0, 1.0, 2.0}}, {"values", {1.0, 2.0, 1.5}}, {"horizon_T", 2.0}}}});
    const auto c1 = config_from_json(j);
    const auto s1 = config_to_json(c1);
    const auto c2 = config_from_json(s1);
    CHECK(config_to_json(c2) == s1);
    CHECK(c2.tasks[2].t.size() == 5);
    CHECK(c2.tasks[2].t.back() == Catch::Approx(8.0));
    CHECK(c2.seed == 7);
}

TEST_CASE("config errors map to exit 2", "[cli]") {
    const auto out = scratch("errors");
    auto missing = jordan_config(out);
    missing["operator"] = {{"matrix_file", (out / "absent.json").string()}};
    CHECK_THROWS_AS(config_from_json(missing), ConfigError);
    CHECK_THROWS_AS(load_config(out / "absent_config.json"), ConfigError);

    auto no_tasks = jordan_config(out);
    no_tasks["tasks"] = json::array();
    CHECK_THROWS_AS(config_from_json(no_tasks), ConfigError);

    auto bad_t = jordan_config(out);
    bad_t["tasks"][1]["t"] = {1.0, 0.5};
    CHECK_THROWS_AS(config_from_json(bad_t), ConfigError);
    bad_t["tasks"][1]["t"] = {0.0, 1.0};
    CHECK_THROWS_AS(config_from_json(bad_t), ConfigError);

    auto bad_type = jordan_config(out);
    bad_type["tasks"][0]["type"] = "simulate";
    CHECK_THROWS_AS(config_from_json(bad_type), ConfigError);

    auto both = jordan_config(out);
    both["operator"]["matrix_file"] = "x.json";
    CHECK_THROWS_AS(config_from_json(both), ConfigError);

    // A tabulated m cannot feed propa: parameter error at run time.
    auto tab = jordan_config(out);
    tab["tasks"] = {{{"type", "bound"}, {"methods", {"propa"}}, {"t", {1.0}},
                     {"m", {{"type", "tabulated"}, {"grid", {0.0, 1.0}}, {"values", {1.0, 1.0}}, {"horizon_T", 1.0}}}}};
    CHECK(run(config_from_json(tab)).exit_code == kExitConfig);
}

TEST_CASE("hypothesis violations map to exit 3", "[cli]") {
    const auto out = scratch("hypothesis");
    auto j = jordan_config(out);
    j["tasks"] = {{{"type", "bound"}, {"methods", {"gps"}}, {"omega", {-2.0}}, {"t", {1.0}}}};
    const auto res = run(config_from_json(j));
    CHECK(res.exit_code == kExitHypothesis);
    CHECK(res.message.find("hypothesis violated") != std::string::npos);
    CHECK(res.message.find("spectral abscissa") != std::string::npos);
    CHECK(fs::is_regular_file(out / "summary.csv"));
}

TEST_CASE("failed domination gives a nonzero exit", "[cli]") {
    const auto out = scratch("domination");
    // A false majorant m = e^{-2t} for the Jordan block with eigenvalue -1.
    auto j = jordan_config(out);
    j["tasks"] = {{{"type", "bound"}, {"methods", {"gps"}}, {"t", {1.0, 2.0, 4.0, 8.0}},
                   {"m", {{"type", "exponential"}, {"M_hat", 1.0}, {"omega_hat", -2.0}}}}};
    const auto res = run(config_from_json(j));
    CHECK(res.exit_code == kExitDominationFailed);
    CHECK(!res.dominated());
}

TEST_CASE("matrix file operators and recursion task", "[cli]") {
    const auto out = scratch("matrix");
    save_matrix(out / "op.json", build_jordan(3, Complex(-0.5, 0.0)));
    const json j{{"operator", {{"matrix_file", "op.json"}}},
                 {"tasks", {{{"type", "recursion"}, {"t", {0.5, 1.0, 2.0, 4.0}}}}},
                 {"output_dir", (out / "res").string()}};
    const auto cfg = config_from_json(j, out);
    const auto res = run(cfg);
    INFO(res.message);
    CHECK(res.exit_code == kExitOk);
    CHECK(fs::is_regular_file(out / "res" / "task0_recursion.csv"));
    const auto csv = read_file(out / "res" / "task0_recursion.csv");
    CHECK(csv.rfind("#T=1\n", 0) == 0);
    CHECK(csv.find("\nt,f_tilde,m_tilde,dyadic_block_index\n") != std::string::npos);
}

TEST_CASE("validate task on a random operator uses the run seed", "[cli]") {
    const auto out = scratch("validate");
    const json j{{"operator", {{"gallery", "random_nonnormal"}, {"params", {{"n", 6}, {"departure", 1.5}}}}},
                 {"tasks", {{{"type", "validate"}, {"t", {0.25, 0.5, 1, 2, 4, 8}}}}},
                 {"output_dir", out.string()},
                 {"seed", 11}};
    const auto res = run(config_from_json(j));
    INFO(res.message);
    CHECK(res.exit_code == kExitOk);
    CHECK(read_file(out / "task0_validate.csv").find("random_nonnormal") != std::string::npos);
    CHECK(build_operator(config_from_json(j)).matrix() == build_random_nonnormal(6, 11, 1.5).matrix());
}

TEST_CASE("davies split task", "[cli][slow]") {
    const auto out = scratch("davies");
    const json j{{"operator", {{"gallery", "davies"}}},
                 {"tasks", {{{"type", "split"}, {"omega_tilde", -2.0}, {"t", {2, 3, 4, 5, 6}}}}},
                 {"output_dir", out.string()}};
    const auto res = run(config_from_json(j));
    INFO(res.message);
    CHECK(res.exit_code == kExitOk);
    const auto csv = read_file(out / "task0_split.csv");
    CHECK(csv.find("t,R_true,R_bound,leading_term_norm\n") != std::string::npos);
    REQUIRE(res.rows.size() == 1);
    CHECK(res.rows[0].max_ratio <= 1.0);
}
