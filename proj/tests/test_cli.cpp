#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "heavytail/cli.hpp"

using namespace heavytail;

namespace {

json pareto2() { return json{{"family", "pareto"}, {"alpha", 2}, {"xm", 1}}; }

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("classify: Pareto(2,1) yields the full chain of holds, exit 0") {
    json cfg{{"model", pareto2()}};
    RunResult r = run_command("classify", cfg, 7, 1);
    CHECK(r.exit_code == 0);
    REQUIRE(r.report.contains("verdicts"));
    for (const auto& v : r.report["verdicts"]) CHECK(v["verdict"] == "holds");
    CHECK(r.report["matuszewska"]["alpha_hat"].get<double>() == doctest::Approx(2).epsilon(0.03));
    CHECK(r.csv.rfind("curve_id,x,value,stderr\n", 0) == 0);
}

TEST_CASE("config validation: malformed family, unknown keys, bad grids") {
    CHECK_THROWS_AS(run_command("classify", json{{"model", json{{"family", "cauchyish"}}}}, 1, 1),
                    ConfigError);
    json extra{{"model", pareto2()}, {"bogus", 1}};
    CHECK_THROWS_AS(run_command("classify", extra, 1, 1), ConfigError);
    json extra_inner{{"model", json{{"family", "pareto"}, {"alpha", 2}, {"xm", 1}, {"z", 0}}}};
    CHECK_THROWS_AS(run_command("classify", extra_inner, 1, 1), ConfigError);
    CHECK_THROWS_AS(run_command("frobnicate", json{{"model", pareto2()}}, 1, 1), ConfigError);
    json badgrid{{"vector",
                  json{{"dim", 2},
                       {"joint", json{{"kind", "common_factor"},
                                      {"R", pareto2()},
                                      {"weights", json::array({1, 1})}}}}},
                 {"x_grid", json{{"lo", -1}, {"hi", 10}, {"points", 5}}}};
    CHECK_THROWS_AS(run_command("mvec", badgrid, 1, 1), ConfigError);
    // invalid model parameters surface as config errors, not raw exceptions
    json badalpha{{"model", json{{"family", "pareto"}, {"alpha", -2}, {"xm", 1}}}};
    CHECK_THROWS_AS(run_command("classify", badalpha, 1, 1), ConfigError);
}

TEST_CASE("product: spec example config confirms [D, PD, Mstar, K]") {
    json cfg{{"f", pareto2()},
             {"y", json{{"family", "uniform"}, {"lo", 0}, {"hi", 1}}},
             {"dependence", json{{"kind", "fgm"}, {"theta", 0.5}}},
             {"classes", json::array({"D", "PD", "Mstar", "K"})}};
    RunResult r = run_command("product", cfg, 7, 1);
    CHECK(r.exit_code == 0);
    for (const auto& row : r.report["closures"]) {
        CHECK(row["confirmation"] == "confirmed");
        CHECK(row["theorem_confirmed"] == true);
    }
}

TEST_CASE("matrix: Weibull under D is a not-applicable row; empty matrix is fine") {
    json weib{{"family", "weibull"}, {"tau", 0.5}, {"lambda", 1}};
    json triple{{"op", "product"},
                {"f", weib},
                {"y", json{{"family", "uniform"}, {"lo", 0}, {"hi", 1}}},
                {"dependence", json{{"kind", "independent"}}},
                {"class", "D"}};
    RunResult r = run_command("matrix", json{{"triples", json::array({triple})}}, 1, 1);
    CHECK(r.exit_code == 0);
    REQUIRE(r.report["rows"].size() == 1);
    CHECK(r.report["rows"][0]["confirmation"] == "not-applicable");
    CHECK(r.report["rows"][0]["confirmed_false"] == false);

    RunResult empty = run_command("matrix", json{{"triples", json::array()}}, 1, 1);
    CHECK(empty.exit_code == 0);
    CHECK(empty.report["rows"].empty());
}

TEST_CASE("matrix: a confirmed-false row maps to exit 2") {
    // CommonFactor with a Weibull factor is not in D_2: the joint scale ratio
    // diverges, so the membership claim is refuted outright.
    json weib{{"family", "weibull"}, {"tau", 0.5}, {"lambda", 1}};
    json vec{{"dim", 2},
             {"joint", json{{"kind", "common_factor"},
                            {"R", weib},
                            {"weights", json::array({1, 1})}}}};
    json triple{{"op", "mvec_Dn"},
                {"vector", vec},
                {"x_grid", json{{"lo", 2}, {"hi", 2000}, {"points", 30}}}};
    RunResult r = run_command("matrix", json{{"triples", json::array({triple})}}, 1, 1);
    CHECK(r.exit_code == 2);
    CHECK(r.report["rows"][0]["confirmed_false"] == true);
}

TEST_CASE("byte-identical outputs for identical (config, seed, workers)") {
    json cfg{{"model", json{{"n", 2},
                            {"f", pareto2()},
                            {"y", json{{"family", "uniform"}, {"lo", 0.3}, {"hi", 0.9}}},
                            {"dependence", json{{"kind", "fgm"}, {"theta", 0.5}}}}},
             {"x_grid", json::array({2.0, 5.0, 20.0})},
             {"n_samples", 50000}};
    RunResult a = run_command("risk", cfg, 424242, 2);
    RunResult b = run_command("risk", cfg, 424242, 2);
    CHECK(a.report.dump() == b.report.dump());
    CHECK(a.csv == b.csv);
    RunResult c = run_command("risk", cfg, 424243, 2);
    CHECK(a.csv != c.csv);
}

TEST_CASE("run_files: writes report.json and curves.csv, replays byte-identically") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "heavytail_cli_test";
    fs::create_directories(dir);
    const fs::path cfg_path = dir / "cfg.json";
    {
        std::ofstream out(cfg_path);
        out << json{{"model", pareto2()},
                    {"classes", json::array({"D", "PD", "L"})},
                    {"matuszewska", false}}
                   .dump();
    }
    const fs::path o1 = dir / "a", o2 = dir / "b";
    CHECK(run_files("classify", cfg_path.string(), 11, 1, o1.string()) == 0);
    CHECK(run_files("classify", cfg_path.string(), 11, 1, o2.string()) == 0);
    CHECK(slurp(o1 / "report.json") == slurp(o2 / "report.json"));
    CHECK(slurp(o1 / "curves.csv") == slurp(o2 / "curves.csv"));
    CHECK_THROWS_AS(run_files("classify", (dir / "missing.json").string(), 1, 1, o1.string()),
                    ConfigError);
    {
        std::ofstream out(cfg_path);
        out << "{not json";
    }
    CHECK_THROWS_AS(run_files("classify", cfg_path.string(), 1, 1, o1.string()), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("workers resolution: explicit beats env, env beats default") {
    CHECK(resolve_workers(4) == 4);
    ::setenv("HEAVYTAIL_WORKERS", "3", 1);
    CHECK(resolve_workers(0) == 3);
    CHECK(resolve_workers(2) == 2);
    ::setenv("HEAVYTAIL_WORKERS", "zero", 1);
    CHECK_THROWS_AS(resolve_workers(0), ConfigError);
    ::unsetenv("HEAVYTAIL_WORKERS");
    CHECK(resolve_workers(0) == 1);
    CHECK_THROWS_AS(resolve_workers(-1), ConfigError);
}

TEST_CASE("vector schema: composite joints parse and dims are enforced") {
    json cf{{"dim", 2},
            {"joint", json{{"kind", "common_factor"},
                           {"R", pareto2()},
                           {"weights", json::array({1, 1})}}}};
    json sum{{"dim", 2}, {"joint", json{{"kind", "sum"}, {"a", cf}, {"b", cf}}}};
    CHECK(parse_vector(sum)->kind() == "vector_sum");
    json mism = sum;
    mism["dim"] = 3;
    CHECK_THROWS_AS(parse_vector(mism), ConfigError);
    json stopped{{"dim", 2},
                 {"joint", json{{"kind", "stopped_sum"},
                                {"base", cf},
                                {"stopping", json{{"kind", "poisson"}, {"lambda", 1}, {"n_max", 9}}}}}};
    CHECK(parse_vector(stopped)->kind() == "stopped_sum");
    json heavy = stopped;
    heavy["joint"]["stopping"]["n_max"] = 4;  // truncation error too large
    CHECK_THROWS_AS(parse_vector(heavy), ConfigError);
}
