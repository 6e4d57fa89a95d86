#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "json.hpp"
#include "schema_check.hpp"

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run(const std::string& args) {
    std::string cmd = std::string(CONJ1D_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    int status = pclose(pipe);
    r.exit_code = WEXITSTATUS(status);
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("fixed-points: fold pair report") {
    RunResult r = run("fixed-points --map \"x+0.25-x^2\" --domain -1.5,0.45");
    CHECK(r.exit_code == 0);
    nlohmann::json j = nlohmann::json::parse(r.out);
    schema::check_fixed_point_report(j);
    REQUIRE(j["fixed_points"].size() == 1);
    CHECK(j["fixed_points"][0]["kind"] == "transverse");
    CHECK(j["fixed_points"][0]["left"] == "repelling");
}

TEST_CASE("fixed-points: mixed point and period-2 orbit reports") {
    RunResult mixed = run("fixed-points --map \"x+x^2\" --domain -0.45,1");
    CHECK(mixed.exit_code == 0);
    nlohmann::json j = nlohmann::json::parse(mixed.out);
    schema::check_fixed_point_report(j);
    REQUIRE(j["fixed_points"].size() == 1);
    CHECK(j["fixed_points"][0]["kind"] == "mixed");

    RunResult flip = run("fixed-points --map \"-1.04*x+x^3\" --domain -0.5,0.5");
    CHECK(flip.exit_code == 0);
    nlohmann::json k = nlohmann::json::parse(flip.out);
    schema::check_fixed_point_report(k);
    REQUIRE(k["period2"].size() == 1);
    CHECK(k["period2"][0]["stability"] == "attracting");
}

TEST_CASE("fixed-points: non-monotone map and parse errors exit 1") {
    CHECK(run("fixed-points --map \"x^2\" --domain -1,1").exit_code == 1);
    CHECK(run("fixed-points --map \"x*(1\" --domain -1,1").exit_code == 1);
    CHECK(run("fixed-points --map \"x/2\" --domain 1,-1").exit_code == 1);
    CHECK(run("fixed-points --map \"x/2\"").exit_code == 1);  // missing --domain
}

TEST_CASE("fixed-points: detection failure exits 2") {
    // two roots hide inside one default-grid cell
    RunResult r = run("fixed-points --map \"x + 0.1*(x-0.00017)*(x-0.00047)\" --domain -1,1");
    CHECK(r.exit_code == 2);
    RunResult fine = run(
        "fixed-points --map \"x + 0.1*(x-0.00017)*(x-0.00047)\" --domain -1,1 --grid 65536");
    CHECK(fine.exit_code == 0);
    nlohmann::json j = nlohmann::json::parse(fine.out);
    CHECK(j["fixed_points"].size() == 2);
}

TEST_CASE("conjugacy build: linear pair CSV and metadata") {
    RunResult r = run(
        "conjugacy build --f \"x/2\" --g \"x/3\" --domain-f 0,1 --domain-g 0,1 "
        "--anchor-a 1 --anchor-b 1 --samples 101 --meta cli_meta.json");
    CHECK(r.exit_code == 0);
    CHECK(r.out.rfind("x,h\n", 0) == 0);
    CHECK(r.out.find("\n1,1\n") != std::string::npos);  // h(1) = 1
    CHECK(r.out.find("\n0,0\n") != std::string::npos);  // h(0) = 0

    nlohmann::json meta = nlohmann::json::parse(slurp("cli_meta.json"));
    schema::check_build_metadata(meta);
    CHECK(meta["segments"] == 1);
    std::remove("cli_meta.json");
}

TEST_CASE("conjugacy build: flip pair and SVG output") {
    RunResult r = run(
        "conjugacy build --f \"-1.04*x+x^3\" --g \"-1.09*x+x^3\" "
        "--domain-f -0.5,0.5 --domain-g -0.5,0.5 --flip --samples 101 --svg cli_plot.svg "
        "--out cli_h.csv");
    CHECK(r.exit_code == 0);
    std::string svg = slurp("cli_plot.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK(svg.find("circle") != std::string::npos);
    std::string csv = slurp("cli_h.csv");
    CHECK(csv.rfind("x,h\n", 0) == 0);
    std::remove("cli_plot.svg");
    std::remove("cli_h.csv");
}

TEST_CASE("conjugacy build: signature mismatch exits 2") {
    RunResult r = run("conjugacy build --f \"x/2\" --g \"2*x\" --domain-f -1,1 --domain-g -1,1");
    CHECK(r.exit_code == 2);
}

TEST_CASE("conjugacy verify: pass, unreachable tolerance, over-exclusion") {
    std::string pair =
        "--f \"x/2\" --g \"x/3\" --domain-f 0,1 --domain-g 0,1 --anchor-a 1 --anchor-b 1";
    RunResult ok = run("conjugacy verify " + pair + " --tol 1e-9");
    CHECK(ok.exit_code == 0);
    nlohmann::json j = nlohmann::json::parse(ok.out);
    schema::check_residual_report(j);
    CHECK(j["pass"] == true);

    CHECK(run("conjugacy verify " + pair + " --tol 0").exit_code == 3);
    CHECK(run("conjugacy verify " + pair + " --exclusion 2").exit_code == 1);
}

TEST_CASE("bifurcation classify: canonical families") {
    RunResult fold = run(
        "bifurcation classify --family \"x+mu-x^2\" --x-window -0.75,0.75 "
        "--mu-window -0.1,0.1");
    CHECK(fold.exit_code == 0);
    nlohmann::json j = nlohmann::json::parse(fold.out);
    schema::check_bifurcation_report(j);
    CHECK(j["type"] == "fold");
    CHECK(j["sigma"] == 1);

    RunResult flip = run(
        "bifurcation classify --family \"-x-mu*x+x^3\" --x-window -0.5,0.5 "
        "--mu-window -0.1,0.1");
    CHECK(flip.exit_code == 0);
    nlohmann::json k = nlohmann::json::parse(flip.out);
    schema::check_bifurcation_report(k);
    CHECK(k["type"] == "flip");
}

TEST_CASE("bifurcation classify: unclassified exits 2 with the observed pattern") {
    RunResult r = run(
        "bifurcation classify --family \"x+x^2*(x^2-0.04)\" --x-window -0.4,0.4 "
        "--mu-window -0.05,0.05");
    CHECK(r.exit_code == 2);
    nlohmann::json j = nlohmann::json::parse(r.out);
    CHECK(j["type"] == "unclassified");
    CHECK(j.contains("observed"));
}

TEST_CASE("bifurcation conjugate: fold fiber with verify footer") {
    RunResult r = run(
        "bifurcation conjugate --family \"x+mu-x^2+0.1*x^3\" --mu 0.04 "
        "--x-window -0.45,0.45 --mu-window -0.05,0.05 --samples 101 --out cli_fiber.csv");
    CHECK(r.exit_code == 0);
    std::string csv = slurp("cli_fiber.csv");
    CHECK(csv.rfind("x,h\n", 0) == 0);
    std::remove("cli_fiber.csv");

    // explicit normal-form selection skips auto-classification
    RunResult e = run(
        "bifurcation conjugate --family \"x+mu-x^2+0.1*x^3\" --mu 0.04 "
        "--x-window -0.45,0.45 --mu-window -0.05,0.05 --normal-form fold --samples 51 "
        "--out cli_fiber2.csv");
    CHECK(e.exit_code == 0);
    std::remove("cli_fiber2.csv");

    CHECK(run("bifurcation conjugate --family \"x+mu-x^2\" --mu 0.04 --normal-form banana")
              .exit_code == 1);
}

TEST_CASE("help exits 0 and advertises defaults") {
    CHECK(run("--help").exit_code == 0);
    RunResult b = run("conjugacy build --help");
    CHECK(b.exit_code == 0);
    CHECK(b.out.find("1001") != std::string::npos);  // default sample count
    RunResult fp = run("fixed-points --help");
    CHECK(fp.out.find("4096") != std::string::npos);  // default grid
    CHECK(fp.out.find("1e-07") != std::string::npos);  // default touch tolerance
}
