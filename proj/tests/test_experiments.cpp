#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dbec/config.hpp"
#include "dbec/errors.hpp"
#include "dbec/experiments.hpp"
#include "dbec/functionals.hpp"
#include "dbec/grid.hpp"

using namespace dbec;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(bool(in));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("sigma norm and phase-orbit distance") {
    auto g = make_grid({32, 32, 32}, {8, 8, 8});
    WaveField u = gaussian_field(g, {1, 1, 1}, 1.0);
    // ||u||^2 = 1, A = 1.5, D = 1.5 for the unit-mass width-1 Gaussian.
    CHECK(sigma_norm_sq(u) == doctest::Approx(4.0).epsilon(1e-6));

    // Distance to the own phase orbit vanishes for any global phase.
    WaveField v = u;
    const cplx ph = std::exp(cplx(0.0, 1.234));
    for (auto& z : v.data) z *= ph;
    CHECK(orbit_distance_sigma(v, u) <= 1e-6);

    // Scaling the amplitude by 1+e moves the orbit distance to e*||u||_Sigma.
    WaveField w = u;
    for (auto& z : w.data) z *= 1.01;
    CHECK(orbit_distance_sigma(w, u) == doctest::Approx(0.02).epsilon(1e-3));
}

TEST_CASE("regime sweep partitions the coupling plane") {
    RunConfig cfg;
    cfg.sweep_resolution = 9;
    ExperimentReport rep = run_experiment("regime-sweep", cfg);
    CHECK(rep.scenario == "regime-sweep");
    CHECK(rep.passed());

    // The grid CSV has a header plus res^2 rows.
    REQUIRE(rep.extra_files.size() == 1);
    CHECK(rep.extra_files[0].first == "region.csv");
    const std::string& csv = rep.extra_files[0].second;
    long rows = std::count(csv.begin(), csv.end(), '\n');
    CHECK(rows == 9 * 9 + 1);
    CHECK(csv.rfind("lambda1,lambda2,regime,margin\n", 0) == 0);

    // Boundary polyline: one point per lambda2 sample, V-shaped in lambda1.
    long boundary_pts = 0;
    for (const auto& s : rep.series)
        if (s.series == "boundary") {
            ++boundary_pts;
            CHECK(s.y >= -1e-12);  // the cone boundary stays at lambda1 >= 0
        }
    CHECK(boundary_pts == 9);
}

TEST_CASE("unknown experiment name is a config error") {
    RunConfig cfg;
    CHECK_THROWS_AS(run_experiment("does-not-exist", cfg), ConfigError);
}

TEST_CASE("write_report emits report, series and config echo") {
    RunConfig cfg;
    cfg.sweep_resolution = 5;
    ExperimentReport rep = run_experiment("regime-sweep", cfg);

    const fs::path dir =
        fs::temp_directory_path() / "dbec_test_report";
    fs::remove_all(dir);
    write_report(rep, dir.string());

    CHECK(fs::exists(dir / "report.json"));
    CHECK(fs::exists(dir / "series.csv"));
    CHECK(fs::exists(dir / "config.txt"));
    CHECK(fs::exists(dir / "region.csv"));
    CHECK(rep.artifacts.size() >= 4);

    const std::string json = slurp(dir / "report.json");
    CHECK(json.find("\"scenario\"") != std::string::npos);
    CHECK(json.find("\"passed\"") != std::string::npos);
    CHECK(json.find("\"checks\"") != std::string::npos);

    const std::string series = slurp(dir / "series.csv");
    CHECK(series.rfind("scenario,series,x,y\n", 0) == 0);

    // The config echo parses back to the configuration that was run.
    RunConfig back = parse_config(/*path=*/(dir / "config.txt").string());
    CHECK(back.sweep_resolution == 5);

    fs::remove_all(dir);
}
