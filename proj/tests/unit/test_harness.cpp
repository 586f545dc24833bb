#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "magsep/errors.hpp"
#include "magsep/harness.hpp"
#include "magsep/magnetics.hpp"
#include "magsep/units.hpp"
#include "support/fixtures.hpp"

using namespace magsep;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "magsep_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Default scenario shrunk for fast end-to-end runs.
fs::path small_config_file(const fs::path& dir, int rbc = 12, int wbc = 12,
                           int trajectory_cap = 3) {
    std::ifstream in(testing::default_config_path());
    json doc = json::parse(in);
    doc["populations"][0]["count"] = rbc;
    doc["populations"][1]["count"] = wbc;
    doc["output"]["trajectory_export_cap"] = trajectory_cap;
    const fs::path path = dir / "config.json";
    std::ofstream out(path);
    out << doc.dump(2);
    return path;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

}  // namespace

TEST_CASE("run command writes the declared outputs") {
    const fs::path dir = fresh_dir("run_ok");
    const fs::path config = small_config_file(dir);
    const fs::path out = dir / "out";

    std::ostringstream diag;
    const int code = cmd_run(config, out, 2, diag);
    CAPTURE(diag.str());
    REQUIRE(code == kExitOk);

    REQUIRE(fs::exists(out / "stats.json"));
    REQUIRE(fs::exists(out / "capture_by_species.csv"));
    const json stats = json::parse(read_file(out / "stats.json"));
    CHECK(stats.at("schema") == "magsep-stats-1");
    CHECK(stats.at("species").size() == 2);
    CHECK(stats.at("scenario_digest").get<std::string>().size() == 16);

    // Trajectory export honors the cap.
    std::size_t csv_count = 0;
    for (const auto& entry : fs::directory_iterator(out / "trajectories")) {
        ++csv_count;
        const std::string text = read_file(entry.path());
        CHECK(text.rfind("t,x,y,z,outcome\n", 0) == 0);
    }
    CHECK(csv_count == 6);  // 3 per species

    const std::string table = read_file(out / "capture_by_species.csv");
    CHECK(table.rfind("species,capture_fraction,ci_low,ci_high\n", 0) == 0);
    CHECK(count_lines(table) == 3);
}

TEST_CASE("run command is deterministic across runs and worker counts") {
    const fs::path dir = fresh_dir("run_det");
    const fs::path config = small_config_file(dir, 20, 20);

    std::ostringstream diag;
    REQUIRE(cmd_run(config, dir / "a", 1, diag) == kExitOk);
    REQUIRE(cmd_run(config, dir / "b", 4, diag) == kExitOk);
    CHECK(read_file(dir / "a" / "stats.json") == read_file(dir / "b" / "stats.json"));
    CHECK(read_file(dir / "a" / "capture_by_species.csv") ==
          read_file(dir / "b" / "capture_by_species.csv"));
}

TEST_CASE("run command exit codes") {
    const fs::path dir = fresh_dir("run_err");

    SUBCASE("corrupt config: validation exit, no outputs") {
        const fs::path config = dir / "bad.json";
        std::ofstream(config) << "{ not json";
        std::ostringstream diag;
        CHECK(cmd_run(config, dir / "out", 1, diag) == kExitValidation);
        CHECK_FALSE(fs::exists(dir / "out"));
        CHECK(diag.str().find("error:") != std::string::npos);
    }
    SUBCASE("missing config file") {
        std::ostringstream diag;
        CHECK(cmd_run(dir / "nonexistent.json", dir / "out", 1, diag) == kExitValidation);
    }
    SUBCASE("unwritable output directory: runtime exit") {
        const fs::path config = small_config_file(dir, 2, 2);
        const fs::path blocker = dir / "blocker";
        std::ofstream(blocker) << "file";
        std::ostringstream diag;
        CHECK(cmd_run(config, blocker / "out", 1, diag) == kExitRuntime);
    }
}

TEST_CASE("sweep command") {
    const fs::path dir = fresh_dir("sweep");
    const fs::path config = small_config_file(dir, 15, 15);

    SUBCASE("single value matches a plain run") {
        std::ostringstream diag;
        REQUIRE(cmd_sweep(config, {"fluid.flow_rate", {"0.5 ml/h"}, std::nullopt},
                          dir / "sweep1", 2, diag) == kExitOk);
        REQUIRE(cmd_run(config, dir / "run1", 2, diag) == kExitOk);
        const json sweep_stats = json::parse(read_file(dir / "sweep1" / "sweep_stats.json"));
        const json run_stats = json::parse(read_file(dir / "run1" / "stats.json"));
        REQUIRE(sweep_stats.size() == 1);
        CHECK(sweep_stats[0]["stats"]["species"] == run_stats["species"]);
    }

    SUBCASE("rows are tagged with normalized values in input order") {
        std::ostringstream diag;
        REQUIRE(cmd_sweep(config,
                          {"fluid.flow_rate", {"0.7 ml/h", "0.5 ml/h"},
                           std::optional<std::uint64_t>(5)},
                          dir / "sweep2", 2, diag) == kExitOk);
        const std::string csv = read_file(dir / "sweep2" / "sweep.csv");
        std::istringstream lines(csv);
        std::string header, first;
        std::getline(lines, header);
        CHECK(header == "value,species,capture_fraction,ci_low,ci_high");
        std::getline(lines, first);
        const double first_value = std::strtod(first.c_str(), nullptr);
        CHECK(first_value == doctest::Approx(1.9444444e-10).epsilon(1e-6));
        CHECK(count_lines(csv) == 1 + 2 * 2);  // header + 2 species x 2 values
    }

    SUBCASE("unresolvable parameter path") {
        std::ostringstream diag;
        CHECK(cmd_sweep(config, {"fluid.flowrate", {"1e-10"}, std::nullopt}, dir / "sweep3",
                        1, diag) == kExitValidation);
        CHECK(diag.str().find("does not resolve") != std::string::npos);
    }
}

TEST_CASE("flow-rate calibration against a synthetic monotone response") {
    // Analytic capture curve: smooth, strictly decreasing in Q.
    const double q_half = 2e-10;
    const auto fraction_at = [&](double q) { return 1.0 / (1.0 + std::pow(q / q_half, 3.0)); };
    const CaptureEvaluator evaluator = [&](double q) {
        const double f = fraction_at(q);
        return CaptureEstimate{f, {f - 0.01, f + 0.01}};
    };

    SUBCASE("recovers a known crossing") {
        const double target = 0.3;
        // Dense-sweep oracle for the crossing location.
        double crossing = 0.0;
        for (int i = 0; i < 20000; ++i) {
            const double q = 1e-10 + (1e-9 - 1e-10) * i / 19999.0;
            if (fraction_at(q) <= target) {
                crossing = q;
                break;
            }
        }
        REQUIRE(crossing > 0.0);
        const CalibrationResult result =
            calibrate_flow_rate(target, 1e-4, 1e-10, 1e-9, evaluator);
        CHECK(result.flow_rate >= 1e-10);
        CHECK(result.flow_rate <= 1e-9);
        CHECK(std::abs(result.estimate.fraction - target) <= 1e-4);
        CHECK(result.flow_rate == doctest::Approx(crossing).epsilon(1e-2));
    }

    SUBCASE("target at the lower bracket edge returns the edge") {
        const double target = fraction_at(1e-10);
        const CalibrationResult result =
            calibrate_flow_rate(target, 1e-6, 1e-10, 1e-9, evaluator);
        CHECK(result.flow_rate == 1e-10);
    }

    SUBCASE("bracket that does not straddle the target is infeasible") {
        CHECK_THROWS_AS(calibrate_flow_rate(0.99999, 1e-4, 3e-10, 1e-9, evaluator),
                        InfeasibleError);
    }

    SUBCASE("result stays inside the bracket for assorted targets") {
        for (double target : {0.8, 0.6, 0.45, 0.2, 0.05}) {
            const CalibrationResult result =
                calibrate_flow_rate(target, 1e-3, 1.2e-10, 9e-10, evaluator);
            CHECK(result.flow_rate >= 1.2e-10);
            CHECK(result.flow_rate <= 9e-10);
        }
    }

    SUBCASE("invalid parameters") {
        CHECK_THROWS_AS(calibrate_flow_rate(1.5, 1e-3, 1e-10, 1e-9, evaluator),
                        ValidationError);
        CHECK_THROWS_AS(calibrate_flow_rate(0.5, 1e-3, 1e-9, 1e-10, evaluator),
                        ValidationError);
    }
}

TEST_CASE("calibrate command runs end to end") {
    const fs::path dir = fresh_dir("calibrate");
    const fs::path config = small_config_file(dir, 40, 0);

    std::ostringstream out, diag;
    const int code = cmd_calibrate(config, 0.5, 0.08, "0.1 ml/h", "2.0 ml/h", std::nullopt,
                                   std::optional<std::uint64_t>(40), 2, out, diag);
    CAPTURE(diag.str());
    REQUIRE(code == kExitOk);
    const json report = json::parse(out.str());
    CHECK(report.at("species") == "RBC-deoxy");
    const double flow = report.at("flow_rate").get<double>();
    CHECK(flow >= parse_quantity("0.1 ml/h", Dimension::FlowRate));
    CHECK(flow <= parse_quantity("2.0 ml/h", Dimension::FlowRate));

    SUBCASE("unreachable target is infeasible at runtime") {
        std::ostringstream out2, diag2;
        const int infeasible =
            cmd_calibrate(config, 0.99999, 0.0001, "1.9 ml/h", "2.0 ml/h", std::nullopt,
                          std::optional<std::uint64_t>(20), 2, out2, diag2);
        CHECK(infeasible == kExitRuntime);
        CHECK(diag2.str().find("infeasible") != std::string::npos);
    }
}

TEST_CASE("fieldmap export matches the polar kernel") {
    const fs::path dir = fresh_dir("fieldmap");
    const fs::path config = small_config_file(dir);
    const fs::path out_file = dir / "map.csv";

    std::ostringstream diag;
    REQUIRE(cmd_fieldmap(config, out_file, 4, 8, diag) == kExitOk);
    const std::string csv = read_file(out_file);
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "r,phi,F_r,F_phi");

    const ScenarioConfig cfg = testing::default_config();
    WireKernelParams params;
    params.half_width = cfg.wires.half_width;
    params.aspect_factor = cfg.wires.aspect_factor;
    params.external_field = cfg.field.external_field();
    params.contrast = effective_contrast(cfg.wires.material, params.external_field);

    std::size_t rows = 0;
    std::string line;
    while (std::getline(lines, line)) {
        ++rows;
        double r = 0.0, phi = 0.0, f_r = 0.0, f_phi = 0.0;
        REQUIRE(std::sscanf(line.c_str(), "%lg,%lg,%lg,%lg", &r, &phi, &f_r, &f_phi) == 4);
        const auto f = wire_force_polar(WirePolar::normalized(r, phi),
                                        cfg.species.front().magnetics, params);
        REQUIRE(f);
        CHECK(f_r == doctest::Approx(f->radial).epsilon(1e-9));
        CHECK(f_phi == doctest::Approx(f->azimuthal).epsilon(1e-9));
    }
    CHECK(rows == 4 * 8);
}

TEST_CASE("threads environment variable") {
    // Only exercises the parser; the variable is unset in the test runner.
    CHECK(default_threads_from_env() == 0);
}
