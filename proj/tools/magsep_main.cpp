#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "magsep/harness.hpp"

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        while (!item.empty() && item.front() == ' ') item.erase(item.begin());
        while (!item.empty() && item.back() == ' ') item.pop_back();
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"magsep: magnetophoretic cell capture simulator"};
    app.require_subcommand(1);

    unsigned threads = magsep::default_threads_from_env();
    app.add_option("--threads", threads,
                   "worker threads (0 = hardware default; env MAGSEP_THREADS)");

    std::string config_path;
    std::string out_dir;
    auto* run = app.add_subcommand("run", "run the configured ensemble once");
    run->add_option("config", config_path, "scenario config JSON")->required();
    run->add_option("--out", out_dir, "output directory")->required();

    std::string sweep_config;
    std::string sweep_param;
    std::string sweep_values;
    std::string sweep_out;
    std::uint64_t sweep_count = 0;
    auto* sweep = app.add_subcommand("sweep", "run one ensemble per parameter value");
    sweep->add_option("config", sweep_config, "scenario config JSON")->required();
    sweep->add_option("--param", sweep_param, "dotted config path, e.g. fluid.flow_rate")
        ->required();
    sweep->add_option("--values", sweep_values,
                      "comma-separated values; units allowed (\"0.5 ml/h,0.7 ml/h\")")
        ->required();
    sweep->add_option("--out", sweep_out, "output directory")->required();
    sweep->add_option("--count", sweep_count, "override population counts per point");

    std::string cal_config;
    double cal_target = 0.0;
    double cal_tolerance = 0.02;
    std::string cal_bracket;
    std::string cal_species;
    std::uint64_t cal_count = 0;
    auto* calibrate =
        app.add_subcommand("calibrate", "find the flow rate hitting a target capture fraction");
    calibrate->add_option("config", cal_config, "scenario config JSON")->required();
    calibrate->add_option("--target", cal_target, "target capture fraction in (0,1)")
        ->required();
    calibrate->add_option("--bracket", cal_bracket, "lo,hi flow rates (units allowed)")
        ->required();
    calibrate->add_option("--tolerance", cal_tolerance, "acceptable |estimate - target|");
    calibrate->add_option("--species", cal_species, "species label (default: first population)");
    calibrate->add_option("--count", cal_count, "override population counts per evaluation");

    std::string map_config;
    std::string map_out;
    std::size_t map_nr = 32;
    std::size_t map_nphi = 64;
    auto* fieldmap = app.add_subcommand("fieldmap", "export the single-wire force kernel grid");
    fieldmap->add_option("config", map_config, "scenario config JSON")->required();
    fieldmap->add_option("--out", map_out, "output CSV file")->required();
    fieldmap->add_option("--nr", map_nr, "radial grid points");
    fieldmap->add_option("--nphi", map_nphi, "angular grid points");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? magsep::kExitOk : magsep::kExitValidation;
    }

    if (run->parsed())
        return magsep::cmd_run(config_path, out_dir, threads, std::cerr);
    if (sweep->parsed()) {
        magsep::SweepSpec spec;
        spec.parameter_path = sweep_param;
        spec.values = split_list(sweep_values);
        if (sweep_count > 0) spec.per_point_count = sweep_count;
        return magsep::cmd_sweep(sweep_config, spec, sweep_out, threads, std::cerr);
    }
    if (calibrate->parsed()) {
        const std::vector<std::string> bracket = split_list(cal_bracket);
        if (bracket.size() != 2) {
            std::cerr << "error: --bracket expects \"lo,hi\"\n";
            return magsep::kExitValidation;
        }
        return magsep::cmd_calibrate(cal_config, cal_target, cal_tolerance, bracket[0],
                                     bracket[1],
                                     cal_species.empty()
                                         ? std::nullopt
                                         : std::optional<std::string>(cal_species),
                                     cal_count > 0 ? std::optional<std::uint64_t>(cal_count)
                                                   : std::nullopt,
                                     threads, std::cout, std::cerr);
    }
    if (fieldmap->parsed())
        return magsep::cmd_fieldmap(map_config, map_out, map_nr, map_nphi, std::cerr);

    return magsep::kExitValidation;
}
