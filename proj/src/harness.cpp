#include "magsep/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include "magsep/constants.hpp"
#include "magsep/errors.hpp"
#include "magsep/io.hpp"
#include "magsep/units.hpp"

namespace magsep {

namespace {

using nlohmann::json;

std::string sanitize_label(const std::string& label) {
    std::string out;
    out.reserve(label.size());
    for (char c : label) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '_';
        out += ok ? c : '_';
    }
    return out;
}

// Dotted config path -> JSON pointer ("a.b[2].c" -> "/a/b/2/c").
json::json_pointer pointer_from_path(const std::string& path) {
    std::string ptr;
    std::string segment;
    const auto flush = [&]() {
        if (!segment.empty()) {
            ptr += '/';
            ptr += segment;
            segment.clear();
        }
    };
    for (char c : path) {
        if (c == '.') {
            flush();
        } else if (c == '[') {
            flush();
            ptr += '/';
        } else if (c == ']') {
            ptr += segment;
            segment.clear();
        } else {
            segment += c;
        }
    }
    flush();
    if (ptr.empty()) throw ValidationError("empty sweep parameter path");
    return json::json_pointer(ptr);
}

// CLI quantity: bare number = SI, otherwise "value unit".
double parse_cli_quantity(const std::string& text, Dimension dim, const std::string& what) {
    const json parsed = json::parse(text, nullptr, false);
    if (!parsed.is_discarded() && parsed.is_number()) return parsed.get<double>();
    return parse_quantity(text, dim, what);
}

void export_trajectories(const ScenarioConfig& cfg, const Scenario& scenario,
                         const std::filesystem::path& dir, std::ostream& diag) {
    const double interval =
        scenario.max_time() / static_cast<double>(scenario.limits.sample_count);
    for (const Population& pop : cfg.population_list()) {
        const std::vector<SampledCell> cells = sample_population(pop, scenario, cfg.seed);
        const std::uint64_t n_export =
            std::min<std::uint64_t>(cells.size(), cfg.output.trajectory_export_cap);
        for (std::uint64_t i = 0; i < n_export; ++i) {
            char name[64];
            std::snprintf(name, sizeof(name), "_%04llu.csv",
                          static_cast<unsigned long long>(i));
            const std::filesystem::path file =
                dir / (sanitize_label(pop.species.label) + name);
            try {
                const Trajectory traj =
                    simulate_trajectory(cells[i].state, cells[i].species, scenario, interval);
                write_text_atomic(file, trajectory_to_csv(traj));
            } catch (const StiffnessError& e) {
                diag << "warning: trajectory export " << file.string()
                     << ": " << e.what() << "\n";
                write_text_atomic(file, trajectory_to_csv(e.partial(), "integrator_failure"));
            }
        }
    }
}

}  // namespace

int cmd_run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
            unsigned threads, std::ostream& diag) {
    try {
        std::vector<std::string> warnings;
        const ScenarioConfig cfg = load_config_file(config_path, &warnings);
        for (const std::string& w : warnings) diag << "warning: " << w << "\n";

        const std::string digest = config_digest(cfg);
        const Scenario scenario = cfg.scenario();
        const EnsembleStats stats =
            run_ensemble(cfg.population_list(), scenario, cfg.seed, threads, digest);

        std::filesystem::create_directories(out_dir);
        write_text_atomic(out_dir / "stats.json", stats_to_json_text(stats));
        write_text_atomic(out_dir / "capture_by_species.csv", capture_table_csv(stats));
        export_trajectories(cfg, scenario, out_dir / "trajectories", diag);

        if (stats.species.size() >= 2) {
            const SeparationSummary summary = compare_species(stats);
            diag << "separation: " << summary.target_label << " capture "
                 << summary.target_fraction << ", " << summary.reference_label << " capture "
                 << summary.reference_fraction << ", gap " << summary.capture_gap
                 << ", outlet purity " << summary.outlet_purity << "\n";
        }
        return kExitOk;
    } catch (const ValidationError& e) {
        diag << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int cmd_sweep(const std::filesystem::path& config_path, const SweepSpec& spec,
              const std::filesystem::path& out_dir, unsigned threads, std::ostream& diag) {
    try {
        if (spec.values.empty()) throw ValidationError("sweep requires at least one value");

        std::ifstream in(config_path);
        if (!in) throw ValidationError("cannot open config file: " + config_path.string());
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ValidationError("config is not valid JSON: " + std::string(e.what()));
        }

        const json::json_pointer pointer = pointer_from_path(spec.parameter_path);
        if (!doc.contains(pointer))
            throw ValidationError("sweep parameter path does not resolve: " +
                                  spec.parameter_path);

        std::string csv = "value,species,capture_fraction,ci_low,ci_high\n";
        json records = json::array();

        for (const std::string& value_text : spec.values) {
            json point = doc;
            const json value_parsed = json::parse(value_text, nullptr, false);
            if (!value_parsed.is_discarded() && value_parsed.is_number())
                point[pointer] = value_parsed;
            else
                point[pointer] = value_text;

            std::vector<std::string> warnings;
            ScenarioConfig cfg = load_config(point, &warnings);
            for (const std::string& w : warnings) diag << "warning: " << w << "\n";
            if (spec.per_point_count)
                for (PopulationSpec& pop : cfg.populations) pop.count = *spec.per_point_count;

            // Report the unit-normalized value: read it back from the
            // canonical form when the path survives normalization.
            double si_value = 0.0;
            const json canonical = save_config(cfg);
            if (canonical.contains(pointer) && canonical.at(pointer).is_number()) {
                si_value = canonical.at(pointer).get<double>();
            } else if (!value_parsed.is_discarded() && value_parsed.is_number()) {
                si_value = value_parsed.get<double>();
            } else {
                char* end = nullptr;
                si_value = std::strtod(value_text.c_str(), &end);
            }

            const EnsembleStats stats = run_ensemble(cfg.population_list(), cfg.scenario(),
                                                     cfg.seed, threads, config_digest(cfg));
            for (const SpeciesStats& s : stats.species) {
                csv += format_double(si_value);
                csv += ',';
                csv += s.label;
                csv += ',';
                csv += format_double(s.capture_fraction);
                csv += ',';
                csv += format_double(s.ci.low);
                csv += ',';
                csv += format_double(s.ci.high);
                csv += '\n';
            }
            records.push_back({{"value", si_value}, {"stats", stats_to_json(stats)}});
        }

        std::filesystem::create_directories(out_dir);
        write_text_atomic(out_dir / "sweep.csv", csv);
        write_text_atomic(out_dir / "sweep_stats.json", records.dump(2) + "\n");
        return kExitOk;
    } catch (const ValidationError& e) {
        diag << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

CalibrationResult calibrate_flow_rate(double target, double tolerance, double q_lo,
                                      double q_hi, const CaptureEvaluator& evaluator) {
    if (!(target > 0.0 && target < 1.0))
        throw ValidationError("calibration target must lie in (0, 1)");
    if (!(tolerance > 0.0)) throw ValidationError("calibration tolerance must be positive");
    if (!(q_lo > 0.0) || !(q_hi > q_lo))
        throw ValidationError("calibration bracket must satisfy 0 < lo < hi");

    CalibrationResult result;
    const CaptureEstimate lo_est = evaluator(q_lo);
    ++result.evaluations;
    if (std::abs(lo_est.fraction - target) <= tolerance) {
        result.flow_rate = q_lo;
        result.estimate = lo_est;
        return result;
    }
    const CaptureEstimate hi_est = evaluator(q_hi);
    ++result.evaluations;
    if (std::abs(hi_est.fraction - target) <= tolerance) {
        result.flow_rate = q_hi;
        result.estimate = hi_est;
        return result;
    }
    // Capture decreases with flow rate; the bracket must straddle the
    // target within the confidence intervals.
    if (!(lo_est.ci.high >= target && target >= hi_est.ci.low))
        throw InfeasibleError("calibration infeasible: bracket does not straddle the target");

    double lo = q_lo;
    double hi = q_hi;
    const double width_floor = 0.01 * q_lo;
    for (int iteration = 0; iteration < 64; ++iteration) {
        const double mid = 0.5 * (lo + hi);
        const CaptureEstimate est = evaluator(mid);
        ++result.evaluations;
        result.flow_rate = mid;
        result.estimate = est;
        if (std::abs(est.fraction - target) <= tolerance) return result;
        if (est.fraction > target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < width_floor) {
            result.flow_rate = 0.5 * (lo + hi);
            return result;
        }
    }
    return result;
}

int cmd_calibrate(const std::filesystem::path& config_path, double target, double tolerance,
                  const std::string& bracket_lo, const std::string& bracket_hi,
                  const std::optional<std::string>& species_label,
                  std::optional<std::uint64_t> count_override, unsigned threads,
                  std::ostream& out, std::ostream& diag) {
    try {
        std::vector<std::string> warnings;
        ScenarioConfig cfg = load_config_file(config_path, &warnings);
        for (const std::string& w : warnings) diag << "warning: " << w << "\n";
        if (count_override)
            for (PopulationSpec& pop : cfg.populations) pop.count = *count_override;

        std::string label;
        if (species_label) {
            label = *species_label;
        } else if (!cfg.populations.empty()) {
            label = cfg.populations.front().species_label;
        } else {
            throw ValidationError("calibration needs a population or an explicit species");
        }
        cfg.species_by_label(label);  // existence check

        const double q_lo = parse_cli_quantity(bracket_lo, Dimension::FlowRate, "bracket_lo");
        const double q_hi = parse_cli_quantity(bracket_hi, Dimension::FlowRate, "bracket_hi");

        const CaptureEvaluator evaluator = [&](double flow_rate) {
            ScenarioConfig point = cfg;
            point.fluid.flow_rate = flow_rate;
            const EnsembleStats stats = run_ensemble(
                point.population_list(), point.scenario(), point.seed, threads);
            const SpeciesStats* s = stats.find(label);
            if (!s || s->n_total == 0)
                throw ValidationError("no cells of species '" + label + "' in the ensemble");
            return CaptureEstimate{s->capture_fraction, s->ci};
        };

        const CalibrationResult result =
            calibrate_flow_rate(target, tolerance, q_lo, q_hi, evaluator);

        json report = {{"flow_rate", result.flow_rate},
                       {"capture_fraction", result.estimate.fraction},
                       {"ci_low", result.estimate.ci.low},
                       {"ci_high", result.estimate.ci.high},
                       {"evaluations", result.evaluations},
                       {"species", label},
                       {"target", target}};
        out << report.dump(2) << "\n";
        return kExitOk;
    } catch (const ValidationError& e) {
        diag << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int cmd_fieldmap(const std::filesystem::path& config_path,
                 const std::filesystem::path& out_file, std::size_t n_r, std::size_t n_phi,
                 std::ostream& diag) {
    try {
        if (n_r < 2 || n_phi < 1) throw ValidationError("fieldmap grid must be at least 2x1");
        std::vector<std::string> warnings;
        const ScenarioConfig cfg = load_config_file(config_path, &warnings);
        for (const std::string& w : warnings) diag << "warning: " << w << "\n";

        const CellSpecies& species = cfg.species.front();
        WireKernelParams params;
        params.half_width = cfg.wires.half_width;
        params.aspect_factor = cfg.wires.aspect_factor;
        params.external_field = cfg.field.external_field();
        params.contrast = effective_contrast(cfg.wires.material, params.external_field);

        const double r_lo = 1.05 * params.half_width;
        const double r_hi = 10.0 * params.half_width;
        std::string csv = "r,phi,F_r,F_phi\n";
        for (std::size_t i = 0; i < n_r; ++i) {
            const double r = r_lo + (r_hi - r_lo) * static_cast<double>(i) /
                                        static_cast<double>(n_r - 1);
            for (std::size_t j = 0; j < n_phi; ++j) {
                const double phi = kTwoPi * static_cast<double>(j) / static_cast<double>(n_phi);
                const auto force = wire_force_polar(WirePolar::normalized(r, phi),
                                                    species.magnetics, params);
                if (!force) continue;  // r <= a never happens on this grid
                csv += format_double(r);
                csv += ',';
                csv += format_double(phi);
                csv += ',';
                csv += format_double(force->radial);
                csv += ',';
                csv += format_double(force->azimuthal);
                csv += '\n';
            }
        }
        write_text_atomic(out_file, csv);
        return kExitOk;
    } catch (const ValidationError& e) {
        diag << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

unsigned default_threads_from_env() {
    const char* value = std::getenv("MAGSEP_THREADS");
    if (!value) return 0;
    char* end = nullptr;
    const unsigned long parsed = std::strtoul(value, &end, 10);
    if (end == value || *end != '\0') return 0;
    return static_cast<unsigned>(parsed);
}

}  // namespace magsep
