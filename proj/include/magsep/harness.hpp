#ifndef MAGSEP_HARNESS_HPP
#define MAGSEP_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "magsep/ensemble.hpp"
#include "magsep/scenario.hpp"

namespace magsep {

// Exit-code contract shared by all commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

// Run the configured ensemble and write stats.json, capture_by_species.csv
// and capped per-species trajectory CSVs under `out_dir`.
int cmd_run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
            unsigned threads, std::ostream& diag);

// A parameter sweep: dotted path into the config document
// (e.g. "fluid.flow_rate"), one ensemble per value. Values may carry units.
struct SweepSpec {
    std::string parameter_path;
    std::vector<std::string> values;
    std::optional<std::uint64_t> per_point_count;  // overrides population counts
};

// Emits sweep.csv (value,species,capture_fraction,ci_low,ci_high; rows in
// input order, values unit-normalized) and sweep_stats.json.
int cmd_sweep(const std::filesystem::path& config_path, const SweepSpec& spec,
              const std::filesystem::path& out_dir, unsigned threads, std::ostream& diag);

struct CaptureEstimate {
    double fraction = 0.0;
    WilsonInterval ci;
};

using CaptureEvaluator = std::function<CaptureEstimate(double flow_rate)>;

struct CalibrationResult {
    double flow_rate = 0.0;  // m^3/s
    CaptureEstimate estimate;
    int evaluations = 0;
};

// Bisection on the flow rate against a monotonically non-increasing capture
// fraction. The bracket must straddle the target within the evaluator's
// confidence intervals; throws InfeasibleError otherwise. Stops when the
// estimate is within `tolerance` of the target or the bracket width drops
// below 1% of the lower bracket edge. The result lies inside [q_lo, q_hi].
CalibrationResult calibrate_flow_rate(double target, double tolerance, double q_lo,
                                      double q_hi, const CaptureEvaluator& evaluator);

int cmd_calibrate(const std::filesystem::path& config_path, double target, double tolerance,
                  const std::string& bracket_lo, const std::string& bracket_hi,
                  const std::optional<std::string>& species_label,
                  std::optional<std::uint64_t> count_override, unsigned threads,
                  std::ostream& out, std::ostream& diag);

// Debug export of the single-wire force kernel on an (r, phi) grid:
// CSV with columns r,phi,F_r,F_phi, using the first configured species.
int cmd_fieldmap(const std::filesystem::path& config_path,
                 const std::filesystem::path& out_file, std::size_t n_r, std::size_t n_phi,
                 std::ostream& diag);

// Worker count from the MAGSEP_THREADS environment variable; 0 (hardware
// default) when unset or unparsable.
unsigned default_threads_from_env();

}  // namespace magsep

#endif
