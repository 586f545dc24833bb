#ifndef MAGSEP_IO_HPP
#define MAGSEP_IO_HPP

#include <filesystem>
#include <string>

#include <json.hpp>

#include "magsep/ensemble.hpp"
#include "magsep/transport.hpp"

namespace magsep {

// Write-then-rename so readers never observe a partial file.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

// Deterministic double formatting for CSV output.
std::string format_double(double value);

nlohmann::json stats_to_json(const EnsembleStats& stats);

// Pretty-printed with sorted keys; byte-stable for identical stats.
std::string stats_to_json_text(const EnsembleStats& stats);

// Header `t,x,y,z,outcome`; the outcome column is empty except on the
// terminal row. `outcome_override` replaces the terminal tag (used for
// partial trajectories from integrator failures).
std::string trajectory_to_csv(const Trajectory& trajectory,
                              const std::string& outcome_override = "");

// Tidy per-species capture table: species,capture_fraction,ci_low,ci_high.
std::string capture_table_csv(const EnsembleStats& stats);

}  // namespace magsep

#endif
