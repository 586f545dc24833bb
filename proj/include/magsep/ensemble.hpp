#ifndef MAGSEP_ENSEMBLE_HPP
#define MAGSEP_ENSEMBLE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "magsep/transport.hpp"

namespace magsep {

// A cell population released at the inlet: uniform over the cross-section
// contact box, with an optional truncated-Gaussian spread of the
// hydrodynamic radius (mean R_h, relative sigma, truncated at +-3 sigma and
// below at 0.2 R_h).
struct Population {
    CellSpecies species;
    std::uint64_t count = 0;
    double radius_rel_sigma = 0.0;

    void validate() const;
};

struct SampledCell {
    CellState state;
    CellSpecies species;  // realized (radius possibly perturbed)
    std::uint64_t index = 0;
};

struct WilsonInterval {
    double low = 0.0;
    double high = 1.0;
};

// 95% Wilson score interval by default; well behaved near 0 and 1.
WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                               double z = 1.959963984540054);

struct SpeciesStats {
    std::string label;
    std::uint64_t n_total = 0;
    std::uint64_t n_captured = 0;
    std::uint64_t n_escaped = 0;
    std::uint64_t n_timeout = 0;
    // Subset of n_timeout: cells whose trajectory hit an integrator
    // stiffness error. Reported for diagnosis, never folded elsewhere.
    std::uint64_t n_integrator_failures = 0;
    double capture_fraction = 0.0;
    WilsonInterval ci;
};

struct EnsembleStats {
    std::uint64_t master_seed = 0;
    std::string scenario_digest;
    std::vector<SpeciesStats> species;

    const SpeciesStats* find(const std::string& label) const;
};

// Draw the initial states of a population. Deterministic in (population,
// master_seed): cell i uses an independent counter-based substream keyed by
// (master_seed, species label, i), so the result is independent of how many
// cells are drawn or in which order. Initial x = 0. Inlet positions avoid
// the capture disks around the wires (the dot array starts downstream of
// the inlet).
std::vector<SampledCell> sample_population(const Population& population,
                                           const Scenario& scenario,
                                           std::uint64_t master_seed);

// Simulate an explicit list of cells. `threads` = 0 picks the hardware
// concurrency. Statistics are bit-identical at any worker count.
EnsembleStats run_cells(const std::vector<SampledCell>& cells, const Scenario& scenario,
                        unsigned threads = 0);

// Sample every population and simulate all cells independently.
EnsembleStats run_ensemble(const std::vector<Population>& populations,
                           const Scenario& scenario, std::uint64_t master_seed,
                           unsigned threads = 0, const std::string& scenario_digest = "");

// Trapped fraction from a before/after cell count (cells per unit volume):
// 1 - after/before. Throws ValidationError on inconsistent counts or a
// zero reference count.
double efficiency_report(double count_before, double count_after);

struct SeparationSummary {
    std::string target_label;     // species meant to be captured
    std::string reference_label;  // species meant to pass through
    double target_fraction = 0.0;
    double reference_fraction = 0.0;
    double capture_gap = 0.0;     // target - reference
    double outlet_purity = 0.0;   // ref escaped / (ref escaped + target escaped)
};

SeparationSummary compare_species(const EnsembleStats& stats, const std::string& target_label,
                                  const std::string& reference_label);

// First species as target, second as reference.
SeparationSummary compare_species(const EnsembleStats& stats);

}  // namespace magsep

#endif
