#ifndef MAGSEP_SCENARIO_HPP
#define MAGSEP_SCENARIO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "magsep/ensemble.hpp"
#include "magsep/transport.hpp"

namespace magsep {

struct PopulationSpec {
    std::string species_label;
    std::uint64_t count = 0;
    double radius_rel_sigma = 0.0;
};

struct OutputSettings {
    std::uint64_t trajectory_export_cap = 50;  // per species
};

// A complete, validated, unit-normalized experiment description. All
// quantities are SI after load; the lattice shorthand is expanded into
// explicit wire centers.
struct ScenarioConfig {
    int version = 1;
    std::uint64_t seed = 0;
    ChannelGeometry channel;
    FluidConfig fluid;
    FieldConfig field;
    WireArray wires;
    std::vector<CellSpecies> species;
    std::vector<PopulationSpec> populations;
    IntegratorSettings integrator;
    TransportLimits limits;
    OutputSettings output;

    void validate() const;

    Scenario scenario() const;
    std::vector<Population> population_list() const;
    const CellSpecies& species_by_label(const std::string& label) const;
};

// Parse and validate a config document. Unknown keys are rejected; every
// error message carries the config path of the offending entry. Plane-flow
// and similar soft warnings are appended to `warnings` when given.
ScenarioConfig load_config(const nlohmann::json& document,
                           std::vector<std::string>* warnings = nullptr);
ScenarioConfig load_config_file(const std::filesystem::path& path,
                                std::vector<std::string>* warnings = nullptr);

// Canonical normalized form: bare SI numbers, explicit wire centers, all
// defaults materialized. load(save(config)) reproduces the config exactly.
nlohmann::json save_config(const ScenarioConfig& config);

// Stable FNV-1a hash of the canonical serialized form, as 16 hex digits.
std::string config_digest(const ScenarioConfig& config);

}  // namespace magsep

#endif
