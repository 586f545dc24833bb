#ifndef MAGSEP_TESTS_FIXTURES_HPP
#define MAGSEP_TESTS_FIXTURES_HPP

#include <string>

#include "magsep/scenario.hpp"

namespace magsep::testing {

inline std::string default_config_path() {
    return std::string(MAGSEP_CONFIG_DIR) + "/default.json";
}

inline ScenarioConfig default_config() {
    return load_config_file(default_config_path());
}

// Default scenario with every transverse force switched off: no field and
// all species neutrally buoyant.
inline ScenarioConfig force_free_config() {
    ScenarioConfig cfg = default_config();
    cfg.field.flux_density = 0.0;
    for (CellSpecies& sp : cfg.species) sp.density = cfg.fluid.density;
    return cfg;
}

}  // namespace magsep::testing

#endif
