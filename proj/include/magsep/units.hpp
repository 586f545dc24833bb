#ifndef MAGSEP_UNITS_HPP
#define MAGSEP_UNITS_HPP

#include <string>

#include <json.hpp>

namespace magsep {

// Dimensions accepted in configuration files. JSON strings carry a unit
// ("0.5 ml/h"); bare JSON numbers are SI.
enum class Dimension {
    Length,
    Volume,
    Time,
    Viscosity,
    MassDensity,
    FlowRate,
    FluxDensity,
    Magnetization,
    Permeability,
    Dimensionless,
};

const char* dimension_name(Dimension dim);

// Parse "value unit" into SI. Throws ValidationError (path-qualified) on an
// unknown or dimensionally wrong unit, or a missing unit.
double parse_quantity(const std::string& text, Dimension dim, const std::string& path = "");

// JSON number -> SI as-is; JSON string -> parse_quantity.
double quantity_from_json(const nlohmann::json& value, Dimension dim, const std::string& path);

}  // namespace magsep

#endif
