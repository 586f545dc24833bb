#include "magsep/units.hpp"

#include <cctype>
#include <cstdlib>
#include <map>
#include <string_view>

#include "magsep/constants.hpp"
#include "magsep/errors.hpp"

namespace magsep {

namespace {

struct UnitEntry {
    Dimension dim;
    double to_si;
};

// Micro prefixes arrive as "u", U+00B5 or U+03BC; normalize to "u".
std::string normalize_unit(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto b = static_cast<unsigned char>(raw[i]);
        if (b == 0xC2 && i + 1 < raw.size() &&
            static_cast<unsigned char>(raw[i + 1]) == 0xB5) {
            out += 'u';
            ++i;
        } else if (b == 0xCE && i + 1 < raw.size() &&
                   static_cast<unsigned char>(raw[i + 1]) == 0xBC) {
            out += 'u';
            ++i;
        } else if (b == '*' || b == ' ') {
            out += '.';
        } else {
            out += raw[i];
        }
    }
    return out;
}

const std::map<std::string, UnitEntry>& unit_table() {
    static const std::map<std::string, UnitEntry> table = {
        {"m", {Dimension::Length, 1.0}},
        {"cm", {Dimension::Length, 1e-2}},
        {"mm", {Dimension::Length, 1e-3}},
        {"um", {Dimension::Length, 1e-6}},
        {"nm", {Dimension::Length, 1e-9}},

        {"m3", {Dimension::Volume, 1.0}},
        {"m^3", {Dimension::Volume, 1.0}},
        {"L", {Dimension::Volume, 1e-3}},
        {"l", {Dimension::Volume, 1e-3}},
        {"mL", {Dimension::Volume, 1e-6}},
        {"ml", {Dimension::Volume, 1e-6}},
        {"uL", {Dimension::Volume, 1e-9}},
        {"ul", {Dimension::Volume, 1e-9}},
        {"pL", {Dimension::Volume, 1e-15}},
        {"pl", {Dimension::Volume, 1e-15}},
        {"fL", {Dimension::Volume, 1e-18}},
        {"fl", {Dimension::Volume, 1e-18}},
        {"um3", {Dimension::Volume, 1e-18}},
        {"um^3", {Dimension::Volume, 1e-18}},

        {"s", {Dimension::Time, 1.0}},
        {"ms", {Dimension::Time, 1e-3}},
        {"us", {Dimension::Time, 1e-6}},
        {"ns", {Dimension::Time, 1e-9}},
        {"min", {Dimension::Time, 60.0}},
        {"h", {Dimension::Time, 3600.0}},

        {"Pa.s", {Dimension::Viscosity, 1.0}},
        {"mPa.s", {Dimension::Viscosity, 1e-3}},
        {"cP", {Dimension::Viscosity, 1e-3}},

        {"kg/m3", {Dimension::MassDensity, 1.0}},
        {"kg/m^3", {Dimension::MassDensity, 1.0}},
        {"g/cm3", {Dimension::MassDensity, 1e3}},
        {"g/cm^3", {Dimension::MassDensity, 1e3}},
        {"g/mL", {Dimension::MassDensity, 1e3}},
        {"g/ml", {Dimension::MassDensity, 1e3}},
        {"g/L", {Dimension::MassDensity, 1.0}},
        {"g/l", {Dimension::MassDensity, 1.0}},

        {"m3/s", {Dimension::FlowRate, 1.0}},
        {"m^3/s", {Dimension::FlowRate, 1.0}},
        {"mL/h", {Dimension::FlowRate, 1e-6 / 3600.0}},
        {"ml/h", {Dimension::FlowRate, 1e-6 / 3600.0}},
        {"uL/h", {Dimension::FlowRate, 1e-9 / 3600.0}},
        {"ul/h", {Dimension::FlowRate, 1e-9 / 3600.0}},
        {"mL/min", {Dimension::FlowRate, 1e-6 / 60.0}},
        {"ml/min", {Dimension::FlowRate, 1e-6 / 60.0}},
        {"uL/min", {Dimension::FlowRate, 1e-9 / 60.0}},
        {"ul/min", {Dimension::FlowRate, 1e-9 / 60.0}},
        {"L/h", {Dimension::FlowRate, 1e-3 / 3600.0}},
        {"l/h", {Dimension::FlowRate, 1e-3 / 3600.0}},
        {"mL/s", {Dimension::FlowRate, 1e-6}},
        {"ml/s", {Dimension::FlowRate, 1e-6}},

        {"T", {Dimension::FluxDensity, 1.0}},
        {"mT", {Dimension::FluxDensity, 1e-3}},
        {"G", {Dimension::FluxDensity, 1e-4}},
        {"gauss", {Dimension::FluxDensity, 1e-4}},

        {"A/m", {Dimension::Magnetization, 1.0}},
        {"kA/m", {Dimension::Magnetization, 1e3}},

        {"H/m", {Dimension::Permeability, 1.0}},
    };
    return table;
}

}  // namespace

const char* dimension_name(Dimension dim) {
    switch (dim) {
        case Dimension::Length: return "length";
        case Dimension::Volume: return "volume";
        case Dimension::Time: return "time";
        case Dimension::Viscosity: return "viscosity";
        case Dimension::MassDensity: return "mass density";
        case Dimension::FlowRate: return "flow rate";
        case Dimension::FluxDensity: return "magnetic flux density";
        case Dimension::Magnetization: return "magnetization";
        case Dimension::Permeability: return "permeability";
        case Dimension::Dimensionless: return "dimensionless";
    }
    return "unknown";
}

double parse_quantity(const std::string& text, Dimension dim, const std::string& path) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double value = std::strtod(begin, &end);
    if (end == begin)
        throw ValidationError(path, "cannot parse a number from '" + text + "'");

    std::string_view rest(end);
    while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.front())))
        rest.remove_prefix(1);
    while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.back())))
        rest.remove_suffix(1);

    if (rest.empty()) {
        if (dim == Dimension::Dimensionless) return value;
        throw ValidationError(path, "string values must carry a unit (expected " +
                                        std::string(dimension_name(dim)) + ")");
    }
    if (dim == Dimension::Dimensionless)
        throw ValidationError(path, "unexpected unit '" + std::string(rest) +
                                        "' on a dimensionless value");

    const std::string unit = normalize_unit(rest);
    const auto& table = unit_table();
    const auto it = table.find(unit);
    if (it == table.end())
        throw ValidationError(path, "unknown unit '" + std::string(rest) + "'");
    if (it->second.dim != dim)
        throw ValidationError(path, "unit '" + std::string(rest) + "' is not a " +
                                        std::string(dimension_name(dim)) + " unit");
    return value * it->second.to_si;
}

double quantity_from_json(const nlohmann::json& value, Dimension dim, const std::string& path) {
    if (value.is_number()) return value.get<double>();
    if (value.is_string()) return parse_quantity(value.get<std::string>(), dim, path);
    throw ValidationError(path, "expected a number (SI) or a string with a unit");
}

}  // namespace magsep
