#include "magsep/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "magsep/constants.hpp"
#include "magsep/errors.hpp"
#include "magsep/rng.hpp"
#include "magsep/units.hpp"

namespace magsep {

namespace {

using nlohmann::json;

std::string join_path(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

const json& require_object(const json& doc, const std::string& path) {
    if (!doc.is_object()) throw ValidationError(path, "expected an object");
    return doc;
}

void reject_unknown_keys(const json& obj, const std::string& path,
                         std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) known = true;
        if (!known) throw ValidationError(join_path(path, item.key()), "unknown key");
    }
}

const json& require_key(const json& obj, const char* key, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end())
        throw ValidationError(join_path(path, key), "missing required key");
    return *it;
}

double required_quantity(const json& obj, const char* key, Dimension dim,
                         const std::string& path) {
    return quantity_from_json(require_key(obj, key, path), dim, join_path(path, key));
}

double optional_quantity(const json& obj, const char* key, Dimension dim,
                         const std::string& path, double fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    return quantity_from_json(*it, dim, join_path(path, key));
}

double required_positive(const json& obj, const char* key, Dimension dim,
                         const std::string& path) {
    const double v = required_quantity(obj, key, dim, path);
    if (!(v > 0.0))
        throw ValidationError(join_path(path, key), "must be a positive quantity");
    return v;
}

std::uint64_t nonneg_integer(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
        const auto s = v.get<std::int64_t>();
        if (s < 0) throw ValidationError(path, "expected a non-negative integer");
        return static_cast<std::uint64_t>(s);
    }
    throw ValidationError(path, "expected a non-negative integer");
}

std::uint64_t required_count(const json& obj, const char* key, const std::string& path) {
    return nonneg_integer(require_key(obj, key, path), join_path(path, key));
}

MagneticMaterial parse_material(const json& doc, const std::string& path) {
    require_object(doc, path);
    reject_unknown_keys(doc, path,
                        {"mu_wire", "mu_buffer", "relative_permeability_wire",
                         "relative_permeability_buffer", "saturation_magnetization"});

    MagneticMaterial material;
    const bool has_abs = doc.contains("mu_wire") || doc.contains("mu_buffer");
    const bool has_rel = doc.contains("relative_permeability_wire") ||
                         doc.contains("relative_permeability_buffer");
    if (has_abs && has_rel)
        throw ValidationError(path, "give permeabilities either as mu_* or as "
                                    "relative_permeability_*, not both");
    if (has_abs) {
        material.mu_wire = required_positive(doc, "mu_wire", Dimension::Permeability, path);
        material.mu_buffer =
            required_positive(doc, "mu_buffer", Dimension::Permeability, path);
    } else {
        const double rel_wire = required_positive(doc, "relative_permeability_wire",
                                                  Dimension::Dimensionless, path);
        const double rel_buffer = optional_quantity(doc, "relative_permeability_buffer",
                                                    Dimension::Dimensionless, path, 1.0);
        if (!(rel_buffer > 0.0))
            throw ValidationError(join_path(path, "relative_permeability_buffer"),
                                  "must be a positive quantity");
        material.mu_wire = rel_wire * kMu0;
        material.mu_buffer = rel_buffer * kMu0;
    }
    if (doc.contains("saturation_magnetization"))
        material.saturation_magnetization =
            required_positive(doc, "saturation_magnetization", Dimension::Magnetization, path);
    return material;
}

WireArray parse_wire_array(const json& doc, const std::string& path, double channel_width) {
    require_object(doc, path);
    reject_unknown_keys(doc, path,
                        {"half_width", "aspect_factor", "material", "lattice", "wire_centers"});

    WireArray wires;
    wires.half_width = required_positive(doc, "half_width", Dimension::Length, path);
    wires.aspect_factor =
        optional_quantity(doc, "aspect_factor", Dimension::Dimensionless, path, 1.0);
    wires.material = parse_material(require_key(doc, "material", path),
                                    join_path(path, "material"));

    const bool has_lattice = doc.contains("lattice");
    const bool has_centers = doc.contains("wire_centers");
    if (has_lattice == has_centers)
        throw ValidationError(path, "give exactly one of 'lattice' or 'wire_centers'");

    if (has_lattice) {
        const std::string lattice_path = join_path(path, "lattice");
        const json& lattice = require_object(doc["lattice"], lattice_path);
        reject_unknown_keys(lattice, lattice_path, {"pitch", "count"});
        const double pitch = required_positive(lattice, "pitch", Dimension::Length, lattice_path);
        const std::uint64_t count = required_count(lattice, "count", lattice_path);
        if (count == 0)
            throw ValidationError(join_path(lattice_path, "count"), "must be at least 1");
        // Row of wires on the channel floor, centered across the width.
        const double span = pitch * static_cast<double>(count - 1);
        const double start = 0.5 * (channel_width - span);
        if (start < 0.0)
            throw ValidationError(lattice_path, "lattice does not fit the channel width");
        wires.wire_centers.reserve(count);
        for (std::uint64_t i = 0; i < count; ++i)
            wires.wire_centers.push_back({start + pitch * static_cast<double>(i), 0.0});
    } else {
        const json& centers = doc["wire_centers"];
        const std::string centers_path = join_path(path, "wire_centers");
        if (!centers.is_array())
            throw ValidationError(centers_path, "expected an array of [y, z] pairs");
        for (std::size_t i = 0; i < centers.size(); ++i) {
            const json& pair = centers[i];
            const std::string item_path = centers_path + "[" + std::to_string(i) + "]";
            if (!pair.is_array() || pair.size() != 2)
                throw ValidationError(item_path, "expected a [y, z] pair");
            Vec2 c;
            c.y = quantity_from_json(pair[0], Dimension::Length, item_path + "[0]");
            c.z = quantity_from_json(pair[1], Dimension::Length, item_path + "[1]");
            wires.wire_centers.push_back(c);
        }
    }
    return wires;
}

CellSpecies parse_species(const json& doc, const std::string& path) {
    require_object(doc, path);
    reject_unknown_keys(doc, path,
                        {"label", "delta_chi", "volume", "hydrodynamic_radius", "density"});
    CellSpecies sp;
    const json& label = require_key(doc, "label", path);
    if (!label.is_string() || label.get<std::string>().empty())
        throw ValidationError(join_path(path, "label"), "expected a non-empty string");
    sp.label = label.get<std::string>();
    sp.magnetics.delta_chi =
        required_quantity(doc, "delta_chi", Dimension::Dimensionless, path);
    if (!std::isfinite(sp.magnetics.delta_chi))
        throw ValidationError(join_path(path, "delta_chi"), "must be finite");
    sp.magnetics.volume = required_positive(doc, "volume", Dimension::Volume, path);
    sp.hydrodynamic_radius =
        required_positive(doc, "hydrodynamic_radius", Dimension::Length, path);
    sp.density = required_positive(doc, "density", Dimension::MassDensity, path);
    return sp;
}

}  // namespace

void ScenarioConfig::validate() const {
    if (version != 1) throw ValidationError("version", "unsupported config version");
    scenario().validate();

    std::set<std::string> labels;
    for (const CellSpecies& sp : species) {
        sp.validate();
        if (!labels.insert(sp.label).second)
            throw ValidationError("species", "duplicate species label '" + sp.label + "'");
    }
    if (species.empty()) throw ValidationError("species", "at least one species is required");
    std::set<std::string> populated;
    for (const PopulationSpec& pop : populations) {
        if (labels.find(pop.species_label) == labels.end())
            throw ValidationError("populations",
                                  "unknown species label '" + pop.species_label + "'");
        // One population per species: cell substreams are keyed by the
        // species label, so a second population would replay them.
        if (!populated.insert(pop.species_label).second)
            throw ValidationError("populations",
                                  "species '" + pop.species_label +
                                      "' appears in more than one population");
        if (!(pop.radius_rel_sigma >= 0.0))
            throw ValidationError("populations", "radius_rel_sigma must be non-negative");
    }
}

Scenario ScenarioConfig::scenario() const {
    Scenario s;
    s.channel = channel;
    s.fluid = fluid;
    s.field = field;
    s.wires = wires;
    s.integrator = integrator;
    s.limits = limits;
    return s;
}

std::vector<Population> ScenarioConfig::population_list() const {
    std::vector<Population> out;
    out.reserve(populations.size());
    for (const PopulationSpec& spec : populations) {
        Population pop;
        pop.species = species_by_label(spec.species_label);
        pop.count = spec.count;
        pop.radius_rel_sigma = spec.radius_rel_sigma;
        out.push_back(std::move(pop));
    }
    return out;
}

const CellSpecies& ScenarioConfig::species_by_label(const std::string& label) const {
    for (const CellSpecies& sp : species)
        if (sp.label == label) return sp;
    throw ValidationError("species", "unknown species label '" + label + "'");
}

ScenarioConfig load_config(const nlohmann::json& document, std::vector<std::string>* warnings) {
    const json& doc = require_object(document, "");
    reject_unknown_keys(doc, "",
                        {"version", "seed", "channel", "fluid", "field", "wire_array",
                         "species", "populations", "integrator", "limits", "output"});

    ScenarioConfig cfg;

    const json& version = require_key(doc, "version", "");
    if (!version.is_number_integer() || version.get<int>() != 1)
        throw ValidationError("version", "unsupported config version (expected 1)");
    cfg.version = 1;

    if (doc.contains("seed")) cfg.seed = nonneg_integer(doc["seed"], "seed");

    {
        const std::string path = "channel";
        const json& channel = require_object(require_key(doc, "channel", ""), path);
        reject_unknown_keys(channel, path, {"depth", "width", "length"});
        cfg.channel.depth = required_positive(channel, "depth", Dimension::Length, path);
        cfg.channel.width = required_positive(channel, "width", Dimension::Length, path);
        cfg.channel.length = required_positive(channel, "length", Dimension::Length, path);
    }

    {
        const std::string path = "fluid";
        const json& fluid = require_object(require_key(doc, "fluid", ""), path);
        reject_unknown_keys(fluid, path, {"viscosity", "density", "flow_rate"});
        cfg.fluid.viscosity = required_positive(fluid, "viscosity", Dimension::Viscosity, path);
        cfg.fluid.density = required_positive(fluid, "density", Dimension::MassDensity, path);
        cfg.fluid.flow_rate = required_positive(fluid, "flow_rate", Dimension::FlowRate, path);
    }

    {
        const std::string path = "field";
        const json& field = require_object(require_key(doc, "field", ""), path);
        reject_unknown_keys(field, path, {"flux_density", "direction"});
        cfg.field.flux_density =
            required_quantity(field, "flux_density", Dimension::FluxDensity, path);
        if (cfg.field.flux_density < 0.0)
            throw ValidationError(join_path(path, "flux_density"), "must be non-negative");
        if (field.contains("direction")) {
            const json& dir = field["direction"];
            const std::string dir_path = join_path(path, "direction");
            if (!dir.is_array() || dir.size() != 2)
                throw ValidationError(dir_path, "expected a [y, z] pair");
            cfg.field.direction.y =
                quantity_from_json(dir[0], Dimension::Dimensionless, dir_path + "[0]");
            cfg.field.direction.z =
                quantity_from_json(dir[1], Dimension::Dimensionless, dir_path + "[1]");
            const double n = norm(cfg.field.direction);
            if (std::abs(n - 1.0) > 1e-6)
                throw ValidationError(dir_path, "must be a unit vector");
            // Renormalize once; leave already-normalized input untouched so
            // the canonical form is a fixed point.
            if (std::abs(n - 1.0) > 1e-12) {
                cfg.field.direction.y /= n;
                cfg.field.direction.z /= n;
            }
        } else {
            cfg.field.direction = {0.0, 1.0};
        }
    }

    cfg.wires = parse_wire_array(require_key(doc, "wire_array", ""), "wire_array",
                                 cfg.channel.width);

    {
        const json& species = require_key(doc, "species", "");
        if (!species.is_array() || species.empty())
            throw ValidationError("species", "expected a non-empty array");
        for (std::size_t i = 0; i < species.size(); ++i)
            cfg.species.push_back(
                parse_species(species[i], "species[" + std::to_string(i) + "]"));
    }

    if (doc.contains("populations")) {
        const json& pops = doc["populations"];
        if (!pops.is_array()) throw ValidationError("populations", "expected an array");
        for (std::size_t i = 0; i < pops.size(); ++i) {
            const std::string path = "populations[" + std::to_string(i) + "]";
            const json& pop = require_object(pops[i], path);
            reject_unknown_keys(pop, path, {"species", "count", "radius_rel_sigma"});
            PopulationSpec spec;
            const json& label = require_key(pop, "species", path);
            if (!label.is_string())
                throw ValidationError(join_path(path, "species"), "expected a species label");
            spec.species_label = label.get<std::string>();
            spec.count = required_count(pop, "count", path);
            spec.radius_rel_sigma =
                optional_quantity(pop, "radius_rel_sigma", Dimension::Dimensionless, path, 0.0);
            cfg.populations.push_back(std::move(spec));
        }
    }

    if (doc.contains("integrator")) {
        const std::string path = "integrator";
        const json& integ = require_object(doc["integrator"], path);
        reject_unknown_keys(integ, path, {"tolerance", "initial_dt", "min_dt", "max_dt"});
        cfg.integrator.tolerance =
            optional_quantity(integ, "tolerance", Dimension::Dimensionless, path, 1e-3);
        cfg.integrator.initial_dt =
            optional_quantity(integ, "initial_dt", Dimension::Time, path, 1e-4);
        cfg.integrator.min_dt = optional_quantity(integ, "min_dt", Dimension::Time, path, 1e-9);
        cfg.integrator.max_dt = optional_quantity(integ, "max_dt", Dimension::Time, path, 0.0);
    }

    if (doc.contains("limits")) {
        const std::string path = "limits";
        const json& limits = require_object(doc["limits"], path);
        reject_unknown_keys(limits, path,
                            {"max_time_factor", "sample_count", "capture_radius_multiplier"});
        cfg.limits.max_time_factor =
            optional_quantity(limits, "max_time_factor", Dimension::Dimensionless, path, 10.0);
        if (limits.contains("sample_count"))
            cfg.limits.sample_count = required_count(limits, "sample_count", path);
        cfg.limits.capture_radius_multiplier = optional_quantity(
            limits, "capture_radius_multiplier", Dimension::Dimensionless, path, 1.0);
    }

    if (doc.contains("output")) {
        const std::string path = "output";
        const json& output = require_object(doc["output"], path);
        reject_unknown_keys(output, path, {"trajectory_export_cap"});
        if (output.contains("trajectory_export_cap"))
            cfg.output.trajectory_export_cap =
                required_count(output, "trajectory_export_cap", path);
    }

    cfg.validate();

    if (warnings && !cfg.channel.plane_flow_ok())
        warnings->push_back(
            "channel width is less than 5x the depth; the plane Poiseuille "
            "profile is a rough approximation here");

    return cfg;
}

ScenarioConfig load_config_file(const std::filesystem::path& path,
                                std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("config is not valid JSON: " + std::string(e.what()));
    }
    return load_config(doc, warnings);
}

nlohmann::json save_config(const ScenarioConfig& cfg) {
    json doc;
    doc["version"] = cfg.version;
    doc["seed"] = cfg.seed;
    doc["channel"] = {{"depth", cfg.channel.depth},
                      {"width", cfg.channel.width},
                      {"length", cfg.channel.length}};
    doc["fluid"] = {{"viscosity", cfg.fluid.viscosity},
                    {"density", cfg.fluid.density},
                    {"flow_rate", cfg.fluid.flow_rate}};
    doc["field"] = {{"flux_density", cfg.field.flux_density},
                    {"direction", {cfg.field.direction.y, cfg.field.direction.z}}};

    json material = {{"mu_wire", cfg.wires.material.mu_wire},
                     {"mu_buffer", cfg.wires.material.mu_buffer}};
    if (cfg.wires.material.saturation_magnetization)
        material["saturation_magnetization"] = *cfg.wires.material.saturation_magnetization;
    json centers = json::array();
    for (const Vec2& c : cfg.wires.wire_centers) centers.push_back({c.y, c.z});
    doc["wire_array"] = {{"half_width", cfg.wires.half_width},
                         {"aspect_factor", cfg.wires.aspect_factor},
                         {"material", std::move(material)},
                         {"wire_centers", std::move(centers)}};

    json species = json::array();
    for (const CellSpecies& sp : cfg.species)
        species.push_back({{"label", sp.label},
                           {"delta_chi", sp.magnetics.delta_chi},
                           {"volume", sp.magnetics.volume},
                           {"hydrodynamic_radius", sp.hydrodynamic_radius},
                           {"density", sp.density}});
    doc["species"] = std::move(species);

    json populations = json::array();
    for (const PopulationSpec& pop : cfg.populations)
        populations.push_back({{"species", pop.species_label},
                               {"count", pop.count},
                               {"radius_rel_sigma", pop.radius_rel_sigma}});
    doc["populations"] = std::move(populations);

    doc["integrator"] = {{"tolerance", cfg.integrator.tolerance},
                         {"initial_dt", cfg.integrator.initial_dt},
                         {"min_dt", cfg.integrator.min_dt},
                         {"max_dt", cfg.integrator.max_dt}};
    doc["limits"] = {{"max_time_factor", cfg.limits.max_time_factor},
                     {"sample_count", cfg.limits.sample_count},
                     {"capture_radius_multiplier", cfg.limits.capture_radius_multiplier}};
    doc["output"] = {{"trajectory_export_cap", cfg.output.trajectory_export_cap}};
    return doc;
}

std::string config_digest(const ScenarioConfig& cfg) {
    const std::string canonical = save_config(cfg).dump();
    std::uint64_t h = 0xCBF29CE484222325ULL;
    h = detail::fnv1a64(h, canonical.data(), canonical.size());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace magsep
