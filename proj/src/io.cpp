#include "magsep/io.hpp"

#include <cstdio>
#include <fstream>

#include "magsep/errors.hpp"

namespace magsep {

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path parent = path.parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot open output file: " + tmp.string());
        out << content;
        if (!out) throw ValidationError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

nlohmann::json stats_to_json(const EnsembleStats& stats) {
    nlohmann::json doc;
    doc["schema"] = "magsep-stats-1";
    doc["master_seed"] = stats.master_seed;
    doc["scenario_digest"] = stats.scenario_digest;
    nlohmann::json species = nlohmann::json::array();
    for (const SpeciesStats& s : stats.species) {
        species.push_back({{"label", s.label},
                           {"n_total", s.n_total},
                           {"n_captured", s.n_captured},
                           {"n_escaped", s.n_escaped},
                           {"n_timeout", s.n_timeout},
                           {"n_integrator_failures", s.n_integrator_failures},
                           {"capture_fraction", s.capture_fraction},
                           {"ci_low", s.ci.low},
                           {"ci_high", s.ci.high}});
    }
    doc["species"] = std::move(species);
    return doc;
}

std::string stats_to_json_text(const EnsembleStats& stats) {
    return stats_to_json(stats).dump(2) + "\n";
}

namespace {

const char* outcome_tag(const Outcome& outcome) {
    switch (outcome.kind) {
        case OutcomeKind::Captured: return "captured";
        case OutcomeKind::Escaped: return "escaped";
        case OutcomeKind::MaxTimeExceeded: return "max_time_exceeded";
    }
    return "unknown";
}

}  // namespace

std::string trajectory_to_csv(const Trajectory& trajectory, const std::string& outcome_override) {
    std::string out = "t,x,y,z,outcome\n";
    const std::string terminal_tag =
        outcome_override.empty() ? outcome_tag(trajectory.outcome) : outcome_override;
    for (std::size_t i = 0; i < trajectory.samples.size(); ++i) {
        const CellState& s = trajectory.samples[i];
        out += format_double(s.time);
        out += ',';
        out += format_double(s.position.x);
        out += ',';
        out += format_double(s.position.y);
        out += ',';
        out += format_double(s.position.z);
        out += ',';
        if (i + 1 == trajectory.samples.size()) out += terminal_tag;
        out += '\n';
    }
    return out;
}

std::string capture_table_csv(const EnsembleStats& stats) {
    std::string out = "species,capture_fraction,ci_low,ci_high\n";
    for (const SpeciesStats& s : stats.species) {
        out += s.label;
        out += ',';
        out += format_double(s.capture_fraction);
        out += ',';
        out += format_double(s.ci.low);
        out += ',';
        out += format_double(s.ci.high);
        out += '\n';
    }
    return out;
}

}  // namespace magsep
