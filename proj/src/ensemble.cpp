#include "magsep/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "magsep/errors.hpp"
#include "magsep/rng.hpp"

namespace magsep {

void Population::validate() const {
    species.validate();
    if (!(radius_rel_sigma >= 0.0))
        throw ValidationError("radius_rel_sigma must be non-negative");
}

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z_sq = z * z;
    const double denom = 1.0 + z_sq / n;
    const double center = (p + z_sq / (2.0 * n)) / denom;
    const double half =
        z * std::sqrt(p * (1.0 - p) / n + z_sq / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

const SpeciesStats* EnsembleStats::find(const std::string& label) const {
    for (const SpeciesStats& s : species)
        if (s.label == label) return &s;
    return nullptr;
}

namespace {

double truncated_radius(CounterRng& rng, double mean, double rel_sigma) {
    if (rel_sigma == 0.0) return mean;
    const double sigma = rel_sigma * mean;
    const double lo = std::max(0.2 * mean, mean - 3.0 * sigma);
    const double hi = mean + 3.0 * sigma;
    for (int attempt = 0; attempt < 10000; ++attempt) {
        const double r = mean + sigma * rng.next_gaussian();
        if (r >= lo && r <= hi) return r;
    }
    throw ValidationError("radius sampling failed to converge");
}

}  // namespace

std::vector<SampledCell> sample_population(const Population& population,
                                           const Scenario& scenario,
                                           std::uint64_t master_seed) {
    population.validate();

    const ChannelGeometry& ch = scenario.channel;
    std::vector<SampledCell> cells;
    cells.reserve(population.count);

    for (std::uint64_t i = 0; i < population.count; ++i) {
        CounterRng rng(substream_key(master_seed, population.species.label, i));

        SampledCell cell;
        cell.index = i;
        cell.species = population.species;
        cell.species.hydrodynamic_radius =
            truncated_radius(rng, population.species.hydrodynamic_radius,
                             population.radius_rel_sigma);

        const double r = cell.species.hydrodynamic_radius;
        if (2.0 * r >= ch.width || 2.0 * r >= ch.depth)
            throw ValidationError("sampled cell radius does not fit the channel");
        const double capture =
            scenario.limits.capture_radius_multiplier * (scenario.wires.half_width + r);
        const double capture_sq = capture * capture;

        bool placed = false;
        for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
            Vec2 pos{rng.next_uniform(r, ch.width - r), rng.next_uniform(r, ch.depth - r)};
            bool clear = true;
            for (const Vec2& c : scenario.wires.wire_centers) {
                if (norm_squared(pos - c) <= capture_sq) {
                    clear = false;
                    break;
                }
            }
            if (clear) {
                cell.state.position = {0.0, pos.y, pos.z};
                cell.state.time = 0.0;
                placed = true;
            }
        }
        if (!placed)
            throw ValidationError("no admissible inlet area outside the capture disks");
        cells.push_back(std::move(cell));
    }
    return cells;
}

namespace {

enum class CellFate : unsigned char { Captured, Escaped, Timeout, IntegratorFailure };

CellFate simulate_one(const SampledCell& cell, const Scenario& scenario) {
    try {
        // Stats runs skip intermediate samples; only the outcome matters.
        const Trajectory traj = simulate_trajectory(cell.state, cell.species, scenario, 0.0);
        switch (traj.outcome.kind) {
            case OutcomeKind::Captured: return CellFate::Captured;
            case OutcomeKind::Escaped: return CellFate::Escaped;
            case OutcomeKind::MaxTimeExceeded: return CellFate::Timeout;
        }
    } catch (const StiffnessError&) {
        return CellFate::IntegratorFailure;
    }
    return CellFate::Timeout;
}

}  // namespace

EnsembleStats run_cells(const std::vector<SampledCell>& cells, const Scenario& scenario,
                        unsigned threads) {
    scenario.validate();
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(
        std::min<std::size_t>(threads, std::max<std::size_t>(1, cells.size())));

    std::vector<CellFate> fates(cells.size(), CellFate::Timeout);
    std::atomic<std::size_t> cursor{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};

    const auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= cells.size() || failed.load()) break;
            try {
                fates[i] = simulate_one(cells[i], scenario);
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
                break;
            }
        }
    };

    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    // Aggregate in input order so the result is independent of scheduling.
    EnsembleStats stats;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const std::string& label = cells[i].species.label;
        SpeciesStats* block = nullptr;
        for (SpeciesStats& s : stats.species)
            if (s.label == label) block = &s;
        if (!block) {
            stats.species.push_back(SpeciesStats{});
            block = &stats.species.back();
            block->label = label;
        }
        ++block->n_total;
        switch (fates[i]) {
            case CellFate::Captured: ++block->n_captured; break;
            case CellFate::Escaped: ++block->n_escaped; break;
            case CellFate::Timeout: ++block->n_timeout; break;
            case CellFate::IntegratorFailure:
                ++block->n_timeout;
                ++block->n_integrator_failures;
                break;
        }
    }
    for (SpeciesStats& s : stats.species) {
        s.capture_fraction =
            s.n_total == 0 ? 0.0
                           : static_cast<double>(s.n_captured) / static_cast<double>(s.n_total);
        s.ci = wilson_interval(s.n_captured, s.n_total);
    }
    return stats;
}

EnsembleStats run_ensemble(const std::vector<Population>& populations,
                           const Scenario& scenario, std::uint64_t master_seed,
                           unsigned threads, const std::string& scenario_digest) {
    scenario.validate();
    std::vector<SampledCell> cells;
    for (const Population& pop : populations) {
        std::vector<SampledCell> drawn = sample_population(pop, scenario, master_seed);
        cells.insert(cells.end(), std::make_move_iterator(drawn.begin()),
                     std::make_move_iterator(drawn.end()));
    }
    EnsembleStats stats = run_cells(cells, scenario, threads);
    // Species with zero sampled cells still get a block.
    for (const Population& pop : populations) {
        if (!stats.find(pop.species.label)) {
            SpeciesStats empty;
            empty.label = pop.species.label;
            empty.ci = wilson_interval(0, 0);
            stats.species.push_back(std::move(empty));
        }
    }
    stats.master_seed = master_seed;
    stats.scenario_digest = scenario_digest;
    return stats;
}

double efficiency_report(double count_before, double count_after) {
    if (!(count_before > 0.0))
        throw ValidationError("undefined efficiency: count_before must be positive");
    if (count_after < 0.0 || count_after > count_before)
        throw ValidationError("inconsistent counts: count_after must lie in [0, count_before]");
    return 1.0 - count_after / count_before;
}

SeparationSummary compare_species(const EnsembleStats& stats, const std::string& target_label,
                                  const std::string& reference_label) {
    if (stats.species.size() < 2)
        throw ValidationError("not comparable: need at least two species");
    const SpeciesStats* target = stats.find(target_label);
    const SpeciesStats* reference = stats.find(reference_label);
    if (!target || !reference)
        throw ValidationError("not comparable: species label not present in stats");

    SeparationSummary summary;
    summary.target_label = target_label;
    summary.reference_label = reference_label;
    summary.target_fraction = target->capture_fraction;
    summary.reference_fraction = reference->capture_fraction;
    summary.capture_gap = target->capture_fraction - reference->capture_fraction;
    const double escaped_total =
        static_cast<double>(reference->n_escaped) + static_cast<double>(target->n_escaped);
    summary.outlet_purity = escaped_total > 0.0
                                ? static_cast<double>(reference->n_escaped) / escaped_total
                                : std::numeric_limits<double>::quiet_NaN();
    return summary;
}

SeparationSummary compare_species(const EnsembleStats& stats) {
    if (stats.species.size() < 2)
        throw ValidationError("not comparable: need at least two species");
    return compare_species(stats, stats.species[0].label, stats.species[1].label);
}

}  // namespace magsep
