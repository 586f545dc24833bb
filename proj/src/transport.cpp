#include "magsep/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "magsep/constants.hpp"
#include "magsep/errors.hpp"

namespace magsep {

void ChannelGeometry::validate() const {
    if (!(depth > 0.0)) throw ValidationError("channel depth must be positive");
    if (!(width > 0.0)) throw ValidationError("channel width must be positive");
    if (!(length > 0.0)) throw ValidationError("channel length must be positive");
}

void FluidConfig::validate() const {
    if (!(viscosity > 0.0)) throw ValidationError("viscosity must be positive");
    if (!(density > 0.0)) throw ValidationError("fluid density must be positive");
    if (!(flow_rate > 0.0)) throw ValidationError("flow_rate must be positive");
}

void CellSpecies::validate() const {
    if (label.empty()) throw ValidationError("species label must not be empty");
    magnetics.validate();
    if (!(hydrodynamic_radius > 0.0))
        throw ValidationError("hydrodynamic_radius must be positive");
    if (!(density > 0.0)) throw ValidationError("cell density must be positive");
}

void IntegratorSettings::validate() const {
    if (!(tolerance > 0.0)) throw ValidationError("integrator tolerance must be positive");
    if (!(initial_dt > 0.0)) throw ValidationError("initial_dt must be positive");
    if (!(min_dt > 0.0)) throw ValidationError("min_dt must be positive");
    if (max_dt < 0.0) throw ValidationError("max_dt must be non-negative");
}

void TransportLimits::validate() const {
    if (!(max_time_factor > 0.0)) throw ValidationError("max_time_factor must be positive");
    if (sample_count == 0) throw ValidationError("sample_count must be positive");
    if (!(capture_radius_multiplier > 0.0))
        throw ValidationError("capture_radius_multiplier must be positive");
}

void Scenario::validate() const {
    channel.validate();
    fluid.validate();
    field.validate();
    wires.validate();
    integrator.validate();
    limits.validate();
    for (const Vec2& c : wires.wire_centers) {
        if (c.y < 0.0 || c.y > channel.width || c.z < 0.0 || c.z >= 0.5 * channel.depth)
            throw ValidationError("wire centers must lie in the channel floor region");
    }
}

double Scenario::mean_velocity() const {
    return magsep::mean_velocity(fluid.flow_rate, channel);
}

double Scenario::max_time() const {
    return limits.max_time_factor * channel.length / mean_velocity();
}

StiffnessError::StiffnessError(const std::string& message, const CellState& where,
                               Trajectory partial)
    : std::runtime_error(message), where_(where), partial_(std::move(partial)) {}

double mean_velocity(double flow_rate, const ChannelGeometry& geom) {
    geom.validate();
    if (!(flow_rate > 0.0)) throw ValidationError("flow_rate must be positive");
    return flow_rate / (geom.width * geom.depth);
}

double poiseuille_velocity(double z, double depth, double v_mean) {
    if (z < 0.0 || z > depth)
        throw ValidationError("z outside the channel depth");
    const double zeta = z / depth;
    return 6.0 * v_mean * zeta * (1.0 - zeta);
}

double drag_mobility(const CellSpecies& species, const FluidConfig& fluid) {
    if (!(fluid.viscosity > 0.0)) throw ValidationError("viscosity must be positive");
    if (!(species.hydrodynamic_radius > 0.0))
        throw ValidationError("hydrodynamic_radius must be positive");
    return 1.0 / (6.0 * kPi * fluid.viscosity * species.hydrodynamic_radius);
}

double gravity_force_z(const CellSpecies& species, const FluidConfig& fluid) {
    return -(species.density - fluid.density) * species.magnetics.volume * kGravity;
}

namespace {

// Per-trajectory cache of everything that does not change along the path.
class Stepper {
public:
    Stepper(const CellSpecies& species, const Scenario& scenario)
        : species_(species),
          scenario_(scenario),
          mobility_(drag_mobility(species, scenario.fluid)),
          gravity_z_(gravity_force_z(species, scenario.fluid)),
          v_mean_(scenario.mean_velocity()),
          max_dt_(scenario.integrator.max_dt > 0.0 ? scenario.integrator.max_dt
                                                   : scenario.max_time() / 500.0),
          near_zone_sq_(25.0 * scenario.wires.half_width * scenario.wires.half_width),
          displacement_cap_(0.1 * scenario.wires.half_width) {}

    NetVelocity velocity(const Vec3& position) const {
        NetVelocity out;
        const SuperposedForce mag = superpose_forces(position.cross_flow(),
                                                     species_.magnetics, scenario_.wires,
                                                     scenario_.field);
        if (mag.in_contact()) {
            out.contact_wire = mag.contact_wire;
            return out;
        }
        out.value.x = poiseuille_velocity(position.z, scenario_.channel.depth, v_mean_);
        out.value.y = mobility_ * mag.force.y;
        out.value.z = mobility_ * (mag.force.z + gravity_z_);
        return out;
    }

    // Squared distance to the closest wire center and its index.
    std::pair<std::size_t, double> nearest_wire(const Vec2& position) const {
        std::size_t best = 0;
        double best_sq = std::numeric_limits<double>::infinity();
        const auto& centers = scenario_.wires.wire_centers;
        for (std::size_t i = 0; i < centers.size(); ++i) {
            const double d_sq = norm_squared(position - centers[i]);
            if (d_sq < best_sq) {
                best_sq = d_sq;
                best = i;
            }
        }
        return {best, best_sq};
    }

    void clamp_to_walls(Vec3& position) const {
        const double r = species_.hydrodynamic_radius;
        position.y = std::clamp(position.y, r, scenario_.channel.width - r);
        position.z = std::clamp(position.z, r, scenario_.channel.depth - r);
    }

    double capture_radius() const {
        return scenario_.limits.capture_radius_multiplier *
               (scenario_.wires.half_width + species_.hydrodynamic_radius);
    }

    // One adaptive Heun step with error-per-unit-step control. Throws
    // StiffnessError when the step collapses below min_dt.
    StepResult step(const CellState& state, StepControl& control, double dt_ceiling) const {
        const IntegratorSettings& integ = scenario_.integrator;
        if (!(control.dt > 0.0)) control.dt = integ.initial_dt;

        const NetVelocity v1 = velocity(state.position);
        if (v1.contact_wire) return {state, v1.contact_wire};
        const double speed = norm(v1.value);

        double dt = std::min({control.dt, max_dt_, dt_ceiling});
        // Resolve the steep near-wire field: cap the displacement to a/10
        // inside five half-widths of any wire.
        if (speed > 0.0 && !scenario_.wires.wire_centers.empty()) {
            const double d_sq = nearest_wire(state.position.cross_flow()).second;
            if (d_sq <= near_zone_sq_) dt = std::min(dt, displacement_cap_ / speed);
        }

        for (;;) {
            if (dt < integ.min_dt)
                throw StiffnessError("adaptive step underflow (dt below min_dt)", state,
                                     Trajectory{});

            Vec3 euler = state.position + dt * v1.value;
            clamp_to_walls(euler);
            const NetVelocity v2 = velocity(euler);
            if (v2.contact_wire) return {state, v2.contact_wire};

            Vec3 heun = state.position + (0.5 * dt) * (v1.value + v2.value);
            clamp_to_walls(heun);

            const Vec3 diff = heun - euler;
            const double err = norm(diff);
            const double target = integ.tolerance * dt * speed;
            if (err <= target) {
                double factor = err > 0.0 ? 0.9 * target / err : 5.0;
                factor = std::clamp(factor, 0.2, 5.0);
                control.dt = std::min(dt * factor, max_dt_);
                CellState next;
                next.position = heun;
                next.time = state.time + dt;
                return {next, std::nullopt};
            }
            double factor = 0.9 * target / err;
            factor = std::clamp(factor, 0.1, 0.7);
            dt *= factor;
        }
    }

private:
    const CellSpecies& species_;
    const Scenario& scenario_;
    double mobility_;
    double gravity_z_;
    double v_mean_;
    double max_dt_;
    double near_zone_sq_;
    double displacement_cap_;
};

void check_initial_state(const CellState& state, const CellSpecies& species,
                         const Scenario& scenario) {
    const double r = species.hydrodynamic_radius;
    const ChannelGeometry& ch = scenario.channel;
    if (2.0 * r >= ch.width || 2.0 * r >= ch.depth)
        throw ValidationError("cell radius does not fit the channel cross-section");
    if (state.position.y < r || state.position.y > ch.width - r ||
        state.position.z < r || state.position.z > ch.depth - r ||
        state.position.x < 0.0 || state.position.x > ch.length)
        throw ValidationError("initial state outside the channel contact box");
}

}  // namespace

NetVelocity net_velocity(const CellState& state, const CellSpecies& species,
                         const Scenario& scenario) {
    return Stepper(species, scenario).velocity(state.position);
}

StepResult step_adaptive(const CellState& state, const CellSpecies& species,
                         const Scenario& scenario, StepControl& control) {
    return Stepper(species, scenario)
        .step(state, control, std::numeric_limits<double>::infinity());
}

Trajectory simulate_trajectory(const CellState& initial, const CellSpecies& species,
                               const Scenario& scenario, double sample_interval) {
    check_initial_state(initial, species, scenario);

    const Stepper stepper(species, scenario);
    const double t_max = scenario.max_time();
    const double capture_sq = stepper.capture_radius() * stepper.capture_radius();
    const double length = scenario.channel.length;

    Trajectory traj;
    traj.samples.push_back(initial);
    double next_sample = initial.time + sample_interval;

    CellState state = initial;
    StepControl control;

    const auto finish = [&](OutcomeKind kind, std::size_t wire) {
        if (traj.samples.back().time < state.time) traj.samples.push_back(state);
        traj.outcome.kind = kind;
        traj.outcome.wire_index = wire;
        return traj;
    };

    for (;;) {
        if (!scenario.wires.wire_centers.empty()) {
            const auto [idx, d_sq] = stepper.nearest_wire(state.position.cross_flow());
            if (d_sq <= capture_sq) return finish(OutcomeKind::Captured, idx);
        }
        if (state.position.x >= length) return finish(OutcomeKind::Escaped, 0);
        // Treat "within one minimal step of the horizon" as reached, so the
        // terminal partial step cannot underflow the stiffness guard.
        if (state.time >= t_max || t_max - state.time <= scenario.integrator.min_dt)
            return finish(OutcomeKind::MaxTimeExceeded, 0);

        StepResult result;
        try {
            result = stepper.step(state, control, t_max - state.time);
        } catch (const StiffnessError& e) {
            if (traj.samples.back().time < state.time) traj.samples.push_back(state);
            throw StiffnessError(e.what(), state, std::move(traj));
        }
        if (result.contact_wire)
            return finish(OutcomeKind::Captured, *result.contact_wire);

        state = result.state;
        if (sample_interval > 0.0 && state.time >= next_sample) {
            traj.samples.push_back(state);
            do {
                next_sample += sample_interval;
            } while (state.time >= next_sample);
        }
    }
}

Trajectory simulate_trajectory(const CellState& initial, const CellSpecies& species,
                               const Scenario& scenario) {
    const double interval =
        scenario.max_time() / static_cast<double>(scenario.limits.sample_count);
    return simulate_trajectory(initial, species, scenario, interval);
}

}  // namespace magsep
