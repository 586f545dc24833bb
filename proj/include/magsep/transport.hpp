#ifndef MAGSEP_TRANSPORT_HPP
#define MAGSEP_TRANSPORT_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "magsep/magnetics.hpp"
#include "magsep/vec.hpp"

namespace magsep {

// Channel box: depth H along z, width W along y, length L along x (flow).
struct ChannelGeometry {
    double depth = 0.0;   // H, m
    double width = 0.0;   // W, m
    double length = 0.0;  // L, m

    void validate() const;
    // Plane Poiseuille assumes W >> H; returns false when that is shaky.
    bool plane_flow_ok() const { return width >= 5.0 * depth; }
};

struct FluidConfig {
    double viscosity = 0.0;  // eta, Pa s
    double density = 0.0;    // rho_f, kg/m^3
    double flow_rate = 0.0;  // Q, m^3/s

    void validate() const;
};

struct CellSpecies {
    std::string label;
    CellMagnetics magnetics;
    double hydrodynamic_radius = 0.0;  // R_h, m (drag only; volume is authoritative)
    double density = 0.0;              // rho_c, kg/m^3

    void validate() const;
};

struct CellState {
    Vec3 position;     // m
    double time = 0.0; // s
};

enum class OutcomeKind { Captured, Escaped, MaxTimeExceeded };

struct Outcome {
    OutcomeKind kind = OutcomeKind::Escaped;
    std::size_t wire_index = 0;  // valid when kind == Captured
};

struct Trajectory {
    std::vector<CellState> samples;  // strictly increasing time, terminal last
    Outcome outcome;

    const CellState& terminal() const { return samples.back(); }
};

struct IntegratorSettings {
    double tolerance = 1e-3;  // relative displacement error per step
    double initial_dt = 1e-4; // s
    double min_dt = 1e-9;     // s, below this the step is declared stiff
    double max_dt = 0.0;      // s, 0 = derived from max_time

    void validate() const;
};

struct TransportLimits {
    double max_time_factor = 10.0;        // t_max = factor * L / v_mean
    std::size_t sample_count = 2000;      // samples per trajectory at t_max/sample_count
    double capture_radius_multiplier = 1.0;  // capture at multiplier * (a + R_h)

    void validate() const;
};

// Complete physical description of one experiment (species left out: one
// scenario serves all species in an ensemble).
struct Scenario {
    ChannelGeometry channel;
    FluidConfig fluid;
    FieldConfig field;
    WireArray wires;
    IntegratorSettings integrator;
    TransportLimits limits;

    void validate() const;

    double mean_velocity() const;  // Q / (W H)
    double max_time() const;       // max_time_factor * L / v_mean
};

// Thrown when the adaptive step collapses below min_dt. Carries the
// position at which the integrator gave up and the trajectory so far.
class StiffnessError : public std::runtime_error {
public:
    StiffnessError(const std::string& message, const CellState& where, Trajectory partial);

    const CellState& where() const { return where_; }
    const Trajectory& partial() const { return partial_; }

private:
    CellState where_;
    Trajectory partial_;
};

// v_mean = Q / (W H).
double mean_velocity(double flow_rate, const ChannelGeometry& geom);

// Plane Poiseuille profile: v(z) = 6 v_mean (z/H)(1 - z/H). Throws
// ValidationError for z outside [0, H].
double poiseuille_velocity(double z, double depth, double v_mean);

// Stokes mobility b = 1 / (6 pi eta R_h), m/(N s).
double drag_mobility(const CellSpecies& species, const FluidConfig& fluid);

// Buoyant weight, z component: -(rho_c - rho_f) V g.
double gravity_force_z(const CellSpecies& species, const FluidConfig& fluid);

// Overdamped velocity: Poiseuille advection plus mobility times the sum of
// magnetic and gravitational forces. `contact_wire` is set instead of a
// velocity when the position touches a wire.
struct NetVelocity {
    Vec3 value;
    std::optional<std::size_t> contact_wire;
};

NetVelocity net_velocity(const CellState& state, const CellSpecies& species,
                         const Scenario& scenario);

// Adaptive-step state threaded through consecutive calls.
struct StepControl {
    double dt = 0.0;  // next attempted step, s
};

// One accepted step of the embedded Heun-Euler pair, or a wire contact.
struct StepResult {
    CellState state;
    std::optional<std::size_t> contact_wire;
};

StepResult step_adaptive(const CellState& state, const CellSpecies& species,
                         const Scenario& scenario, StepControl& control);

// Integrate a cell until capture, escape at x >= L, or t >= t_max.
// `sample_interval` <= 0 suppresses intermediate samples (initial and
// terminal states are always recorded). Throws StiffnessError with the
// partial trajectory when the step size underflows.
Trajectory simulate_trajectory(const CellState& initial, const CellSpecies& species,
                               const Scenario& scenario, double sample_interval);

// Convenience overload using the scenario default t_max / sample_count.
Trajectory simulate_trajectory(const CellState& initial, const CellSpecies& species,
                               const Scenario& scenario);

}  // namespace magsep

#endif
