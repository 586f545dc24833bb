#ifndef MAGSEP_MAGNETICS_HPP
#define MAGSEP_MAGNETICS_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "magsep/constants.hpp"
#include "magsep/vec.hpp"

namespace magsep {

// Magnetic description of the wire material and the suspending buffer.
// Permeabilities are absolute (H/m). A missing saturation magnetization
// means the material never saturates.
struct MagneticMaterial {
    double mu_wire = 0.0;    // H/m
    double mu_buffer = 0.0;  // H/m
    std::optional<double> saturation_magnetization;  // A/m

    void validate() const;
};

// Idealized dot lattice: parallel wires along the flow axis, positioned in
// the cross-flow (y, z) plane. `half_width` is the lateral half-dimension a
// of the square cross-section; `aspect_factor` is the width/height ratio of
// the rectangular cross-section (1 for square dots).
struct WireArray {
    double half_width = 0.0;    // a, m
    double aspect_factor = 1.0; // w/h, dimensionless
    MagneticMaterial material;
    std::vector<Vec2> wire_centers;  // m, cross-flow plane

    void validate() const;
};

// Uniform external field, transverse to the wire axis.
struct FieldConfig {
    double flux_density = 0.0;      // B0, T
    Vec2 direction = {0.0, 1.0};    // unit vector in the cross-flow plane

    // H0 = B0 / mu_0.
    double external_field() const { return flux_density / kMu0; }

    void validate() const;
};

// Position relative to a wire axis: distance r and angle phi measured from
// the external field direction.
struct WirePolar {
    double r = 0.0;    // m
    double phi = 0.0;  // rad, normalized to (-pi, pi]

    static WirePolar normalized(double r, double phi);
};

// Force components along the radial and azimuthal unit vectors. Positive
// radial means directed away from the wire.
struct PolarForce {
    double radial = 0.0;     // N
    double azimuthal = 0.0;  // N
};

// Magnetic description of a suspended cell: volumetric susceptibility
// relative to the buffer and cell volume. delta_chi > 0 for deoxygenated
// RBCs, < 0 for WBCs.
struct CellMagnetics {
    double delta_chi = 0.0;  // dimensionless, SI volumetric
    double volume = 0.0;     // V_BC, m^3

    void validate() const;
};

// Parameters of the single-wire force kernel. `contrast` is the effective
// k (already clamped for saturation where applicable).
struct WireKernelParams {
    double half_width = 0.0;     // a, m
    double aspect_factor = 1.0;  // w/h
    double contrast = 0.0;       // k_eff, dimensionless
    double external_field = 0.0; // H0, A/m
    double mu0 = kMu0;           // H/m
};

// k = (mu_w - mu_b) / (mu_w + mu_b), in (-1, 1).
double contrast_factor(const MagneticMaterial& material);

// Saturation-aware contrast: min(k, M_s / (2 H0)) when the material
// saturates, plain k otherwise. Continuous across the regime boundary.
double effective_contrast(const MagneticMaterial& material, double external_field);

// sin(2 phi) and cos(2 phi) evaluated with quadrant-exact reduction: at the
// angles where sin(2 phi) vanishes analytically (phi = 0, +-pi/2, pi as
// doubles) the result is exactly zero, and mirror symmetry phi -> -phi is
// exact.
void double_angle(double phi, double& sin2phi, double& cos2phi);

// Single-wire magnetic force on a cell at `pos`, valid outside the wire.
// Returns nullopt when r <= a: the cell is in contact with the wire and the
// field model does not apply there (callers treat contact as capture).
std::optional<PolarForce> wire_force_polar(const WirePolar& pos, const CellMagnetics& cell,
                                           const WireKernelParams& params);

// Rotate a polar force at `pos` (angle measured from `field_direction`)
// into cross-flow Cartesian components. Throws ValidationError at r = 0.
Vec2 polar_to_cartesian_force(const PolarForce& f, const WirePolar& pos,
                              const Vec2& field_direction);

// Force summed over an array of wires, or the index of a wire the position
// is in contact with. Mutual magnetization of the wires is neglected.
struct SuperposedForce {
    Vec2 force;                                // N, cross-flow components
    std::optional<std::size_t> contact_wire;   // set when r <= a for some wire

    bool in_contact() const { return contact_wire.has_value(); }
};

SuperposedForce superpose_forces(const Vec2& position, const CellMagnetics& cell,
                                 const WireArray& array, const FieldConfig& field);

}  // namespace magsep

#endif
