#include "magsep/magnetics.hpp"

#include <algorithm>
#include <cmath>

#include "magsep/errors.hpp"

namespace magsep {

void MagneticMaterial::validate() const {
    if (!(mu_wire > 0.0)) throw ValidationError("mu_wire must be positive");
    if (!(mu_buffer > 0.0)) throw ValidationError("mu_buffer must be positive");
    if (saturation_magnetization && !(*saturation_magnetization > 0.0))
        throw ValidationError("saturation_magnetization must be positive when set");
}

void WireArray::validate() const {
    if (!(half_width > 0.0)) throw ValidationError("wire half_width must be positive");
    if (!(aspect_factor > 0.0)) throw ValidationError("aspect_factor must be positive");
    material.validate();
    const double min_sep_sq = 4.0 * half_width * half_width;
    for (std::size_t i = 0; i < wire_centers.size(); ++i) {
        for (std::size_t j = i + 1; j < wire_centers.size(); ++j) {
            if (norm_squared(wire_centers[i] - wire_centers[j]) <= min_sep_sq)
                throw ValidationError("wire centers must be separated by more than 2a");
        }
    }
}

void FieldConfig::validate() const {
    if (!(flux_density >= 0.0)) throw ValidationError("flux_density must be non-negative");
    const double n = norm(direction);
    if (std::abs(n - 1.0) > 1e-6)
        throw ValidationError("field direction must be a unit vector");
}

void CellMagnetics::validate() const {
    if (!(volume > 0.0)) throw ValidationError("cell volume must be positive");
    if (!std::isfinite(delta_chi)) throw ValidationError("delta_chi must be finite");
}

WirePolar WirePolar::normalized(double r, double phi) {
    if (!(r >= 0.0)) throw ValidationError("polar radius must be non-negative");
    double p = std::remainder(phi, kTwoPi);  // [-pi, pi]
    if (p <= -kPi) p = kPi;                  // fold -pi onto +pi
    return {r, p};
}

double contrast_factor(const MagneticMaterial& material) {
    if (!(material.mu_wire > 0.0) || !(material.mu_buffer > 0.0))
        throw ValidationError("permeabilities must be positive");
    return (material.mu_wire - material.mu_buffer) / (material.mu_wire + material.mu_buffer);
}

double effective_contrast(const MagneticMaterial& material, double external_field) {
    const double k = contrast_factor(material);
    if (material.saturation_magnetization && external_field > 0.0)
        return std::min(k, *material.saturation_magnetization / (2.0 * external_field));
    return k;
}

void double_angle(double phi, double& sin2phi, double& cos2phi) {
    // Reduce phi against the nearest multiple of pi/2. The reduction is
    // exact for small integer multiples of M_PI_2, which makes sin(2 phi)
    // vanish identically at the cardinal angles and keeps the mirror
    // identity sin2(-phi) = -sin2(phi) exact.
    const double q = std::nearbyint(phi / kHalfPi);
    const double d = phi - q * kHalfPi;  // 2*phi = q*pi + 2*d
    const double s = std::sin(2.0 * d);
    const double c = std::cos(2.0 * d);
    const bool q_odd = std::fmod(q, 2.0) != 0.0;
    if (q_odd) {
        sin2phi = -s;
        cos2phi = -c;
    } else {
        sin2phi = s;
        cos2phi = c;
    }
}

std::optional<PolarForce> wire_force_polar(const WirePolar& pos, const CellMagnetics& cell,
                                           const WireKernelParams& params) {
    const double a = params.half_width;
    if (!(a > 0.0)) throw ValidationError("wire half_width must be positive");
    if (pos.r <= a) return std::nullopt;  // contact with the wire

    double s2 = 0.0, c2 = 0.0;
    double_angle(pos.phi, s2, c2);

    const double k = params.contrast;
    const double gamma = params.aspect_factor;
    const double h0 = params.external_field;
    const double a2_r2 = (a / pos.r) * (a / pos.r);
    const double a2_r3 = a2_r2 / pos.r;
    const double prefactor =
        2.0 * k * params.mu0 * cell.delta_chi * cell.volume * a2_r3 * gamma * h0 * h0;

    PolarForce f;
    f.radial = -prefactor * (k * gamma * a2_r2 + c2);
    f.azimuthal = -prefactor * s2;
    return f;
}

Vec2 polar_to_cartesian_force(const PolarForce& f, const WirePolar& pos,
                              const Vec2& field_direction) {
    if (!(pos.r > 0.0)) throw ValidationError("degenerate position: r must be positive");
    const Vec2 e_par = field_direction;
    const Vec2 e_perp = rot90(field_direction);
    const double c = std::cos(pos.phi);
    const double s = std::sin(pos.phi);
    const Vec2 radial_dir = c * e_par + s * e_perp;
    const Vec2 azimuthal_dir = -s * e_par + c * e_perp;
    return f.radial * radial_dir + f.azimuthal * azimuthal_dir;
}

SuperposedForce superpose_forces(const Vec2& position, const CellMagnetics& cell,
                                 const WireArray& array, const FieldConfig& field) {
    const double h0 = field.external_field();
    const double k = effective_contrast(array.material, h0);
    const double gamma = array.aspect_factor;
    const double a = array.half_width;
    const double a_sq = a * a;
    // Common scale of both force components; the trig factors are folded in
    // below without evaluating angles: with ct = d.e_par and st = d.e_perp,
    //   cos 2phi = (ct^2 - st^2)/r^2,  sin 2phi = 2 ct st / r^2,
    //   a_r = d/r,                      a_phi = rot90(d)/r,
    // which collapses the rotated polar force to polynomials in d.
    const double scale = 2.0 * k * kMu0 * cell.delta_chi * cell.volume * gamma * h0 * h0 * a_sq;
    const double k_gamma_a2 = k * gamma * a_sq;
    const Vec2 e_par = field.direction;
    const Vec2 e_perp = rot90(field.direction);

    SuperposedForce result;
    for (std::size_t i = 0; i < array.wire_centers.size(); ++i) {
        const Vec2 d = position - array.wire_centers[i];
        const double r_sq = norm_squared(d);
        if (r_sq <= a_sq) {
            result.contact_wire = i;
            result.force = Vec2{};
            return result;
        }
        const double ct = dot(d, e_par);
        const double st = dot(d, e_perp);
        const double inv_r6 = 1.0 / (r_sq * r_sq * r_sq);
        // F = -scale/r^6 * [ (k g a^2 + ct^2 - st^2) * d + 2 ct st * rot90(d) ]
        const double w_r = scale * inv_r6 * (k_gamma_a2 + ct * ct - st * st);
        const double w_p = scale * inv_r6 * (2.0 * ct * st);
        result.force.y -= w_r * d.y + w_p * (-d.z);
        result.force.z -= w_r * d.z + w_p * d.y;
    }
    return result;
}

}  // namespace magsep
