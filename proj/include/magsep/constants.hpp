#ifndef MAGSEP_CONSTANTS_HPP
#define MAGSEP_CONSTANTS_HPP

namespace magsep {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kHalfPi = kPi / 2.0;
inline constexpr double kTwoPi = 2.0 * kPi;

// Vacuum permeability, H/m.
inline constexpr double kMu0 = 4.0e-7 * kPi;

// Standard gravity, m/s^2.
inline constexpr double kGravity = 9.80665;

}  // namespace magsep

#endif
