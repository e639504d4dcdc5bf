#pragma once

namespace rampopt {

inline constexpr double k_hbar = 1.054571817e-34;     // J s
inline constexpr double k_gravity = 9.81;             // m/s^2
inline constexpr double k_mass_he_star = 6.6465e-27;  // kg, metastable helium

}  // namespace rampopt
