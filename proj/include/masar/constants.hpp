#ifndef MASAR_CONSTANTS_HPP
#define MASAR_CONSTANTS_HPP

#include <numbers>

namespace masar::constants {

// CODATA 2018 (exact SI values where defined).
inline constexpr double planck = 6.62607015e-34;       // J s
inline constexpr double boltzmann = 1.380649e-23;      // J/K
inline constexpr double speed_of_light = 299792458.0;  // m/s
inline constexpr double vacuum_permeability = 1.25663706212e-6;  // N/A^2
inline constexpr double avogadro = 6.02214076e23;      // 1/mol

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace masar::constants

#endif
