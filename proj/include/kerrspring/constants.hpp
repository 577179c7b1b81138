#pragma once

#include <numbers>

namespace kerrspring {

// CODATA 2018 exact / recommended values, SI units.
inline constexpr double kHbar = 1.054571817e-34;     // J s
inline constexpr double kSpeedOfLight = 299792458.0; // m/s
inline constexpr double kPi = std::numbers::pi;

// Kerr gain at which the intracavity power curve first becomes multivalued.
inline constexpr double kCriticalKerrGain = -8.0 / (3.0 * std::numbers::sqrt3);

// Normalized detuning of the maximum static optical spring.
inline constexpr double kOptimalDetuning = 1.0 / std::numbers::sqrt3;

}  // namespace kerrspring
