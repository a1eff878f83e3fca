#pragma once

// CODATA 2018 values (exact where the SI defines them).
namespace collapse::si {

inline constexpr double hbar = 1.054571817e-34;       // J s
inline constexpr double boltzmann = 1.380649e-23;     // J / K
inline constexpr double nucleon_mass = 1.67262192e-27;  // kg (proton)

// Reference collapse-model constants.
inline constexpr double lambda0 = 1e-2;   // m^-2 s^-1
inline constexpr double alpha0 = 1e-18;   // m^2

}  // namespace collapse::si
