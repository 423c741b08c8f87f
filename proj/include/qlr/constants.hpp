#pragma once

namespace qlr {

// 2018 CODATA
inline constexpr double kHartreeToEv = 27.211386245988;
// speed of light in atomic units (inverse fine-structure constant)
inline constexpr double kSpeedOfLightAu = 137.035999084;

// energies closer than this are treated as one degenerate level
inline constexpr double kDegeneracyTol = 1e-8;

inline constexpr double ha_to_ev(double ha) { return ha * kHartreeToEv; }
inline constexpr double ev_to_ha(double ev) { return ev / kHartreeToEv; }

} // namespace qlr
