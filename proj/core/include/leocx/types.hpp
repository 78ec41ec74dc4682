#pragma once

namespace leocx {

// Spherical-Earth model shared by propagation, geometry and path loss.
inline constexpr double kEarthRadiusM = 6371.0e3;
inline constexpr double kEarthMuM3S2 = 3.986004418e14;       // GM, WGS-84 value
inline constexpr double kEarthRotationRadS = 7.2921159e-5;   // sidereal rate
inline constexpr double kSpeedOfLightMS = 299792458.0;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kDegPerRad = 180.0 / kPi;
inline constexpr double kRadPerDeg = kPi / 180.0;

// Which of the two coexisting networks a satellite (or transmit budget)
// belongs to. The primary network serves user u, the secondary serves v.
enum class SystemRole { primary, secondary };

inline const char* to_string(SystemRole role) {
  return role == SystemRole::primary ? "primary" : "secondary";
}

}  // namespace leocx
