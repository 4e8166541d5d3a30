#pragma once

#include <numbers>

namespace spsfg {

// SI defining constants (exact since the 2019 redefinition).
inline constexpr double kSpeedOfLight = 299792458.0;    // m/s
inline constexpr double kPlanck = 6.62607015e-34;       // J s
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSecondsPerHour = 3600.0;

inline constexpr double kNm = 1e-9;
inline constexpr double kUm = 1e-6;
inline constexpr double kCm = 1e-2;
inline constexpr double kPs = 1e-12;
inline constexpr double kNs = 1e-9;
inline constexpr double kGHz = 1e9;
inline constexpr double kMHz = 1e6;

/// Photon energy hc/lambda in joules for a vacuum wavelength in nm.
inline constexpr double photon_energy_j(double wavelength_nm) {
  return kPlanck * kSpeedOfLight / (wavelength_nm * kNm);
}

/// Optical frequency in Hz for a vacuum wavelength in nm.
inline constexpr double frequency_hz(double wavelength_nm) {
  return kSpeedOfLight / (wavelength_nm * kNm);
}

/// FWHM of a Gaussian in units of its standard deviation.
inline constexpr double kGaussFwhmPerSigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)

}  // namespace spsfg
