#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spsfg/budget.hpp"
#include "spsfg/conversion.hpp"
#include "spsfg/dispersion.hpp"

namespace spsfg {

enum class DetectorMode { free_running, gated };

/// Single-photon detector. Free-running detectors use `dark_rate_hz` and may
/// be conditioned on the laser clock (`clock_window_ns`, 0 = unconditioned);
/// gated detectors use `dark_probability_per_gate`, `gate_window_ns` and
/// `gate_offset_ns` (gate centre relative to the triggering click).
struct DetectorSpec {
  DetectorMode mode = DetectorMode::free_running;
  double efficiency = 1.0;
  double dark_rate_hz = 0;
  double dark_probability_per_gate = 0;
  double jitter_ps = 0;  // FWHM
  double gate_window_ns = 0;
  double gate_offset_ns = 0;
  double clock_window_ns = 0;

  void validate() const;
};

DetectorMode parse_detector_mode(const std::string& name);
const char* to_string(DetectorMode mode);

/// Pair-number statistics of the SPDC source per pulse. `coherent` is a
/// Poissonian telecom field with no herald correlation (the clock heralds).
enum class PairStatistics { poisson, thermal, single, coherent };

PairStatistics parse_pair_statistics(const std::string& name);
const char* to_string(PairStatistics stats);

/// Where the crystal temperature sits during SFG: at the calibration
/// temperature, or tuned so the phase-matching ridge crosses the field centres.
enum class OperatingPoint { calibration, tuned };

OperatingPoint parse_operating_point(const std::string& name);
const char* to_string(OperatingPoint op);

struct NoiseSettings {
  std::vector<double> powers_nw;
  std::vector<double> measured_hz;  // optional column; empty or same length
  double anchor_power_nw = 0;
  double anchor_rate_hz = 0;
  double shg_relative_efficiency = 0;  // effective eta_SHG / eta_peak at the noise wavelength
  double shg_wavelength_nm = 0;
};

struct MeasurementSettings {
  std::optional<double> rate_per_hour;
  double rate_error_per_hour = 0;
};

struct SimulationSettings {
  double duration_s = 3600;
  std::uint64_t seed = 1;
  double bin_width_ns = 0.32;
  double delay_ps = 0;
  std::optional<double> efficiency_override;
  double scan_mean_photons = 0;  // DFG photons per pulse in the waveguide during delay scans
  double scan_point_duration_s = 600;
  double g2_arm_efficiency = 1.0;
  unsigned threads = 0;
};

/// Everything needed to reproduce the setup: sources, waveguide, detectors,
/// transmission chains, laser clock and run settings.
struct ExperimentConfig {
  ClockSpec clock;
  SellmeierModel sellmeier = SellmeierModel::congruent_lithium_niobate();
  std::string sellmeier_source = "jundt1997";
  WaveguideSpec waveguide;
  OperatingPoint operating_point = OperatingPoint::tuned;
  FieldSpec signal;
  FieldSpec idler;
  double herald_wavelength_nm = 0;
  PairStatistics pair_statistics = PairStatistics::poisson;
  SourceBudget sources;
  DetectorSpec d1;
  DetectorSpec d2;
  TransmissionChain waveguide_to_d1;
  NoiseSettings noise;
  MeasurementSettings measurement;
  SimulationSettings simulation;

  void validate() const;
};

/// Waveguide with the poling period calibrated and, for OperatingPoint::tuned,
/// the crystal temperature set to phase-match the signal and idler centres.
WaveguideSpec resolve_waveguide(const ExperimentConfig& config);

/// Converged spectral-overlap efficiency for the configured fields.
EffectiveEfficiency resolve_effective_efficiency(const ExperimentConfig& config);

/// Per photon-pair conversion probability used by the simulator: the
/// override when set, else the converged effective efficiency.
double conversion_efficiency(const ExperimentConfig& config);

}  // namespace spsfg
