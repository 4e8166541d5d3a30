#include "spsfg/experiment.hpp"

#include <cmath>

#include "spsfg/error.hpp"

namespace spsfg {

void DetectorSpec::validate() const {
  if (!(efficiency >= 0 && efficiency <= 1)) throw ValidationError("detector: efficiency must be in [0, 1]");
  if (!(jitter_ps >= 0)) throw ValidationError("detector: jitter must be >= 0");
  if (mode == DetectorMode::gated) {
    if (!(gate_window_ns > 0)) throw ValidationError("detector: gated mode needs gate_window_ns > 0");
    if (!(dark_probability_per_gate >= 0 && dark_probability_per_gate <= 1))
      throw ValidationError("detector: dark probability per gate must be in [0, 1]");
  } else {
    if (!(dark_rate_hz >= 0)) throw ValidationError("detector: dark rate must be >= 0");
    if (!(clock_window_ns >= 0)) throw ValidationError("detector: clock window must be >= 0");
  }
}

DetectorMode parse_detector_mode(const std::string& name) {
  if (name == "free_running") return DetectorMode::free_running;
  if (name == "gated") return DetectorMode::gated;
  throw ValidationError("unknown detector mode '" + name + "' (free_running | gated)");
}

const char* to_string(DetectorMode mode) {
  return mode == DetectorMode::gated ? "gated" : "free_running";
}

PairStatistics parse_pair_statistics(const std::string& name) {
  if (name == "poisson") return PairStatistics::poisson;
  if (name == "thermal") return PairStatistics::thermal;
  if (name == "single") return PairStatistics::single;
  if (name == "coherent") return PairStatistics::coherent;
  throw ValidationError("unknown pair statistics '" + name + "' (poisson | thermal | single | coherent)");
}

const char* to_string(PairStatistics stats) {
  switch (stats) {
    case PairStatistics::poisson: return "poisson";
    case PairStatistics::thermal: return "thermal";
    case PairStatistics::single: return "single";
    case PairStatistics::coherent: return "coherent";
  }
  return "poisson";
}

OperatingPoint parse_operating_point(const std::string& name) {
  if (name == "calibration") return OperatingPoint::calibration;
  if (name == "tuned") return OperatingPoint::tuned;
  throw ValidationError("unknown operating point '" + name + "' (calibration | tuned)");
}

const char* to_string(OperatingPoint op) {
  return op == OperatingPoint::tuned ? "tuned" : "calibration";
}

void ExperimentConfig::validate() const {
  clock.validate();
  waveguide.validate();
  signal.validate();
  idler.validate();
  sources.validate();
  d1.validate();
  d2.validate();
  if (d2.mode != DetectorMode::gated) throw ValidationError("detectors.d2 must be gated");
  if (!(herald_wavelength_nm > 0)) throw ValidationError("spdc: herald wavelength must be > 0");
  if (!noise.measured_hz.empty() && noise.measured_hz.size() != noise.powers_nw.size())
    throw ValidationError("noise: measured_hz must match powers_nw in length");
  if (!(simulation.duration_s > 0)) throw ValidationError("simulation: duration must be > 0");
  if (!(simulation.bin_width_ns > 0)) throw ValidationError("simulation: bin width must be > 0");
  if (!std::isfinite(simulation.delay_ps)) throw ValidationError("simulation: delay must be finite");
  if (simulation.efficiency_override && !(*simulation.efficiency_override >= 0))
    throw ValidationError("simulation: efficiency override must be >= 0");
  if (!(simulation.g2_arm_efficiency >= 0 && simulation.g2_arm_efficiency <= 1))
    throw ValidationError("simulation: g2 arm efficiency must be in [0, 1]");
}

WaveguideSpec resolve_waveguide(const ExperimentConfig& config) {
  WaveguideSpec w = calibrate_poling(config.sellmeier, config.waveguide);
  if (config.operating_point == OperatingPoint::tuned)
    w = tune_to_operating_point(config.sellmeier, w, config.signal.center_nm, config.idler.center_nm);
  return w;
}

EffectiveEfficiency resolve_effective_efficiency(const ExperimentConfig& config) {
  return converged_effective_efficiency(config.sellmeier, resolve_waveguide(config), config.signal,
                                        config.idler, 0.005, config.simulation.threads);
}

double conversion_efficiency(const ExperimentConfig& config) {
  if (config.simulation.efficiency_override) return *config.simulation.efficiency_override;
  return resolve_effective_efficiency(config).value;
}

}  // namespace spsfg
