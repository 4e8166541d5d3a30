#include "spsfg/budget.hpp"

#include <algorithm>
#include <cmath>

#include "spsfg/constants.hpp"
#include "spsfg/error.hpp"

namespace spsfg {

TransmissionChain::TransmissionChain(std::initializer_list<Factor> factors) {
  for (const auto& f : factors) add(f.label, f.transmission);
}

void TransmissionChain::add(std::string label, double transmission) {
  if (!(transmission > 0 && transmission <= 1))
    throw ValidationError("transmission '" + label + "' must be in (0, 1]");
  const bool dup = std::any_of(factors_.begin(), factors_.end(),
                               [&](const Factor& f) { return f.label == label; });
  if (dup) throw ValidationError("transmission label '" + label + "' repeated");
  factors_.push_back({std::move(label), transmission});
}

double TransmissionChain::product() const {
  double p = 1.0;
  for (const auto& f : factors_) p *= f.transmission;
  return p;
}

void ClockSpec::validate() const {
  if (!(rate_hz > 0)) throw ValidationError("clock: repetition rate must be > 0");
  if (!(pulse_duration_ps > 0)) throw ValidationError("clock: pulse duration must be > 0");
}

void SourceBudget::validate() const {
  if (spdc.pair_probability && !(*spdc.pair_probability >= 0 && *spdc.pair_probability <= 1))
    throw ValidationError("spdc: pair probability must be in [0, 1]");
  if (!(spdc.heralded_g2 >= 0)) throw ValidationError("spdc: heralded g2 must be >= 0");
  if (spdc.herald_detection_efficiency &&
      !(*spdc.herald_detection_efficiency >= 0 && *spdc.herald_detection_efficiency <= 1))
    throw ValidationError("spdc: herald detection efficiency must be in [0, 1]");
  if (dfg.mean_photons && !(*dfg.mean_photons >= 0))
    throw ValidationError("dfg: mean photons must be >= 0");
  if (dfg.power_w && !(*dfg.power_w >= 0)) throw ValidationError("dfg: power must be >= 0");
  if (!(dfg.fiber_coupling > 0 && dfg.fiber_coupling <= 1))
    throw ValidationError("dfg: fiber coupling must be in (0, 1]");
  if (dfg.upconversion_detection_efficiency &&
      !(*dfg.upconversion_detection_efficiency >= 0 && *dfg.upconversion_detection_efficiency <= 1))
    throw ValidationError("dfg: upconversion detection efficiency must be in [0, 1]");
}

std::optional<double> SourceBudget::dfg_mean_photons(const ClockSpec& clock) const {
  if (dfg.mean_photons) return dfg.mean_photons;
  if (dfg.power_w)
    return photons_per_pulse(*dfg.power_w, dfg.wavelength_nm, clock.rate_hz) * dfg.dwdm_to_waveguide.product();
  return std::nullopt;
}

double photons_per_pulse(double power_w, double wavelength_nm, double rate_hz) {
  if (!(power_w >= 0)) throw DomainError("photons_per_pulse: power must be >= 0");
  if (!(wavelength_nm > 0)) throw DomainError("photons_per_pulse: wavelength must be > 0");
  if (!(rate_hz > 0)) throw DomainError("photons_per_pulse: repetition rate must be > 0");
  return power_w / photon_energy_j(wavelength_nm) / rate_hz;
}

double chain_transmission(const TransmissionChain& chain) { return chain.product(); }

double shg_noise_rate(double power_w, double fiber_coupling, double efficiency_pct_per_w_cm2,
                      double length_cm, double wavelength_nm, double calibration) {
  if (!(power_w >= 0)) throw DomainError("shg_noise_rate: power must be >= 0");
  if (!(fiber_coupling > 0 && fiber_coupling <= 1)) throw DomainError("shg_noise_rate: coupling must be in (0, 1]");
  if (!(efficiency_pct_per_w_cm2 > 0)) throw DomainError("shg_noise_rate: efficiency must be > 0");
  if (!(length_cm > 0)) throw DomainError("shg_noise_rate: length must be > 0");
  if (!(wavelength_nm > 0)) throw DomainError("shg_noise_rate: wavelength must be > 0");
  if (!(calibration >= 0)) throw DomainError("shg_noise_rate: calibration must be >= 0");
  const double coupled = power_w * fiber_coupling;
  const double eta_per_w = efficiency_pct_per_w_cm2 / 100.0 * length_cm * length_cm;
  return calibration * coupled * coupled * eta_per_w / photon_energy_j(wavelength_nm);
}

double shg_noise_calibration(double anchor_power_w, double anchor_rate_hz, double fiber_coupling,
                             double efficiency_pct_per_w_cm2, double length_cm, double wavelength_nm) {
  if (!(anchor_power_w > 0)) throw DomainError("shg_noise_calibration: anchor power must be > 0");
  if (!(anchor_rate_hz >= 0)) throw DomainError("shg_noise_calibration: anchor rate must be >= 0");
  return anchor_rate_hz / shg_noise_rate(anchor_power_w, fiber_coupling, efficiency_pct_per_w_cm2,
                                         length_cm, wavelength_nm, 1.0);
}

BetaProduct beta_product(const SourceBudget& budget, const ClockSpec& clock) {
  budget.validate();
  clock.validate();
  std::vector<std::string> missing;
  auto need = [&](const std::optional<double>& v, const char* name) {
    if (!v) missing.emplace_back(name);
    return v.value_or(0.0);
  };
  BetaProduct beta;
  auto& items = beta.items;
  items.push_back({"spdc.pair_probability", need(budget.spdc.pair_probability, "spdc.pair_probability")});
  for (const auto& f : budget.spdc.to_herald_detector.factors())
    items.push_back({"chains.herald_to_d2." + f.label, f.transmission});
  items.push_back({"spdc.herald_detection_efficiency",
                   need(budget.spdc.herald_detection_efficiency, "spdc.herald_detection_efficiency")});
  for (const auto& f : budget.spdc.to_waveguide.factors())
    items.push_back({"chains.spdc_to_waveguide." + f.label, f.transmission});
  items.push_back({"dfg.mean_photons", need(budget.dfg.mean_photons, "dfg.mean_photons")});
  for (const auto& f : budget.dfg.to_waveguide.factors())
    items.push_back({"chains.dfg_to_waveguide." + f.label, f.transmission});
  items.push_back({"dfg.upconversion_detection_efficiency",
                   need(budget.dfg.upconversion_detection_efficiency, "dfg.upconversion_detection_efficiency")});
  items.push_back({"clock.rate_hz", clock.rate_hz});
  if (!missing.empty()) {
    std::string msg = "beta_product: missing parameter";
    for (const auto& m : missing) msg += " " + m;
    throw ValidationError(msg);
  }
  beta.value = 1.0;
  for (const auto& item : items) beta.value *= item.value;
  return beta;
}

double extract_sfg_efficiency(double rate_hz, double beta_hz) {
  if (!(beta_hz > 0)) throw DomainError("extract_sfg_efficiency: beta must be > 0");
  if (!(rate_hz >= 0)) throw DomainError("extract_sfg_efficiency: rate must be >= 0");
  return rate_hz / beta_hz;
}

Estimate extract_sfg_efficiency(Estimate rate_hz, double beta_hz) {
  return {extract_sfg_efficiency(rate_hz.value, beta_hz), std::abs(rate_hz.error) / beta_hz};
}

double predicted_sfg_rate(double efficiency, double beta_hz) {
  if (!(efficiency >= 0) || !(beta_hz >= 0)) throw DomainError("predicted_sfg_rate: inputs must be >= 0");
  return efficiency * beta_hz;
}

double intrinsic_efficiency(double overall, const TransmissionChain& losses, double coupling) {
  if (!(coupling > 0 && coupling <= 1)) throw DomainError("intrinsic_efficiency: coupling must be in (0, 1]");
  return overall / (losses.product() * coupling);
}

Estimate intrinsic_efficiency(Estimate overall, const TransmissionChain& losses, double coupling) {
  const double scale = intrinsic_efficiency(1.0, losses, coupling);
  return {overall.value * scale, overall.error * scale};
}

}  // namespace spsfg
