#include "spsfg/report.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"

#include "spsfg/config_text.hpp"
#include "spsfg/conversion.hpp"
#include "spsfg/error.hpp"
#include "spsfg/simkit.hpp"

namespace spsfg {

BudgetReport budget_report(const ExperimentConfig& c) {
  c.validate();
  BudgetReport r;
  const WaveguideSpec w = resolve_waveguide(c);
  r.poling_period_um = w.grating.period_um;
  r.operating_temperature_c = w.grating.temperature_c;
  r.bandwidth_ghz_cm = tuning_curve_bandwidth_ghz_cm(c.sellmeier, w);
  r.peak_photon_efficiency = photon_level_peak(w);
  r.effective = converged_effective_efficiency(c.sellmeier, w, c.signal, c.idler, 0.005, c.simulation.threads);
  r.conversion_efficiency = c.simulation.efficiency_override.value_or(r.effective.value);

  const auto& src = c.sources;
  if (src.dfg.power_w) {
    const double at_dwdm = photons_per_pulse(*src.dfg.power_w, src.dfg.wavelength_nm, c.clock.rate_hz);
    r.stages.push_back({"dfg.at_dwdm_output", at_dwdm});
    r.stages.push_back({"dfg.in_waveguide_from_power", at_dwdm * src.dfg.dwdm_to_waveguide.product()});
  }
  if (auto m = src.dfg_mean_photons(c.clock)) {
    r.stages.push_back({"dfg.in_waveguide", *m});
    r.stages.push_back({"dfg.converting", *m * src.dfg.to_waveguide.product()});
  }
  if (src.spdc.pair_probability) {
    const double p = *src.spdc.pair_probability;
    r.stages.push_back({"spdc.pairs", p});
    r.stages.push_back({"spdc.signal_in_waveguide", p * src.spdc.to_waveguide.product()});
    r.stages.push_back({"spdc.herald_at_d2", p * src.spdc.to_herald_detector.product()});
  }
  r.chains = {{"spdc_to_waveguide", src.spdc.to_waveguide.product()},
              {"herald_to_d2", src.spdc.to_herald_detector.product()},
              {"dfg_to_waveguide", src.dfg.to_waveguide.product()},
              {"dwdm_to_waveguide", src.dfg.dwdm_to_waveguide.product()},
              {"waveguide_to_d1", c.waveguide_to_d1.product()},
              {"waveguide_to_d1_with_coupling", c.waveguide_to_d1.product() * c.waveguide.coupling}};

  try {
    r.beta = beta_product(c.sources, c.clock);
    r.beta_available = true;
  } catch (const ValidationError& e) {
    r.beta_error = e.what();
  }
  if (r.beta_available) {
    r.predicted_rate_hz = predicted_sfg_rate(r.conversion_efficiency, r.beta.value);
    if (c.measurement.rate_per_hour && r.beta.value > 0) {
      const Estimate rate{*c.measurement.rate_per_hour, c.measurement.rate_error_per_hour};
      r.measured_rate_per_hour = rate;
      const Estimate eta = extract_sfg_efficiency(Estimate{from_per_hour(rate.value), from_per_hour(rate.error)},
                                                  r.beta.value);
      r.extracted_efficiency = eta;
      r.intrinsic = intrinsic_efficiency(eta, c.waveguide_to_d1, c.waveguide.coupling);
    }
  }

  r.signal_coherence_ps = coherence_time_ps(c.signal.center_nm, c.signal.bandwidth_nm);
  r.idler_coherence_ps = coherence_time_ps(c.idler.center_nm, c.idler.bandwidth_nm);
  r.sfg_wavelength_nm = sum_frequency_wavelength(c.signal.center_nm, c.idler.center_nm);
  r.walkoff_ps = temporal_walkoff(c.sellmeier, c.signal.center_nm, r.sfg_wavelength_nm,
                                  c.waveguide.grating.length_cm);
  r.pulse_duration_ps = c.clock.pulse_duration_ps;

  const ShgInjector inj = shg_background_injector(c);
  r.shg_calibration = inj.calibration;
  r.shg_kappa = inj.kappa;
  r.shg_rate_at_operating_hz = inj.rate_hz;
  r.shg_fraction_of_dark = c.d1.dark_rate_hz > 0 ? inj.rate_hz / c.d1.dark_rate_hz : 0;
  for (std::size_t i = 0; i < c.noise.powers_nw.size(); ++i) {
    NoiseRow row;
    row.power_nw = c.noise.powers_nw[i];
    row.photons_per_pulse = dfg_photons_from_power(c, row.power_nw * 1e-9);
    row.calculated_hz = inj.rate_for_photons(row.photons_per_pulse, c.clock.rate_hz);
    if (i < c.noise.measured_hz.size()) row.measured_hz = c.noise.measured_hz[i];
    r.noise.push_back(row);
  }
  return r;
}

namespace {

nlohmann::json estimate_json(const std::optional<Estimate>& e) {
  if (!e) return nullptr;
  return {{"value", e->value}, {"error", e->error}};
}

}  // namespace

std::string budget_report_json(const BudgetReport& r, const std::string& version, const std::string& hash) {
  using nlohmann::json;
  json j;
  j["tool_version"] = version;
  j["config_hash"] = hash;
  json stages = json::object(), chains = json::object();
  for (const auto& it : r.stages) stages[it.label] = it.value;
  for (const auto& it : r.chains) chains[it.label] = it.value;
  j["photons_per_pulse"] = stages;
  j["chains"] = chains;
  j["waveguide"] = {{"poling_period_um", r.poling_period_um},
                    {"operating_temperature_c", r.operating_temperature_c},
                    {"bandwidth_ghz_cm", r.bandwidth_ghz_cm}};
  j["efficiency"] = {{"peak_photon_level", r.peak_photon_efficiency},
                     {"effective", r.effective.value},
                     {"effective_relative_change", r.effective.relative_change},
                     {"effective_halvings", r.effective.halvings},
                     {"used_for_prediction", r.conversion_efficiency},
                     {"extracted", estimate_json(r.extracted_efficiency)},
                     {"intrinsic", estimate_json(r.intrinsic)}};
  json beta;
  if (r.beta_available) {
    beta["value_hz"] = r.beta.value;
    json items = json::array();
    for (const auto& it : r.beta.items) items.push_back({{"label", it.label}, {"value", it.value}});
    beta["items"] = items;
  } else {
    beta["value_hz"] = nullptr;
    beta["error"] = r.beta_error;
  }
  j["beta"] = beta;
  j["rates"] = {{"predicted_hz", r.beta_available ? json(r.predicted_rate_hz) : json(nullptr)},
                {"predicted_per_hour", r.beta_available ? json(per_hour(r.predicted_rate_hz)) : json(nullptr)},
                {"measured_per_hour", estimate_json(r.measured_rate_per_hour)}};
  j["timing"] = {{"signal_coherence_ps", r.signal_coherence_ps},
                 {"idler_coherence_ps", r.idler_coherence_ps},
                 {"sfg_wavelength_nm", r.sfg_wavelength_nm},
                 {"walkoff_ps", r.walkoff_ps},
                 {"pulse_duration_ps", r.pulse_duration_ps},
                 {"walkoff_exceeds_pulse", r.walkoff_ps > r.pulse_duration_ps}};
  json rows = json::array();
  for (const auto& n : r.noise)
    rows.push_back({{"power_nw", n.power_nw},
                    {"photons_per_pulse", n.photons_per_pulse},
                    {"calculated_hz", n.calculated_hz},
                    {"measured_hz", n.measured_hz ? json(*n.measured_hz) : json(nullptr)}});
  j["shg_noise"] = {{"calibration", r.shg_calibration},
                    {"kappa_per_pulse", r.shg_kappa},
                    {"rate_at_operating_point_hz", r.shg_rate_at_operating_hz},
                    {"fraction_of_d1_dark_rate", r.shg_fraction_of_dark},
                    {"table", rows}};
  return j.dump(2) + "\n";
}

std::string budget_report_text(const BudgetReport& r) {
  std::ostringstream os;
  auto num = [](double v) { return format_number(v); };
  os << "Waveguide\n"
     << "  poling period            " << num(r.poling_period_um) << " um\n"
     << "  operating temperature    " << num(r.operating_temperature_c) << " C\n"
     << "  tuning-curve bandwidth   " << num(r.bandwidth_ghz_cm) << " GHz cm\n"
     << "Efficiency (photon level)\n"
     << "  SHG peak                 " << num(r.peak_photon_efficiency) << "\n"
     << "  spectral overlap         " << num(r.effective.value) << "\n"
     << "  used for prediction      " << num(r.conversion_efficiency) << "\n";
  os << "Photons per pulse\n";
  for (const auto& it : r.stages) os << "  " << it.label << " = " << num(it.value) << "\n";
  os << "Chain transmissions\n";
  for (const auto& it : r.chains) os << "  " << it.label << " = " << num(it.value) << "\n";
  os << "Beta product\n";
  if (r.beta_available) {
    for (const auto& it : r.beta.items) os << "  " << it.label << " = " << num(it.value) << "\n";
    os << "  beta                     " << num(r.beta.value) << " Hz\n"
       << "  predicted rate           " << num(per_hour(r.predicted_rate_hz)) << " per hour\n";
  } else {
    os << "  unavailable: " << r.beta_error << "\n";
  }
  if (r.extracted_efficiency) {
    os << "  measured rate            " << num(r.measured_rate_per_hour->value) << " +- "
       << num(r.measured_rate_per_hour->error) << " per hour\n"
       << "  extracted efficiency     " << num(r.extracted_efficiency->value) << " +- "
       << num(r.extracted_efficiency->error) << "\n"
       << "  intrinsic efficiency     " << num(r.intrinsic->value) << " +- " << num(r.intrinsic->error) << "\n";
  }
  os << "Timing\n"
     << "  coherence (signal, idler) " << num(r.signal_coherence_ps) << ", " << num(r.idler_coherence_ps) << " ps\n"
     << "  walk-off to " << num(r.sfg_wavelength_nm) << " nm  " << num(r.walkoff_ps) << " ps (pulse "
     << num(r.pulse_duration_ps) << " ps)\n";
  os << "SHG noise at D1\n"
     << "  at operating photon number " << num(r.shg_rate_at_operating_hz) << " Hz ("
     << num(100 * r.shg_fraction_of_dark) << " % of dark rate)\n";
  for (const auto& n : r.noise) {
    os << "  " << num(n.power_nw) << " nW: calculated " << num(n.calculated_hz) << " Hz";
    if (n.measured_hz) os << ", measured " << num(*n.measured_hz) << " Hz";
    os << "\n";
  }
  return os.str();
}

std::string noise_table_csv(const BudgetReport& r, const std::vector<std::string>& preamble) {
  std::ostringstream os;
  for (const auto& line : preamble) os << "# " << line << '\n';
  os << "power_nW,measured_Hz,calculated_Hz,photons_per_pulse\n";
  for (const auto& n : r.noise)
    os << format_number(n.power_nw) << ',' << (n.measured_hz ? format_number(*n.measured_hz) : "") << ','
       << format_number(n.calculated_hz) << ',' << format_number(n.photons_per_pulse) << '\n';
  return os.str();
}

}  // namespace spsfg
