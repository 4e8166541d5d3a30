#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spsfg/budget.hpp"
#include "spsfg/experiment.hpp"

namespace spsfg {

struct NoiseRow {
  double power_nw = 0;
  double photons_per_pulse = 0;  // in the waveguide
  double calculated_hz = 0;
  std::optional<double> measured_hz;
};

/// Everything the budget subcommand prints: conversion anchors, the beta
/// product, predicted and extracted efficiencies, noise table and timing.
struct BudgetReport {
  std::vector<LineItem> stages;  // mean photons per pulse along each path
  std::vector<LineItem> chains;  // product of every configured chain
  double poling_period_um = 0;
  double operating_temperature_c = 0;
  double bandwidth_ghz_cm = 0;         // from the modelled tuning curve
  double peak_photon_efficiency = 0;   // eta_hat at the SHG peak
  EffectiveEfficiency effective;       // spectral overlap at the operating point
  double conversion_efficiency = 0;    // used for predictions (override or effective)

  BetaProduct beta;
  bool beta_available = false;
  std::string beta_error;
  double predicted_rate_hz = 0;

  std::optional<Estimate> measured_rate_per_hour;
  std::optional<Estimate> extracted_efficiency;
  std::optional<Estimate> intrinsic;

  double signal_coherence_ps = 0;
  double idler_coherence_ps = 0;
  double sfg_wavelength_nm = 0;
  double walkoff_ps = 0;  // signal vs generated photon over the device
  double pulse_duration_ps = 0;

  double shg_calibration = 0;
  double shg_kappa = 0;
  double shg_rate_at_operating_hz = 0;
  double shg_fraction_of_dark = 0;
  std::vector<NoiseRow> noise;
};

BudgetReport budget_report(const ExperimentConfig& config);

std::string budget_report_json(const BudgetReport& report, const std::string& version,
                               const std::string& config_hash);
std::string budget_report_text(const BudgetReport& report);
std::string noise_table_csv(const BudgetReport& report, const std::vector<std::string>& preamble = {});

}  // namespace spsfg
