#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "spsfg/dispersion.hpp"

namespace spsfg {

enum class SpectralShape { gaussian, sech2 };

SpectralShape parse_spectral_shape(const std::string& name);
const char* to_string(SpectralShape shape);

/// A pulsed input field. Spectral density is normalised to unit area in nm.
struct FieldSpec {
  double center_nm = 0;
  double bandwidth_nm = 0;  // spectral FWHM
  double duration_ps = 0;   // intensity FWHM
  SpectralShape shape = SpectralShape::gaussian;
  double mean_photons = 0;

  void validate() const;
};

/// Normalised spectral density p(lambda) in 1/nm.
double spectral_density(const FieldSpec& field, double wavelength_nm);
/// Integral of p over [lo, hi], closed form.
double spectral_weight(const FieldSpec& field, double lo_nm, double hi_nm);

/// Waveguide description. `grating.temperature_c` is the crystal temperature
/// during SFG; the tuning curve is evaluated at `calibration_temperature_c`,
/// where the poling period puts the SHG peak at `peak_wavelength_nm`.
struct WaveguideSpec {
  QpmGrating grating;
  double shg_efficiency_pct_per_w_cm2 = 0;
  double peak_wavelength_nm = 0;
  double coupling = 1.0;
  double bandwidth_ghz_cm = 0;
  double time_bandwidth_product = 0;
  double calibration_temperature_c = 25.0;

  void validate() const;
  QpmGrating calibration_grating() const;
};

/// Solve the poling period at the calibration temperature and reset the
/// crystal temperature to it.
WaveguideSpec calibrate_poling(const SellmeierModel& model, WaveguideSpec waveguide);

/// Temperature-tune an already calibrated waveguide so that
/// Delta k(signal, idler) = 0.
WaveguideSpec tune_to_operating_point(const SellmeierModel& model, WaveguideSpec waveguide,
                                      double signal_nm, double idler_nm);

/// sinc^2(Delta k L / 2).
double qpm_response(double delta_k_per_m, double length_cm);

struct TuningPoint {
  double wavelength_nm;
  double relative;
  double absolute_pct_per_w_cm2;
};

/// Points from `from` to `to` inclusive (when reached) in steps of `step`.
std::vector<double> uniform_grid(double from_nm, double to_nm, double step_nm);

/// SHG tuning curve at the calibration temperature.
std::vector<TuningPoint> shg_tuning_curve(const SellmeierModel& model, const WaveguideSpec& waveguide,
                                          double from_nm, double to_nm, double step_nm);

/// Relative SHG efficiency averaged over one side-lobe period: 1/(2 x^2) for
/// |x| > pi (x = Delta k L / 2), the plain sinc^2 inside the main lobe. This
/// is what a smooth fit through a measured tail reports.
double sidelobe_averaged_response(const SellmeierModel& model, const WaveguideSpec& waveguide,
                                  double wavelength_nm);

/// FWHM of the SHG main lobe in generated frequency times the device length.
double tuning_curve_bandwidth_ghz_cm(const SellmeierModel& model, const WaveguideSpec& waveguide);

/// Single-photon-level SFG efficiency over (signal, idler) wavelengths.
/// Values are row-major, one row per signal wavelength.
struct EfficiencyMatrix {
  std::vector<double> signal_nm;
  std::vector<double> idler_nm;
  std::vector<double> values;
  double peak_value = 0;

  double operator()(std::size_t i, std::size_t j) const { return values[i * idler_nm.size() + j]; }
  double max() const;
  void validate() const;
};

EfficiencyMatrix sfg_efficiency_matrix(const SellmeierModel& model, const WaveguideSpec& waveguide,
                                       const std::vector<double>& signal_nm,
                                       const std::vector<double>& idler_nm, unsigned threads = 1);

/// eta_hat = eta/2 * hc/lambda * bandwidth*L / tbp, with eta in %/(W cm^2),
/// bandwidth in GHz cm, L in cm.
double classical_to_photon_level(double efficiency_pct_per_w_cm2, double wavelength_nm,
                                 double bandwidth_ghz_cm, double length_cm, double tbp);

double photon_level_peak(const WaveguideSpec& waveguide);

/// Trapezoidal double integral of p_s p_i eta_hat over the matrix grid.
/// Throws CoverageError when more than 0.1 % of the joint spectral weight lies
/// outside the grid.
double effective_sfg_efficiency(const FieldSpec& signal, const FieldSpec& idler,
                                const EfficiencyMatrix& matrix);

struct EffectiveEfficiency {
  double value = 0;
  double previous = 0;  // result at twice the final step
  double relative_change = 0;
  double signal_step_nm = 0;
  double idler_step_nm = 0;
  int halvings = 0;
};

/// Builds matrices around the two spectra and halves the step until two
/// successive results differ by less than `relative_tolerance`.
EffectiveEfficiency converged_effective_efficiency(const SellmeierModel& model,
                                                   const WaveguideSpec& waveguide,
                                                   const FieldSpec& signal, const FieldSpec& idler,
                                                   double relative_tolerance = 0.005,
                                                   unsigned threads = 1);

/// tau_c = lambda^2 / (c dlambda), in ps.
double coherence_time_ps(double center_nm, double bandwidth_nm);

/// CSV: header row "signal_nm\idler_nm,<idler grid>", then one row per signal
/// wavelength. `preamble` lines are emitted first as '# ' comments.
std::string matrix_to_csv(const EfficiencyMatrix& matrix,
                          const std::vector<std::string>& preamble = {});

}  // namespace spsfg
