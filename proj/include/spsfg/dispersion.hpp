#pragma once

#include <string>

namespace spsfg {

/// Coefficients of the temperature-dependent extraordinary-index formula
///
///   n^2 = a1 + b1 F + (a2 + b2 F) / (l^2 - (a3 + b3 F)^2)
///            + (a4 + b4 F) / (l^2 - a5^2) - a6 l^2,
///   F   = (T - t_ref) (T + t_offset),
///
/// with l in micrometres and T in degrees Celsius.
struct SellmeierCoefficients {
  double a1 = 0, a2 = 0, a3 = 0, a4 = 0, a5 = 0, a6 = 0;
  double b1 = 0, b2 = 0, b3 = 0, b4 = 0;
  double t_ref_c = 24.5;
  double t_offset_c = 570.82;
};

struct Interval {
  double lo = 0;
  double hi = 0;
  bool contains(double x) const { return x >= lo && x <= hi; }
  bool strictly_contains(double x) const { return x > lo && x < hi; }
};

/// Extraordinary index of a uniaxial crystal at a fixed temperature.
/// Evaluation outside the wavelength or temperature window throws
/// DomainError; there is no extrapolation.
class SellmeierModel {
 public:
  SellmeierModel(std::string name, SellmeierCoefficients coefficients,
                 Interval window_um, Interval temperature_window_c,
                 double temperature_c);

  /// Congruent lithium niobate (Jundt, Opt. Lett. 22, 1553 (1997)),
  /// 0.4-5 um, 20-250 C.
  static SellmeierModel congruent_lithium_niobate(double temperature_c = 25.0);

  const std::string& name() const { return name_; }
  const SellmeierCoefficients& coefficients() const { return coefficients_; }
  Interval window_um() const { return window_um_; }
  Interval temperature_window_c() const { return temperature_window_c_; }
  double temperature_c() const { return temperature_c_; }

  /// Same coefficients at another crystal temperature.
  SellmeierModel at_temperature(double temperature_c) const;

  double index(double wavelength_nm) const;
  /// dn/dlambda in 1/nm, analytic.
  double index_derivative(double wavelength_nm) const;

 private:
  double index_squared(double wavelength_um) const;
  void check_wavelength(double wavelength_nm) const;

  std::string name_;
  SellmeierCoefficients coefficients_;
  Interval window_um_;
  Interval temperature_window_c_;
  double temperature_c_;
};

/// Parse a coefficient set from config text. Keys (section [sellmeier]):
///   name, a1..a6, b1..b4, t_ref_c, t_offset_c, window_min_um, window_max_um,
///   temperature_min_c, temperature_max_c, temperature_c.
SellmeierModel parse_sellmeier(const std::string& text);
SellmeierModel load_sellmeier_file(const std::string& path);

/// First-order (or odd higher-order) poling grating.
struct QpmGrating {
  double period_um = 0;
  double length_cm = 0;
  int order = 1;
  double temperature_c = 25.0;

  void validate() const;
};

double refractive_index(const SellmeierModel& model, double wavelength_nm);

/// n_g = n - lambda dn/dlambda; lambda must be strictly inside the window.
double group_index(const SellmeierModel& model, double wavelength_nm);

/// (1/l1 + 1/l2)^-1, the generated wavelength of the sum-frequency process.
double sum_frequency_wavelength(double lambda1_nm, double lambda2_nm);

/// Delta k = 2 pi [n3/l3 - n1/l1 - n2/l2 - m/Lambda] in rad/m, with the
/// model evaluated at the grating temperature.
double phase_mismatch(const SellmeierModel& model, const QpmGrating& grating,
                      double lambda1_nm, double lambda2_nm);

/// Poling period (um) that phase-matches degenerate SHG at `peak_nm` at the
/// model temperature. Bracketed root finding; throws SolverError if the
/// bracket does not change sign or the residual exceeds 1e-6 rad/m.
double solve_poling_period(const SellmeierModel& model, double peak_nm, int order = 1);

/// Crystal temperature (C) at which `grating` phase-matches lambda1 + lambda2,
/// searched over the model's temperature window.
double solve_phase_matching_temperature(const SellmeierModel& model,
                                        const QpmGrating& grating,
                                        double lambda1_nm, double lambda2_nm);

/// Group-delay difference L |n_g(a) - n_g(b)| / c in ps.
double temporal_walkoff(const SellmeierModel& model, double lambda_a_nm,
                        double lambda_b_nm, double length_cm);

}  // namespace spsfg
