#pragma once

#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

namespace spsfg {

/// Ordered list of labelled transmission factors, each in (0, 1].
class TransmissionChain {
 public:
  struct Factor {
    std::string label;
    double transmission;
  };

  TransmissionChain() = default;
  TransmissionChain(std::initializer_list<Factor> factors);

  /// Throws ValidationError for a factor outside (0, 1] or a repeated label.
  void add(std::string label, double transmission);

  const std::vector<Factor>& factors() const { return factors_; }
  bool empty() const { return factors_.empty(); }
  double product() const;

 private:
  std::vector<Factor> factors_;
};

struct ClockSpec {
  double rate_hz = 0;
  double pulse_duration_ps = 0;

  void validate() const;
  double period_ns() const { return 1e9 / rate_hz; }
};

/// Heralded SPDC arm. Unset optionals are reported by name in beta_product.
struct SpdcBudget {
  std::optional<double> pair_probability;
  double heralded_g2 = 0;
  TransmissionChain to_waveguide;
  TransmissionChain to_herald_detector;
  std::optional<double> herald_detection_efficiency;
};

/// Weak coherent DFG arm. `mean_photons` is per pulse inside the waveguide;
/// when absent it follows from `power_w` measured at the DWDM output and the
/// `dwdm_to_waveguide` chain.
struct DfgBudget {
  std::optional<double> mean_photons;
  std::optional<double> power_w;
  double wavelength_nm = 0;
  double fiber_coupling = 1.0;
  TransmissionChain dwdm_to_waveguide;
  TransmissionChain to_waveguide;
  std::optional<double> upconversion_detection_efficiency;
};

struct SourceBudget {
  SpdcBudget spdc;
  DfgBudget dfg;

  void validate() const;
  /// DFG mean photons per pulse inside the waveguide, or nullopt when neither
  /// the photon number nor a power is configured.
  std::optional<double> dfg_mean_photons(const ClockSpec& clock) const;
};

/// n = lambda P / (h c) / f.
double photons_per_pulse(double power_w, double wavelength_nm, double rate_hz);

double chain_transmission(const TransmissionChain& chain);

/// R = (P mu)^2 * eta_SHG * L^2 * lambda / (h c) * calibration, eta in %/(W cm^2).
double shg_noise_rate(double power_w, double fiber_coupling, double efficiency_pct_per_w_cm2,
                      double length_cm, double wavelength_nm, double calibration = 1.0);

/// Calibration constant that makes shg_noise_rate hit (anchor power, anchor rate).
double shg_noise_calibration(double anchor_power_w, double anchor_rate_hz, double fiber_coupling,
                             double efficiency_pct_per_w_cm2, double length_cm, double wavelength_nm);

struct LineItem {
  std::string label;
  double value;
};

struct BetaProduct {
  std::vector<LineItem> items;
  double value = 0;
};

/// Product of source probabilities, transmissions and detector efficiencies
/// times the repetition rate, in Hz.
BetaProduct beta_product(const SourceBudget& budget, const ClockSpec& clock);

struct Estimate {
  double value = 0;
  double error = 0;
};

double extract_sfg_efficiency(double rate_hz, double beta_hz);
Estimate extract_sfg_efficiency(Estimate rate_hz, double beta_hz);

double predicted_sfg_rate(double efficiency, double beta_hz);

inline double per_hour(double rate_hz) { return rate_hz * 3600.0; }
inline double from_per_hour(double counts_per_hour) { return counts_per_hour / 3600.0; }

/// Overall efficiency divided by the loss-chain product and waveguide coupling.
double intrinsic_efficiency(double overall, const TransmissionChain& losses, double coupling);
Estimate intrinsic_efficiency(Estimate overall, const TransmissionChain& losses, double coupling);

}  // namespace spsfg
