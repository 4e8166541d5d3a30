#include "spsfg/conversion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "spsfg/config_text.hpp"
#include "spsfg/constants.hpp"
#include "spsfg/error.hpp"
#include "spsfg/parallel.hpp"

namespace spsfg {

namespace {

// sech^2 half-width parameter per unit FWHM: FWHM = 2 acosh(sqrt 2) w.
constexpr double kSech2FwhmPerWidth = 1.7627471740390860;

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

std::vector<double> trapezoid_weights(const std::vector<double>& x) {
  std::vector<double> w(x.size(), 0.0);
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double h = x[i + 1] - x[i];
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return w;
}

std::vector<double> centred_grid(double center, double half_span, double step) {
  const auto n = static_cast<long>(std::ceil(half_span / step));
  std::vector<double> g;
  g.reserve(2 * n + 1);
  for (long k = -n; k <= n; ++k) g.push_back(center + static_cast<double>(k) * step);
  return g;
}

}  // namespace

SpectralShape parse_spectral_shape(const std::string& name) {
  if (name == "gaussian") return SpectralShape::gaussian;
  if (name == "sech2") return SpectralShape::sech2;
  throw ValidationError("unknown spectral shape '" + name + "' (gaussian | sech2)");
}

const char* to_string(SpectralShape shape) {
  return shape == SpectralShape::gaussian ? "gaussian" : "sech2";
}

void FieldSpec::validate() const {
  if (!(center_nm > 0)) throw ValidationError("field: center wavelength must be > 0");
  if (!(bandwidth_nm > 0)) throw ValidationError("field: bandwidth must be > 0");
  if (!(duration_ps > 0)) throw ValidationError("field: pulse duration must be > 0");
  if (!(mean_photons >= 0)) throw ValidationError("field: mean photons must be >= 0");
}

double spectral_density(const FieldSpec& field, double wavelength_nm) {
  const double d = wavelength_nm - field.center_nm;
  if (field.shape == SpectralShape::gaussian) {
    const double sigma = field.bandwidth_nm / kGaussFwhmPerSigma;
    return std::exp(-0.5 * d * d / (sigma * sigma)) / (std::sqrt(2.0 * kPi) * sigma);
  }
  const double w = field.bandwidth_nm / kSech2FwhmPerWidth;
  const double s = 1.0 / std::cosh(d / w);
  return 0.5 * s * s / w;
}

double spectral_weight(const FieldSpec& field, double lo_nm, double hi_nm) {
  if (hi_nm <= lo_nm) return 0.0;
  const double a = lo_nm - field.center_nm;
  const double b = hi_nm - field.center_nm;
  if (field.shape == SpectralShape::gaussian) {
    const double sigma = field.bandwidth_nm / kGaussFwhmPerSigma;
    const double s = 1.0 / (std::sqrt(2.0) * sigma);
    return 0.5 * (std::erf(b * s) - std::erf(a * s));
  }
  const double w = field.bandwidth_nm / kSech2FwhmPerWidth;
  return 0.5 * (std::tanh(b / w) - std::tanh(a / w));
}

void WaveguideSpec::validate() const {
  if (!(grating.length_cm > 0)) throw ValidationError("waveguide: length must be > 0");
  if (grating.order <= 0 || grating.order % 2 == 0)
    throw ValidationError("waveguide: grating order must be a positive odd integer");
  if (!(shg_efficiency_pct_per_w_cm2 > 0)) throw ValidationError("waveguide: SHG efficiency must be > 0");
  if (!(peak_wavelength_nm > 0)) throw ValidationError("waveguide: peak wavelength must be > 0");
  if (!(coupling > 0 && coupling <= 1)) throw ValidationError("waveguide: coupling must be in (0, 1]");
  if (!(bandwidth_ghz_cm > 0)) throw ValidationError("waveguide: bandwidth must be > 0");
  if (!(time_bandwidth_product > 0 && time_bandwidth_product < 1))
    throw ValidationError("waveguide: time-bandwidth product must be in (0, 1)");
}

QpmGrating WaveguideSpec::calibration_grating() const {
  QpmGrating g = grating;
  g.temperature_c = calibration_temperature_c;
  return g;
}

WaveguideSpec calibrate_poling(const SellmeierModel& model, WaveguideSpec waveguide) {
  waveguide.validate();
  const SellmeierModel at_cal = model.at_temperature(waveguide.calibration_temperature_c);
  waveguide.grating.period_um =
      solve_poling_period(at_cal, waveguide.peak_wavelength_nm, waveguide.grating.order);
  waveguide.grating.temperature_c = waveguide.calibration_temperature_c;
  return waveguide;
}

WaveguideSpec tune_to_operating_point(const SellmeierModel& model, WaveguideSpec waveguide,
                                      double signal_nm, double idler_nm) {
  waveguide.validate();
  waveguide.grating.validate();
  waveguide.grating.temperature_c =
      solve_phase_matching_temperature(model, waveguide.grating, signal_nm, idler_nm);
  return waveguide;
}

double qpm_response(double delta_k_per_m, double length_cm) {
  if (!(length_cm > 0)) throw DomainError("qpm_response: length must be > 0");
  const double s = sinc(0.5 * delta_k_per_m * length_cm * kCm);
  return s * s;
}

std::vector<double> uniform_grid(double from_nm, double to_nm, double step_nm) {
  if (!(step_nm > 0)) throw DomainError("grid step must be > 0");
  std::vector<double> g;
  if (to_nm < from_nm) return g;
  const auto n = static_cast<std::size_t>(std::floor((to_nm - from_nm) / step_nm + 1e-9)) + 1;
  g.reserve(n);
  for (std::size_t i = 0; i < n; ++i) g.push_back(from_nm + static_cast<double>(i) * step_nm);
  return g;
}

std::vector<TuningPoint> shg_tuning_curve(const SellmeierModel& model, const WaveguideSpec& waveguide,
                                          double from_nm, double to_nm, double step_nm) {
  waveguide.validate();
  const auto grid = uniform_grid(from_nm, to_nm, step_nm);
  const QpmGrating g = waveguide.calibration_grating();
  std::vector<TuningPoint> out;
  out.reserve(grid.size());
  for (double l : grid) {
    const double rel = qpm_response(phase_mismatch(model, g, l, l), g.length_cm);
    out.push_back({l, rel, rel * waveguide.shg_efficiency_pct_per_w_cm2});
  }
  return out;
}

double sidelobe_averaged_response(const SellmeierModel& model, const WaveguideSpec& waveguide,
                                  double wavelength_nm) {
  const QpmGrating g = waveguide.calibration_grating();
  const double x = 0.5 * phase_mismatch(model, g, wavelength_nm, wavelength_nm) * g.length_cm * kCm;
  if (std::abs(x) <= kPi) {
    const double s = sinc(x);
    return s * s;
  }
  return 0.5 / (x * x);
}

double tuning_curve_bandwidth_ghz_cm(const SellmeierModel& model, const WaveguideSpec& waveguide) {
  const QpmGrating g = waveguide.calibration_grating();
  auto rel = [&](double l) { return qpm_response(phase_mismatch(model, g, l, l), g.length_cm); };
  const double peak = waveguide.peak_wavelength_nm;
  auto half_max_crossing = [&](double direction) {
    const double step = 1e-3;
    double inside = peak;
    double outside = peak + direction * step;
    for (int i = 0; rel(outside) >= 0.5; ++i) {
      if (i > 100000) throw SolverError("tuning_curve_bandwidth: no half-maximum crossing");
      inside = outside;
      outside += direction * step;
    }
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (inside + outside);
      (rel(mid) >= 0.5 ? inside : outside) = mid;
    }
    return 0.5 * (inside + outside);
  };
  const double lo = half_max_crossing(-1.0);
  const double hi = half_max_crossing(+1.0);
  // generated (second-harmonic) frequency is twice the fundamental
  const double dnu = 2.0 * (frequency_hz(lo) - frequency_hz(hi));
  return dnu / kGHz * g.length_cm;
}

double EfficiencyMatrix::max() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

void EfficiencyMatrix::validate() const {
  if (values.size() != signal_nm.size() * idler_nm.size())
    throw ValidationError("efficiency matrix: value count does not match grid sizes");
  auto increasing = [](const std::vector<double>& v) {
    return std::adjacent_find(v.begin(), v.end(), [](double a, double b) { return !(b > a); }) == v.end();
  };
  if (!increasing(signal_nm) || !increasing(idler_nm))
    throw ValidationError("efficiency matrix: grids must be strictly increasing");
  if (std::any_of(values.begin(), values.end(), [](double v) { return !(v >= 0); }))
    throw ValidationError("efficiency matrix: negative or NaN value");
}

EfficiencyMatrix sfg_efficiency_matrix(const SellmeierModel& model, const WaveguideSpec& waveguide,
                                       const std::vector<double>& signal_nm,
                                       const std::vector<double>& idler_nm, unsigned threads) {
  waveguide.validate();
  waveguide.grating.validate();
  EfficiencyMatrix m;
  m.signal_nm = signal_nm;
  m.idler_nm = idler_nm;
  m.peak_value = photon_level_peak(waveguide);
  m.values.assign(signal_nm.size() * idler_nm.size(), 0.0);
  const SellmeierModel crystal = model.at_temperature(waveguide.grating.temperature_c);
  const QpmGrating& g = waveguide.grating;
  parallel_for(signal_nm.size(), threads, [&](std::size_t i) {
    double* row = m.values.data() + i * idler_nm.size();
    for (std::size_t j = 0; j < idler_nm.size(); ++j)
      row[j] = m.peak_value * qpm_response(phase_mismatch(crystal, g, signal_nm[i], idler_nm[j]), g.length_cm);
  });
  m.validate();
  return m;
}

double classical_to_photon_level(double efficiency_pct_per_w_cm2, double wavelength_nm,
                                 double bandwidth_ghz_cm, double length_cm, double tbp) {
  if (!(efficiency_pct_per_w_cm2 >= 0)) throw DomainError("classical_to_photon_level: efficiency must be >= 0");
  if (!(wavelength_nm > 0)) throw DomainError("classical_to_photon_level: wavelength must be > 0");
  if (!(bandwidth_ghz_cm > 0)) throw DomainError("classical_to_photon_level: bandwidth must be > 0");
  if (!(length_cm > 0)) throw DomainError("classical_to_photon_level: length must be > 0");
  if (!(tbp > 0)) throw DomainError("classical_to_photon_level: time-bandwidth product must be > 0");
  const double eta_per_w_cm2 = efficiency_pct_per_w_cm2 / 100.0;
  const double bandwidth_hz_cm = bandwidth_ghz_cm * kGHz;
  return 0.5 * eta_per_w_cm2 * photon_energy_j(wavelength_nm) * bandwidth_hz_cm * length_cm / tbp;
}

double photon_level_peak(const WaveguideSpec& waveguide) {
  return classical_to_photon_level(waveguide.shg_efficiency_pct_per_w_cm2, waveguide.peak_wavelength_nm,
                                   waveguide.bandwidth_ghz_cm, waveguide.grating.length_cm,
                                   waveguide.time_bandwidth_product);
}

double effective_sfg_efficiency(const FieldSpec& signal, const FieldSpec& idler,
                                const EfficiencyMatrix& matrix) {
  signal.validate();
  idler.validate();
  matrix.validate();
  if (matrix.signal_nm.empty() || matrix.idler_nm.empty())
    throw CoverageError("effective_sfg_efficiency: empty grid", 1.0);
  const double covered = spectral_weight(signal, matrix.signal_nm.front(), matrix.signal_nm.back()) *
                         spectral_weight(idler, matrix.idler_nm.front(), matrix.idler_nm.back());
  const double escaped = 1.0 - covered;
  if (escaped > 1e-3) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "effective_sfg_efficiency: %.4g of the joint spectral weight lies outside the grid", escaped);
    throw CoverageError(buf, escaped);
  }
  const auto ws = trapezoid_weights(matrix.signal_nm);
  const auto wi = trapezoid_weights(matrix.idler_nm);
  std::vector<double> pi(matrix.idler_nm.size());
  for (std::size_t j = 0; j < pi.size(); ++j) pi[j] = wi[j] * spectral_density(idler, matrix.idler_nm[j]);
  double total = 0.0;
  for (std::size_t i = 0; i < matrix.signal_nm.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < pi.size(); ++j) row += pi[j] * matrix(i, j);
    total += ws[i] * spectral_density(signal, matrix.signal_nm[i]) * row;
  }
  return total;
}

EffectiveEfficiency converged_effective_efficiency(const SellmeierModel& model,
                                                   const WaveguideSpec& waveguide,
                                                   const FieldSpec& signal, const FieldSpec& idler,
                                                   double relative_tolerance, unsigned threads) {
  signal.validate();
  idler.validate();
  const double span_s = 4.0 * signal.bandwidth_nm;
  const double span_i = 4.0 * idler.bandwidth_nm;
  double step_s = signal.bandwidth_nm / 4.0;
  double step_i = idler.bandwidth_nm / 4.0;
  auto evaluate = [&](double hs, double hi) {
    const auto m = sfg_efficiency_matrix(model, waveguide, centred_grid(signal.center_nm, span_s, hs),
                                         centred_grid(idler.center_nm, span_i, hi), threads);
    return effective_sfg_efficiency(signal, idler, m);
  };
  EffectiveEfficiency r;
  r.previous = evaluate(step_s, step_i);
  for (int k = 1; k <= 12; ++k) {
    step_s *= 0.5;
    step_i *= 0.5;
    r.value = evaluate(step_s, step_i);
    r.halvings = k;
    r.signal_step_nm = step_s;
    r.idler_step_nm = step_i;
    const double scale = std::max(std::abs(r.value), 1e-300);
    r.relative_change = std::abs(r.value - r.previous) / scale;
    if (r.relative_change < relative_tolerance) return r;
    r.previous = r.value;
  }
  throw SolverError("converged_effective_efficiency: no convergence after 12 step halvings");
}

double coherence_time_ps(double center_nm, double bandwidth_nm) {
  if (!(center_nm > 0) || !(bandwidth_nm > 0))
    throw DomainError("coherence_time: wavelength and bandwidth must be > 0");
  const double l = center_nm * kNm;
  return l * l / (kSpeedOfLight * bandwidth_nm * kNm) / kPs;
}

std::string matrix_to_csv(const EfficiencyMatrix& matrix, const std::vector<std::string>& preamble) {
  std::string out;
  for (const auto& line : preamble) out += "# " + line + "\n";
  out += "signal_nm\\idler_nm";
  for (double l : matrix.idler_nm) out += "," + format_number(l);
  out += "\n";
  for (std::size_t i = 0; i < matrix.signal_nm.size(); ++i) {
    out += format_number(matrix.signal_nm[i]);
    for (std::size_t j = 0; j < matrix.idler_nm.size(); ++j) out += "," + format_number(matrix(i, j));
    out += "\n";
  }
  return out;
}

}  // namespace spsfg
