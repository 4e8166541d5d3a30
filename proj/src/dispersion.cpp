#include "spsfg/dispersion.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <utility>
#include <vector>

#include "spsfg/config_text.hpp"
#include "spsfg/constants.hpp"
#include "spsfg/error.hpp"

namespace spsfg {

namespace {

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string window_text(Interval w, const char* unit) {
  return "[" + fmt_g(w.lo) + ", " + fmt_g(w.hi) + "] " + unit;
}

// Bracketed root with toms748; returns the bracket endpoint with the smaller
// residual.
template <typename F>
double bracketed_root(F&& f, double lo, double hi, double f_lo, double f_hi) {
  std::uintmax_t max_iter = 200;
  const auto tol = boost::math::tools::eps_tolerance<double>(std::numeric_limits<double>::digits - 3);
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, tol, max_iter);
  return std::abs(f(a)) <= std::abs(f(b)) ? a : b;
}

}  // namespace

SellmeierModel::SellmeierModel(std::string name, SellmeierCoefficients coefficients,
                               Interval window_um, Interval temperature_window_c,
                               double temperature_c)
    : name_(std::move(name)),
      coefficients_(coefficients),
      window_um_(window_um),
      temperature_window_c_(temperature_window_c),
      temperature_c_(temperature_c) {
  if (!(window_um_.lo > 0 && window_um_.hi > window_um_.lo))
    throw ValidationError("sellmeier: invalid wavelength window " + window_text(window_um_, "um"));
  if (!(temperature_window_c_.hi >= temperature_window_c_.lo))
    throw ValidationError("sellmeier: invalid temperature window");
  if (!temperature_window_c_.contains(temperature_c_))
    throw DomainError("sellmeier '" + name_ + "': temperature " + fmt_g(temperature_c_) +
                      " C outside validity window " + window_text(temperature_window_c_, "C"));
}

SellmeierModel SellmeierModel::congruent_lithium_niobate(double temperature_c) {
  SellmeierCoefficients c;
  c.a1 = 5.35583;
  c.a2 = 0.100473;
  c.a3 = 0.20692;
  c.a4 = 100.0;
  c.a5 = 11.34927;
  c.a6 = 1.5334e-2;
  c.b1 = 4.629e-7;
  c.b2 = 3.862e-8;
  c.b3 = -0.89e-8;
  c.b4 = 2.657e-5;
  c.t_ref_c = 24.5;
  c.t_offset_c = 570.82;
  return SellmeierModel("jundt1997", c, {0.4, 5.0}, {20.0, 250.0}, temperature_c);
}

SellmeierModel SellmeierModel::at_temperature(double temperature_c) const {
  return SellmeierModel(name_, coefficients_, window_um_, temperature_window_c_, temperature_c);
}

void SellmeierModel::check_wavelength(double wavelength_nm) const {
  if (!(std::isfinite(wavelength_nm) && window_um_.contains(wavelength_nm * 1e-3)))
    throw DomainError("sellmeier '" + name_ + "': wavelength " + fmt_g(wavelength_nm) +
                      " nm outside validity window " + window_text(window_um_, "um"));
}

double SellmeierModel::index_squared(double l) const {
  const auto& c = coefficients_;
  const double f = (temperature_c_ - c.t_ref_c) * (temperature_c_ + c.t_offset_c);
  const double uv_pole = c.a3 + c.b3 * f;
  const double l2 = l * l;
  return c.a1 + c.b1 * f + (c.a2 + c.b2 * f) / (l2 - uv_pole * uv_pole) +
         (c.a4 + c.b4 * f) / (l2 - c.a5 * c.a5) - c.a6 * l2;
}

double SellmeierModel::index(double wavelength_nm) const {
  check_wavelength(wavelength_nm);
  return std::sqrt(index_squared(wavelength_nm * 1e-3));
}

double SellmeierModel::index_derivative(double wavelength_nm) const {
  check_wavelength(wavelength_nm);
  const auto& c = coefficients_;
  const double l = wavelength_nm * 1e-3;
  const double f = (temperature_c_ - c.t_ref_c) * (temperature_c_ + c.t_offset_c);
  const double uv_pole = c.a3 + c.b3 * f;
  const double d_uv = l * l - uv_pole * uv_pole;
  const double d_ir = l * l - c.a5 * c.a5;
  const double dn2_dl = -2.0 * l * (c.a2 + c.b2 * f) / (d_uv * d_uv) -
                        2.0 * l * (c.a4 + c.b4 * f) / (d_ir * d_ir) - 2.0 * c.a6 * l;
  const double n = std::sqrt(index_squared(l));
  return dn2_dl / (2.0 * n) * 1e-3;  // per um -> per nm
}

SellmeierModel parse_sellmeier(const std::string& text) {
  const auto doc = parse_config_text(text);
  std::vector<std::string> errors;
  SectionReader r(doc.find("sellmeier"), "sellmeier", errors);
  if (!r.present()) throw ValidationError("sellmeier file: missing [sellmeier] section");
  SellmeierCoefficients c;
  const std::string name = r.text_or("name", "custom");
  auto get = [&](const char* key, double& out) {
    if (auto v = r.number(key)) out = *v;
  };
  get("a1", c.a1);
  get("a2", c.a2);
  get("a3", c.a3);
  get("a4", c.a4);
  get("a5", c.a5);
  get("a6", c.a6);
  get("b1", c.b1);
  get("b2", c.b2);
  get("b3", c.b3);
  get("b4", c.b4);
  c.t_ref_c = r.number_or("t_ref_c", c.t_ref_c);
  c.t_offset_c = r.number_or("t_offset_c", c.t_offset_c);
  Interval w{r.number_or("window_min_um", 0), r.number_or("window_max_um", 0)};
  if (!r.has("window_min_um") || !r.has("window_max_um"))
    errors.push_back("missing [sellmeier] window_min_um / window_max_um");
  Interval tw{r.number_or("temperature_min_c", -273.15), r.number_or("temperature_max_c", 1000.0)};
  const double t = r.number_or("temperature_c", 25.0);
  r.finish();
  if (!errors.empty()) {
    std::string msg = "sellmeier file:";
    for (const auto& e : errors) msg += " " + e + ";";
    throw ValidationError(msg);
  }
  return SellmeierModel(name, c, w, tw, t);
}

SellmeierModel load_sellmeier_file(const std::string& path) {
  return parse_sellmeier(read_text_file(path));
}

void QpmGrating::validate() const {
  if (!(period_um > 0)) throw ValidationError("grating: poling period must be > 0");
  if (!(length_cm > 0)) throw ValidationError("grating: length must be > 0");
  if (order <= 0 || order % 2 == 0) throw ValidationError("grating: order must be a positive odd integer");
}

double refractive_index(const SellmeierModel& model, double wavelength_nm) {
  return model.index(wavelength_nm);
}

double group_index(const SellmeierModel& model, double wavelength_nm) {
  const Interval w = model.window_um();
  if (!w.strictly_contains(wavelength_nm * 1e-3))
    throw DomainError("group_index: wavelength " + fmt_g(wavelength_nm) +
                      " nm not strictly inside window " + window_text(w, "um"));
  return model.index(wavelength_nm) - wavelength_nm * model.index_derivative(wavelength_nm);
}

double sum_frequency_wavelength(double lambda1_nm, double lambda2_nm) {
  return 1.0 / (1.0 / lambda1_nm + 1.0 / lambda2_nm);
}

double phase_mismatch(const SellmeierModel& model, const QpmGrating& grating, double lambda1_nm,
                      double lambda2_nm) {
  grating.validate();
  const SellmeierModel crystal =
      grating.temperature_c == model.temperature_c() ? model : model.at_temperature(grating.temperature_c);
  const double lambda3_nm = sum_frequency_wavelength(lambda1_nm, lambda2_nm);
  const double n1 = crystal.index(lambda1_nm);
  const double n2 = crystal.index(lambda2_nm);
  const double n3 = crystal.index(lambda3_nm);
  // n/lambda in 1/m
  const double k = n3 / (lambda3_nm * kNm) - n1 / (lambda1_nm * kNm) - n2 / (lambda2_nm * kNm) -
                   grating.order / (grating.period_um * kUm);
  return 2.0 * kPi * k;
}

double solve_poling_period(const SellmeierModel& model, double peak_nm, int order) {
  QpmGrating g{1.0, 1.0, order, model.temperature_c()};
  g.validate();
  (void)model.index(peak_nm);
  (void)model.index(peak_nm / 2.0);
  auto residual = [&](double period_um) {
    QpmGrating trial = g;
    trial.period_um = period_um;
    return phase_mismatch(model, trial, peak_nm, peak_nm);
  };
  const double lo = 0.1 * order;
  const double hi = 1000.0 * order;
  const double f_lo = residual(lo);
  const double f_hi = residual(hi);
  if (!(f_lo * f_hi < 0))
    throw SolverError("solve_poling_period: no sign change in bracket [" + fmt_g(lo) + ", " +
                      fmt_g(hi) + "] um (dk = " + fmt_g(f_lo) + ", " + fmt_g(f_hi) + " rad/m)");
  const double period = bracketed_root(residual, lo, hi, f_lo, f_hi);
  const double r = residual(period);
  if (!(std::abs(r) < 1e-6))
    throw SolverError("solve_poling_period: residual " + fmt_g(r) + " rad/m above 1e-6");
  return period;
}

double solve_phase_matching_temperature(const SellmeierModel& model, const QpmGrating& grating,
                                        double lambda1_nm, double lambda2_nm) {
  grating.validate();
  const Interval tw = model.temperature_window_c();
  auto residual = [&](double t) {
    QpmGrating trial = grating;
    trial.temperature_c = t;
    return phase_mismatch(model, trial, lambda1_nm, lambda2_nm);
  };
  const double f_lo = residual(tw.lo);
  const double f_hi = residual(tw.hi);
  if (f_lo == 0) return tw.lo;
  if (f_hi == 0) return tw.hi;
  if (!(f_lo * f_hi < 0))
    throw SolverError("solve_phase_matching_temperature: no sign change in bracket " +
                      window_text(tw, "C") + " (dk = " + fmt_g(f_lo) + ", " + fmt_g(f_hi) + " rad/m)");
  const double t = bracketed_root(residual, tw.lo, tw.hi, f_lo, f_hi);
  const double r = residual(t);
  if (!(std::abs(r) < 1e-6))
    throw SolverError("solve_phase_matching_temperature: residual " + fmt_g(r) + " rad/m above 1e-6");
  return t;
}

double temporal_walkoff(const SellmeierModel& model, double lambda_a_nm, double lambda_b_nm,
                        double length_cm) {
  if (!(length_cm >= 0)) throw DomainError("temporal_walkoff: length must be >= 0");
  const double dn = std::abs(group_index(model, lambda_a_nm) - group_index(model, lambda_b_nm));
  return length_cm * kCm * dn / kSpeedOfLight / kPs;
}

}  // namespace spsfg
