#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "spsfg/constants.hpp"
#include "spsfg/conversion.hpp"
#include "spsfg/error.hpp"

using namespace spsfg;

namespace {

const SellmeierModel kModel = SellmeierModel::congruent_lithium_niobate(25.0);

WaveguideSpec setup_waveguide() {
  WaveguideSpec w;
  w.grating = {0.0, 4.5, 1, 25.0};
  w.shg_efficiency_pct_per_w_cm2 = 41;
  w.peak_wavelength_nm = 1556;
  w.coupling = 0.70;
  w.bandwidth_ghz_cm = 296;
  w.time_bandwidth_product = 0.66;
  w.calibration_temperature_c = 25;
  return calibrate_poling(kModel, w);
}

FieldSpec field(double center, double bw, SpectralShape shape = SpectralShape::gaussian) {
  return {center, bw, 10.0, shape, 1.0};
}

// Compile-time SI dimension bookkeeping: exponents of kg, m, s.
template <int M, int L, int T>
struct Quantity {
  double v;
};
template <int M1, int L1, int T1, int M2, int L2, int T2>
constexpr Quantity<M1 + M2, L1 + L2, T1 + T2> operator*(Quantity<M1, L1, T1> a, Quantity<M2, L2, T2> b) {
  return {a.v * b.v};
}
template <int M1, int L1, int T1, int M2, int L2, int T2>
constexpr Quantity<M1 - M2, L1 - L2, T1 - T2> operator/(Quantity<M1, L1, T1> a, Quantity<M2, L2, T2> b) {
  return {a.v / b.v};
}
using Dimensionless = Quantity<0, 0, 0>;
using Metre = Quantity<0, 1, 0>;
using Hertz = Quantity<0, 0, -1>;
using Joule = Quantity<1, 2, -2>;
using Watt = Quantity<1, 2, -3>;
using JouleSecond = Quantity<1, 2, -1>;
using MetrePerSecond = Quantity<0, 1, -1>;

}  // namespace

TEST_CASE("sinc squared anchors") {
  const double L = 4.5;
  const double per_m = 1.0 / (L * kCm);  // Delta k giving Delta k L / 2 = 0.5
  CHECK(qpm_response(0.0, L) == 1.0);
  CHECK(std::abs(qpm_response(2 * kPi * per_m, L)) < 1e-12);
  CHECK(qpm_response(kPi * per_m, L) == doctest::Approx(4.0 / (kPi * kPi)).epsilon(1e-12));
  CHECK(qpm_response(-kPi * per_m, L) == qpm_response(kPi * per_m, L));
  CHECK_THROWS_AS(qpm_response(1.0, 0.0), DomainError);
}

TEST_CASE("photon-level conversion formula") {
  const double eta = classical_to_photon_level(41, 1556, 296, 4.5, 0.66);
  const double oracle = 0.41 / 2 * (6.62607015e-34 * 299792458.0 / 1556e-9) * 296e9 * 4.5 / 0.66;
  CHECK(eta == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(eta == doctest::Approx(5e-8).epsilon(0.10));
  CHECK(classical_to_photon_level(0, 1556, 296, 4.5, 0.66) == 0.0);
  CHECK(classical_to_photon_level(82, 1556, 296, 4.5, 0.66) == doctest::Approx(2 * eta));
  CHECK_THROWS_AS(classical_to_photon_level(41, 0, 296, 4.5, 0.66), DomainError);
  CHECK_THROWS_AS(classical_to_photon_level(41, 1556, -1, 4.5, 0.66), DomainError);
  CHECK_THROWS_AS(classical_to_photon_level(41, 1556, 296, 4.5, 0), DomainError);
}

TEST_CASE("unit audit of the photon-level formula") {
  // 41 %/(W cm^2) -> 0.41 W^-1 cm^-2 = 4100 W^-1 m^-2
  constexpr auto eta = Dimensionless{0.41e4} / (Watt{1.0} * Metre{1.0} * Metre{1.0});
  constexpr auto h = JouleSecond{6.62607015e-34};
  constexpr auto c = MetrePerSecond{299792458.0};
  constexpr auto lambda = Metre{1556e-9};
  constexpr auto dnu_l = Hertz{296e9} * Metre{1e-2};  // GHz cm
  constexpr auto length = Metre{4.5e-2};
  constexpr auto result = Dimensionless{0.5} * eta * (h * c / lambda) * dnu_l * length / Dimensionless{0.66};
  static_assert(std::is_same_v<std::remove_const_t<decltype(result)>, Dimensionless>);
  CHECK(result.v == doctest::Approx(classical_to_photon_level(41, 1556, 296, 4.5, 0.66)).epsilon(1e-12));
}

TEST_CASE("spectral densities are normalised") {
  for (auto shape : {SpectralShape::gaussian, SpectralShape::sech2}) {
    const FieldSpec f = field(1560, 1.2, shape);
    CHECK(spectral_weight(f, 1500, 1620) == doctest::Approx(1.0).epsilon(1e-9));
    // trapezoid of the density against the closed form over a sub-interval
    double s = 0;
    const int n = 20000;
    const double lo = 1559, hi = 1561.5, h = (hi - lo) / n;
    for (int i = 0; i <= n; ++i) s += (i == 0 || i == n ? 0.5 : 1.0) * spectral_density(f, lo + i * h);
    CHECK(s * h == doctest::Approx(spectral_weight(f, lo, hi)).epsilon(1e-7));
    CHECK(spectral_density(f, 1560 + 0.6) == doctest::Approx(0.5 * spectral_density(f, 1560)).epsilon(1e-9));
  }
  CHECK(parse_spectral_shape("sech2") == SpectralShape::sech2);
  CHECK_THROWS_AS(parse_spectral_shape("lorentzian"), ValidationError);
}

TEST_CASE("tuning curve") {
  const auto w = setup_waveguide();
  const auto curve = shg_tuning_curve(kModel, w, 1546, 1566, 0.5);
  REQUIRE(curve.size() == 41);
  CHECK(curve[20].wavelength_nm == 1556.0);
  CHECK(curve[20].relative == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(curve[20].absolute_pct_per_w_cm2 == doctest::Approx(41.0).epsilon(1e-12));
  for (const auto& p : curve) CHECK(p.relative <= 1.0);
  CHECK(shg_tuning_curve(kModel, w, 1560, 1550, 0.1).empty());
  CHECK(shg_tuning_curve(kModel, w, 1546, 1566, 0.25).size() == 2 * curve.size() - 1);
  CHECK_THROWS_AS(shg_tuning_curve(kModel, w, 300, 310, 1), DomainError);
}

TEST_CASE("tuning-curve bandwidth") {
  const auto w = setup_waveguide();
  const double bw = tuning_curve_bandwidth_ghz_cm(kModel, w);
  CHECK(bw == doctest::Approx(296).epsilon(0.15));
  CHECK(bw == doctest::Approx(294.19).epsilon(1e-3));  // regression anchor
}

TEST_CASE("tail efficiency at 1551 nm") {
  const auto w = setup_waveguide();
  const double envelope = sidelobe_averaged_response(kModel, w, 1551);
  CHECK(envelope > 2.35e-4 / 3);
  CHECK(envelope < 2.35e-4 * 3);
  // the pointwise value sits under the 1/x^2 bound of the side lobes
  const double pointwise = shg_tuning_curve(kModel, w, 1551, 1551, 1)[0].relative;
  CHECK(pointwise <= 2 * envelope);
  CHECK(sidelobe_averaged_response(kModel, w, 1556) == doctest::Approx(1.0));
}

TEST_CASE("efficiency matrix") {
  const auto w = setup_waveguide();
  const auto grid = uniform_grid(1550, 1562, 0.5);
  const auto m = sfg_efficiency_matrix(kModel, w, grid, grid, 3);
  const double peak = classical_to_photon_level(41, 1556, 296, 4.5, 0.66);
  CHECK(m.peak_value == doctest::Approx(peak).epsilon(1e-12));
  CHECK(m.max() == doctest::Approx(peak).epsilon(1e-12));  // (1556, 1556) is on the grid
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t j = 0; j < grid.size(); ++j) REQUIRE(m(i, j) == m(j, i));
  // diagonal equals the photon-level SHG curve
  const auto curve = shg_tuning_curve(kModel, w, 1550, 1562, 0.5);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(m(i, i) == doctest::Approx(peak * curve[i].relative).epsilon(1e-12));
  // row-parallel construction does not change a single value
  const auto serial = sfg_efficiency_matrix(kModel, w, grid, grid, 1);
  CHECK(serial.values == m.values);
  const auto one = sfg_efficiency_matrix(kModel, w, {1556}, {1556});
  CHECK(one.values.size() == 1);
}

TEST_CASE("phase-matching ridge crosses every signal wavelength") {
  const auto w = setup_waveguide();
  const auto idler = uniform_grid(1538, 1574, 0.005);
  for (double s = 1548; s <= 1564; s += 1) {
    const auto m = sfg_efficiency_matrix(kModel, w, {s}, idler);
    CAPTURE(s);
    CHECK(m.max() / m.peak_value > 0.99);
  }
}

TEST_CASE("effective efficiency over the reference spectra") {
  const auto cal = setup_waveguide();
  const FieldSpec s = field(1560, 1.2), i = field(1551, 0.8);
  const auto tuned = tune_to_operating_point(kModel, cal, 1560, 1551);
  const auto eff = converged_effective_efficiency(kModel, tuned, s, i);
  CHECK(eff.value == doctest::Approx(1.56e-8).epsilon(0.25));
  CHECK(eff.relative_change < 0.005);
  // Literal operating point (crystal at the calibration temperature)
  const auto literal = converged_effective_efficiency(kModel, cal, s, i);
  CHECK(literal.value < eff.value);
  CHECK(literal.value == doctest::Approx(5.62e-9).epsilon(0.02));
}

TEST_CASE("effective efficiency limits") {
  const auto tuned = tune_to_operating_point(kModel, setup_waveguide(), 1560, 1551);
  // delta-like spectra on the ridge pick out the ridge value
  const FieldSpec s = field(1560, 0.001), i = field(1551, 0.001);
  const auto m = sfg_efficiency_matrix(kModel, tuned, uniform_grid(1559.99, 1560.01, 0.0001),
                                       uniform_grid(1550.99, 1551.01, 0.0001));
  CHECK(effective_sfg_efficiency(s, i, m) == doctest::Approx(m.peak_value).epsilon(0.01));

  // constant matrix
  EfficiencyMatrix flat;
  flat.signal_nm = uniform_grid(1550, 1570, 0.01);
  flat.idler_nm = uniform_grid(1541, 1561, 0.01);
  flat.values.assign(flat.signal_nm.size() * flat.idler_nm.size(), 3e-8);
  for (auto shape : {SpectralShape::gaussian, SpectralShape::sech2})
    CHECK(effective_sfg_efficiency(field(1560, 1.2, shape), field(1551, 0.8, shape), flat) ==
          doctest::Approx(3e-8).epsilon(1e-6));
}

TEST_CASE("coverage error reports the escaped weight") {
  EfficiencyMatrix narrow;
  narrow.signal_nm = uniform_grid(1559.5, 1560.5, 0.1);
  narrow.idler_nm = uniform_grid(1550, 1552, 0.1);
  narrow.values.assign(narrow.signal_nm.size() * narrow.idler_nm.size(), 1e-8);
  try {
    effective_sfg_efficiency(field(1560, 1.2), field(1551, 0.8), narrow);
    FAIL("expected coverage error");
  } catch (const CoverageError& e) {
    const double covered = spectral_weight(field(1560, 1.2), 1559.5, 1560.5) *
                           spectral_weight(field(1551, 0.8), 1550, 1552);
    CHECK(e.escaped_fraction() == doctest::Approx(1 - covered).epsilon(1e-12));
  }
}

TEST_CASE("coherence times") {
  CHECK(coherence_time_ps(1560, 1.2) == doctest::Approx(6.76).epsilon(0.003));
  CHECK(coherence_time_ps(1551, 0.8) == doctest::Approx(10.03).epsilon(0.003));
  CHECK(coherence_time_ps(1560, 2.4) == doctest::Approx(coherence_time_ps(1560, 1.2) / 2));
  CHECK_THROWS_AS(coherence_time_ps(1560, 0), DomainError);
}

TEST_CASE("matrix CSV layout") {
  EfficiencyMatrix m;
  m.signal_nm = {1559, 1560};
  m.idler_nm = {1550, 1551, 1552};
  m.values = {1, 2, 3, 4, 5, 6};
  const std::string csv = matrix_to_csv(m, {"hello"});
  CHECK(csv == "# hello\nsignal_nm\\idler_nm,1550,1551,1552\n1559,1,2,3\n1560,4,5,6\n");
}
