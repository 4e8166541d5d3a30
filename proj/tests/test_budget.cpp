#include <cmath>

#include "doctest.h"
#include "spsfg/budget.hpp"
#include "spsfg/error.hpp"

using namespace spsfg;

namespace {

ClockSpec clock430() { return {430e6, 10}; }

SourceBudget table_two() {
  SourceBudget b;
  b.spdc.pair_probability = 0.03;
  b.spdc.to_herald_detector = {{"t_807", 0.4}, {"t_grating", 0.7}};
  b.spdc.herald_detection_efficiency = 0.4;
  b.spdc.to_waveguide = {{"t_dwdm", 0.86}, {"t_bandwidth", 0.4}};
  b.dfg.mean_photons = 1.7;
  b.dfg.wavelength_nm = 1551;
  b.dfg.fiber_coupling = 0.76;
  b.dfg.to_waveguide = {{"t_dwdm", 0.96}};
  b.dfg.upconversion_detection_efficiency = 0.6;
  return b;
}

// hand multiplication of the table entries
constexpr double kBetaOracle = 0.03 * 0.4 * 0.7 * 0.4 * 0.86 * 0.4 * 1.7 * 0.96 * 0.6 * 430e6;

}  // namespace

TEST_CASE("photons per pulse") {
  const double n = photons_per_pulse(0.1463e-9, 1551, 430e6);
  CHECK(n == doctest::Approx(2.66).epsilon(0.01 / 2.66));
  const TransmissionChain dwdm{{"t_fiber", 0.9142857142857143}, {"pigtail_coupling", 0.70}};
  CHECK(chain_transmission(dwdm) == doctest::Approx(0.64).epsilon(1e-12));
  CHECK(n * chain_transmission(dwdm) == doctest::Approx(1.7).epsilon(0.002));
  CHECK(photons_per_pulse(0, 1551, 430e6) == 0.0);
  CHECK(photons_per_pulse(0.2926e-9, 1551, 430e6) == doctest::Approx(2 * n));
  CHECK(photons_per_pulse(0.1463e-9, 1551, 215e6) == doctest::Approx(2 * n));
  CHECK_THROWS_AS(photons_per_pulse(1e-9, 0, 430e6), DomainError);
  CHECK_THROWS_AS(photons_per_pulse(1e-9, 1551, 0), DomainError);
}

TEST_CASE("transmission chains") {
  CHECK(TransmissionChain{}.product() == 1.0);
  const TransmissionChain a{{"x", 0.5}, {"y", 0.8}, {"z", 0.9}};
  const TransmissionChain b{{"z", 0.9}, {"x", 0.5}, {"y", 0.8}};
  CHECK(a.product() == doctest::Approx(b.product()).epsilon(1e-15));
  TransmissionChain c;
  CHECK_THROWS_AS(c.add("zero", 0.0), ValidationError);
  CHECK_THROWS_AS(c.add("above", 1.2), ValidationError);
  c.add("ok", 1.0);
  CHECK_THROWS_AS(c.add("ok", 0.5), ValidationError);
}

TEST_CASE("beta product") {
  const auto beta = beta_product(table_two(), clock430());
  CHECK(beta.value == doctest::Approx(kBetaOracle).epsilon(1e-12));
  CHECK(beta.value == doctest::Approx(4.87e5).epsilon(0.01));
  double product = 1;
  for (const auto& item : beta.items) product *= item.value;
  CHECK(beta.value == doctest::Approx(product).epsilon(1e-12));
  CHECK(beta.items.size() == 10);

  ClockSpec doubled = clock430();
  doubled.rate_hz *= 2;
  CHECK(beta_product(table_two(), doubled).value == doctest::Approx(2 * beta.value));

  auto zero = table_two();
  zero.dfg.mean_photons = 0.0;
  CHECK(beta_product(zero, clock430()).value == 0.0);
}

TEST_CASE("beta product names missing parameters") {
  auto b = table_two();
  b.spdc.herald_detection_efficiency.reset();
  b.dfg.upconversion_detection_efficiency.reset();
  try {
    beta_product(b, clock430());
    FAIL("expected validation error");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("spdc.herald_detection_efficiency") != std::string::npos);
    CHECK(msg.find("dfg.upconversion_detection_efficiency") != std::string::npos);
  }
}

TEST_CASE("DFG photons from power when no photon number is given") {
  auto b = table_two();
  b.dfg.mean_photons.reset();
  b.dfg.power_w = 0.1463e-9;
  b.dfg.dwdm_to_waveguide = {{"t_fiber", 0.9142857142857143}, {"pigtail_coupling", 0.70}};
  CHECK(b.dfg_mean_photons(clock430()).value() == doctest::Approx(1.7).epsilon(0.002));
  b.dfg.power_w.reset();
  CHECK_FALSE(b.dfg_mean_photons(clock430()).has_value());
}

TEST_CASE("efficiency extraction") {
  const double beta = beta_product(table_two(), clock430()).value;
  const Estimate eta = extract_sfg_efficiency(Estimate{from_per_hour(25), from_per_hour(5)}, beta);
  CHECK(eta.value == doctest::Approx(25.0 / 3600.0 / kBetaOracle).epsilon(1e-12));
  CHECK(eta.value == doctest::Approx(1.43e-8).epsilon(0.005));
  CHECK(eta.error / eta.value == doctest::Approx(0.20).epsilon(1e-12));
  CHECK(eta.value >= 1.2e-8);
  CHECK(eta.value <= 1.8e-8);
  CHECK(eta.value + eta.error >= 1.5e-8 - 0.3e-8);
  CHECK(extract_sfg_efficiency(0.0, beta) == 0.0);
  CHECK_THROWS_AS(extract_sfg_efficiency(1.0, 0.0), DomainError);
}

TEST_CASE("prediction and extraction are inverses") {
  const double beta = beta_product(table_two(), clock430()).value;
  const double r = predicted_sfg_rate(1.56e-8, beta);
  CHECK(per_hour(r) == doctest::Approx(27.3).epsilon(0.01));
  CHECK(extract_sfg_efficiency(predicted_sfg_rate(1.56e-8, beta), beta) == doctest::Approx(1.56e-8).epsilon(1e-15));
  CHECK(predicted_sfg_rate(0, beta) == 0.0);
  CHECK(from_per_hour(per_hour(0.123)) == doctest::Approx(0.123).epsilon(1e-15));
}

TEST_CASE("intrinsic efficiency") {
  const TransmissionChain losses{{"losses", 0.8242857142857143}};
  CHECK(losses.product() * 0.70 == doctest::Approx(0.577).epsilon(1e-12));
  CHECK(intrinsic_efficiency(1.5e-8, losses, 0.70) == doctest::Approx(2.6e-8).epsilon(0.001));
  CHECK(intrinsic_efficiency(1.5e-8, TransmissionChain{}, 1.0) == 1.5e-8);
  const TransmissionChain better{{"losses", 0.9}};
  CHECK(intrinsic_efficiency(1.5e-8, losses, 0.7) > intrinsic_efficiency(1.5e-8, better, 0.7));
  CHECK_THROWS_AS(intrinsic_efficiency(1.5e-8, losses, 0.0), DomainError);
  const Estimate e = intrinsic_efficiency(Estimate{1.5e-8, 0.3e-8}, losses, 0.7);
  CHECK(e.error / e.value == doctest::Approx(0.2));
}

TEST_CASE("SHG noise table") {
  const double pct = 41, length = 4.5, mu = 0.76, lambda = 1551;
  const double cal = shg_noise_calibration(6.20e-9, 18.60, mu, pct, length, lambda);
  CHECK(shg_noise_rate(6.20e-9, mu, pct, length, lambda, cal) == doctest::Approx(18.60).epsilon(1e-12));
  // the remaining rows of the published calculated column
  const double powers[] = {3.54, 2.10, 1.47, 0.75};
  const double published[] = {6.60, 2.30, 1.10, 0.30};
  for (int k = 0; k < 4; ++k) {
    CAPTURE(powers[k]);
    const double r = shg_noise_rate(powers[k] * 1e-9, mu, pct, length, lambda, cal);
    CHECK(r == doctest::Approx(18.60 * std::pow(powers[k] / 6.20, 2)).epsilon(1e-12));
    CHECK(r == doctest::Approx(published[k]).epsilon(0.15));
  }
  CHECK(shg_noise_rate(0.0, mu, pct, length, lambda, cal) == 0.0);
  CHECK(shg_noise_rate(2e-9, mu, pct, length, lambda, cal) /
            shg_noise_rate(1e-9, mu, pct, length, lambda, cal) ==
        doctest::Approx(4.0).epsilon(1e-12));
  CHECK_THROWS_AS(shg_noise_rate(1e-9, 0.0, pct, length, lambda), DomainError);
  CHECK_THROWS_AS(shg_noise_rate(-1e-9, mu, pct, length, lambda), DomainError);
}

TEST_CASE("verbatim SHG formula before calibration") {
  const double p = 6.20e-9 * 0.76;
  const double oracle = p * p * 0.41 * 4.5 * 4.5 * 1551e-9 / (6.62607015e-34 * 299792458.0);
  CHECK(shg_noise_rate(6.20e-9, 0.76, 41, 4.5, 1551) == doctest::Approx(oracle).epsilon(1e-12));
}
