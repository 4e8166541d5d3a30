#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "spsfg/config.hpp"
#include "spsfg/error.hpp"
#include "spsfg/simkit.hpp"

using namespace spsfg;

namespace {

ExperimentConfig base() { return reference_config().config; }

FieldSpec pulse(double fwhm_ps, SpectralShape shape = SpectralShape::gaussian) {
  FieldSpec f;
  f.center_nm = 1560;
  f.bandwidth_nm = 1;
  f.duration_ps = fwhm_ps;
  f.shape = shape;
  return f;
}

// Histogram with the simulator's layout: 31 bins of 0.32 ns centred on zero.
CoincidenceHistogram layout() {
  CoincidenceHistogram h;
  h.bin_width_ns = 0.32;
  h.origin_ns = -4.96;
  h.counts.assign(31, 0);
  h.duration_s = 1;
  h.detection_events = 1u << 30;
  return h;
}

struct Net {
  double central, side_mean, sigma;
};

Net net_central(const SimulationResult& r, const ClockSpec& clock) {
  const auto s = snr(integrate_peaks(r.histogram, clock));
  const double c = static_cast<double>(s.central);
  return {c - s.side_mean, s.side_mean, std::sqrt(c + s.side_mean / static_cast<double>(s.side_peaks))};
}

}  // namespace

TEST_CASE("pulse overlap") {
  const auto a = pulse(10);
  CHECK(pulse_overlap(a, a, 0) == doctest::Approx(1.0));
  // two 10 ps Gaussians correlate into a sqrt(2) wider Gaussian
  CHECK(pulse_overlap(a, a, 10 / std::sqrt(2.0)) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(pulse_overlap(a, a, -10 / std::sqrt(2.0)) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(pulse_overlap(a, a, 50) < 1e-14);
  const auto delta = pulse(0);
  CHECK(pulse_overlap(delta, a, 5) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(pulse_overlap(delta, delta, 0) == 1.0);
  CHECK(pulse_overlap(delta, delta, 1) == 0.0);
  const auto s = pulse(10, SpectralShape::sech2);
  CHECK(pulse_overlap(s, s, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(pulse_overlap(s, s, 3) == doctest::Approx(pulse_overlap(s, s, -3)).epsilon(1e-9));
  CHECK(pulse_overlap(s, s, 3) < 1.0);
  CHECK_THROWS_AS(pulse_overlap(a, a, NAN), DomainError);
}

TEST_CASE("pair number statistics") {
  const double p = 0.03;
  CHECK(occupied_probability(PairStatistics::poisson, p) == doctest::Approx(1 - std::exp(-p)));
  CHECK(occupied_probability(PairStatistics::thermal, p) == doctest::Approx(p / (1 + p)));
  CHECK(occupied_probability(PairStatistics::single, p) == doctest::Approx(p));
  for (auto st : {PairStatistics::poisson, PairStatistics::thermal, PairStatistics::single}) {
    double total = 0, mean = 0;
    for (int n = 0; n < 60; ++n) {
      total += pair_number_probability(st, p, n);
      mean += n * pair_number_probability(st, p, n);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mean == doctest::Approx(p).epsilon(1e-12));
  }
  const double h = 0.112;
  CHECK(herald_click_probability(PairStatistics::poisson, p, h) == doctest::Approx(1 - std::exp(-p * h)));
  CHECK(herald_click_probability(PairStatistics::thermal, p, h) == doctest::Approx(p * h / (1 + p * h)));
  CHECK(herald_click_probability(PairStatistics::single, p, h) == doctest::Approx(p * h));
}

TEST_CASE("integrate peaks on a synthetic histogram") {
  ClockSpec clock{430e6, 10};
  auto h = layout();
  for (std::size_t i = 0; i < h.counts.size(); ++i) h.counts[i] = 1000 + i;
  const auto peaks = integrate_peaks(h, clock);
  REQUIRE(peaks.size() == 5);
  CHECK(peaks.front().order == -2);
  CHECK(peaks.back().order == 2);
  const auto& c = peaks[2];
  CHECK(c.order == 0);
  // bin 15 sits on zero, bins 14 and 16 tie and the lower one wins
  CHECK(c.bins == std::vector<std::size_t>{14, 15});
  CHECK(c.total == 1014 + 1015);
  for (const auto& p : peaks) {
    std::uint64_t expect = 0;
    for (auto b : p.bins) {
      expect += h.counts[b];
      CHECK(std::abs(h.bin_center(b) - p.center_ns) <= 0.32 * 1.5);
    }
    CHECK(p.total == expect);
  }
  CHECK(integrate_peaks(h, clock, 3)[2].bins == std::vector<std::size_t>{14, 15, 16});

  auto zero = layout();
  for (const auto& p : integrate_peaks(zero, clock)) CHECK(p.total == 0);
}

TEST_CASE("integrate peaks domain errors") {
  ClockSpec clock{430e6, 10};
  auto h = layout();
  CHECK_THROWS_AS(integrate_peaks(h, clock, 0), DomainError);
  CHECK_THROWS_AS(integrate_peaks(h, clock, 32), DomainError);
  auto wide = h;
  wide.bin_width_ns = 1.5;
  CHECK_THROWS_AS(integrate_peaks(wide, clock), DomainError);
  auto short_h = h;
  short_h.counts.resize(5);
  CHECK_THROWS_AS(integrate_peaks(short_h, clock), DomainError);
}

TEST_CASE("snr") {
  auto peaks = [](std::uint64_t c, std::vector<std::uint64_t> sides) {
    std::vector<PeakTotal> v;
    PeakTotal p;
    p.total = c;
    v.push_back(p);
    int k = 1;
    for (auto s : sides) {
      p.order = k++;
      p.total = s;
      v.push_back(p);
    }
    return v;
  };
  const auto two = snr(peaks(50, {25, 25, 25, 25}));
  CHECK(two.value == doctest::Approx(2.0));
  CHECK(two.side_mean == doctest::Approx(25.0));
  CHECK(two.side_peaks == 4);
  // sqrt(C)/S and C/S^2 * sqrt(S/n)
  CHECK(two.error == doctest::Approx(std::sqrt(50.0 / 625 + 2500.0 * 25 / 4 / std::pow(25, 4))));
  CHECK(snr(peaks(30, {30, 30})).value == doctest::Approx(1.0));
  const auto inf = snr(peaks(7, {0, 0}));
  CHECK(inf.infinite);
  CHECK(std::isinf(inf.value));
  CHECK_THROWS_AS(snr(peaks(7, {3})), DomainError);
  auto no_central = peaks(7, {3, 3, 3});
  no_central.erase(no_central.begin());
  CHECK_THROWS_AS(snr(no_central), DomainError);
}

TEST_CASE("peak spacing of a synthetic comb") {
  const double period = 1e9 / 430e6;
  auto h = layout();
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    double v = 20;
    for (int k = -3; k <= 3; ++k) {
      const double d = h.bin_center(i) - k * period;
      v += 200 * std::exp(-d * d / (2 * 0.25 * 0.25));
    }
    h.counts[i] = static_cast<std::uint64_t>(std::lround(v));
  }
  CHECK(peak_spacing_ns(h) == doctest::Approx(period).epsilon(0.32 / 2 / period));

  auto flat = layout();
  std::fill(flat.counts.begin(), flat.counts.end(), 9);
  CHECK_THROWS_AS(peak_spacing_ns(flat), StatisticsError);
}

TEST_CASE("simulation is deterministic and thread independent") {
  auto c = base();
  c.simulation.duration_s = 3600;
  c.simulation.threads = 1;
  const auto a = simulate_coincidences(c);
  c.simulation.threads = 4;
  const auto b = simulate_coincidences(c);
  CHECK(a.histogram.counts == b.histogram.counts);
  CHECK(a.counts.d1_clicks() == b.counts.d1_clicks());
  CHECK(a.counts.d2_clicks == b.counts.d2_clicks);
  const auto again = simulate_coincidences(c);
  CHECK(again.histogram.counts == a.histogram.counts);

  c.simulation.seed += 1;
  const auto other = simulate_coincidences(c);
  CHECK(other.histogram.counts != a.histogram.counts);
  const double ta = static_cast<double>(a.histogram.total()), to = static_cast<double>(other.histogram.total());
  CHECK(std::abs(ta - to) < 5 * std::sqrt(ta + to));
}

TEST_CASE("simulation counting") {
  auto c = base();
  c.simulation.duration_s = 36000;
  const auto r = simulate_coincidences(c);
  CHECK(r.counts.pulses == static_cast<std::uint64_t>(std::llround(36000 * 430e6)));
  CHECK(r.histogram.detection_events == r.counts.d1_clicks());
  CHECK(r.histogram.total() + r.counts.d2_outside_bins == r.counts.d2_clicks);
  CHECK(r.histogram.counts.size() == 31);
  CHECK(r.histogram.duration_s == 36000);
  const double dark = 3.5 * 36000;
  CHECK(std::abs(static_cast<double>(r.counts.d1_dark) - dark) < 5 * std::sqrt(dark));
  const double shg = shg_background_injector(c).rate_hz * 36000;
  CHECK(std::abs(static_cast<double>(r.counts.d1_shg) - shg) < 5 * std::sqrt(shg) + 1);
}

TEST_CASE("no conversion leaves a flat comb") {
  auto c = base();
  c.simulation.duration_s = 360000;
  const auto r = simulate_coincidences(c, simulation_inputs(c, 0.0));
  CHECK(r.counts.d1_signal == 0);
  const auto n = net_central(r, c.clock);
  CHECK(std::abs(n.central) < 5 * n.sigma);
  CHECK(n.side_mean > 0);
}

TEST_CASE("net central peak scales with the conversion efficiency") {
  auto c = base();
  c.simulation.duration_s = 360000;
  const double eta = conversion_efficiency(c);
  const auto one = net_central(simulate_coincidences(c, simulation_inputs(c, eta)), c.clock);
  const auto two = net_central(simulate_coincidences(c, simulation_inputs(c, 2 * eta)), c.clock);
  REQUIRE(one.central > 0);
  const double ratio = two.central / one.central;
  const double sigma = ratio * std::hypot(one.sigma / one.central, two.sigma / two.central);
  CHECK(std::abs(ratio - 2.0) < 5 * sigma);
  // side peaks come from D1 clicks without a partner and stay put
  CHECK(std::abs(two.side_mean - one.side_mean) < 5 * std::sqrt((one.side_mean + two.side_mean) / 4));
}

TEST_CASE("a large delay removes the coincidence peak") {
  auto c = base();
  c.simulation.duration_s = 360000;
  c.simulation.delay_ps = 50;
  const auto r = simulate_coincidences(c);
  CHECK(r.inputs.overlap < 1e-12);
  const auto n = net_central(r, c.clock);
  CHECK(std::abs(n.central) < 5 * n.sigma);
}

TEST_CASE("heralded g2 of a single-pair source vanishes") {
  auto c = base();
  c.pair_statistics = PairStatistics::single;
  const auto g = measure_heralded_g2(c, 1.0);
  CHECK(g.herald_both == 0);
  CHECK(g.value == 0.0);
  CHECK(g.heralds > 0);
}

TEST_CASE("heralded g2 of a Poisson source matches enumeration") {
  auto c = base();
  c.sources.spdc.pair_probability = 0.015;
  c.sources.spdc.to_herald_detector = TransmissionChain{};
  c.d2.efficiency = 1.0;
  c.simulation.g2_arm_efficiency = 1.0;
  const double p = 0.015, t = 1.0;
  double nh = 0, n1 = 0, n12 = 0;
  for (int n = 1; n <= 4; ++n) {
    const double pn = std::exp(-p) * std::pow(p, n) / std::tgamma(n + 1.0);
    nh += pn;
    n1 += pn * (1 - std::pow(1 - t / 2, n));
    n12 += pn * (1 - 2 * std::pow(1 - t / 2, n) + std::pow(1 - t, n));
  }
  const double oracle = n12 * nh / (n1 * n1);
  const auto g = measure_heralded_g2(c, 1.0);
  CHECK(g.value == doctest::Approx(oracle).epsilon(0.05));
  CHECK(g.error < 0.05 * g.value);
}

TEST_CASE("heralded g2 of a coherent field is one") {
  auto c = base();
  c.pair_statistics = PairStatistics::coherent;
  c.sources.spdc.pair_probability = 0.5;
  const auto g = measure_heralded_g2(c, 0.05);
  CHECK(g.value == doctest::Approx(1.0).epsilon(5 * g.error));
}

TEST_CASE("heralded g2 without heralds") {
  auto c = base();
  c.sources.spdc.pair_probability = 0.0;
  CHECK_THROWS_AS(measure_heralded_g2(c, 0.01), StatisticsError);
}

TEST_CASE("SHG background injector") {
  const auto c = base();
  const auto inj = shg_background_injector(c);
  CHECK(inj.rate_hz < 0.05 * 3.5);
  CHECK(inj.rate_hz == doctest::Approx(inj.rate_for_photons(inj.mean_photons, 430e6)));
  const double powers[] = {6.20, 3.54, 2.10, 1.47, 0.75};
  const double published[] = {18.60, 6.60, 2.30, 1.10, 0.30};
  for (int k = 0; k < 5; ++k) {
    CAPTURE(powers[k]);
    const double m = dfg_photons_from_power(c, powers[k] * 1e-9);
    CHECK(inj.rate_for_photons(m, 430e6) == doctest::Approx(published[k]).epsilon(0.15));
  }
  CHECK(inj.rate_for_photons(0.0, 430e6) == 0.0);
  auto off = c;
  off.sources.dfg.mean_photons = 0.0;
  CHECK(shg_background_injector(off).rate_hz == 0.0);
}

TEST_CASE("Gaussian fit recovers its parameters") {
  std::vector<double> x, y;
  for (double d = -30; d <= 30; d += 2) {
    x.push_back(d);
    y.push_back(40 + 500 * std::exp(-4 * std::log(2.0) * (d - 1.5) * (d - 1.5) / (14.0 * 14.0)));
  }
  const auto f = fit_gaussian(x, y);
  CHECK(f.baseline == doctest::Approx(40).epsilon(1e-6));
  CHECK(f.amplitude == doctest::Approx(500).epsilon(1e-6));
  CHECK(f.center == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(std::abs(f.fwhm) == doctest::Approx(14.0).epsilon(1e-6));
  CHECK(f.chi2 < 1e-6);
}

TEST_CASE("CSV layouts") {
  auto h = layout();
  h.counts[15] = 42;
  const auto csv = histogram_to_csv(h, {"seed 1"});
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "# seed 1");
  std::getline(in, line);
  CHECK(line == "bin_start_ns,counts");
  std::getline(in, line);
  CHECK(line == "-4.96,0");
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  CHECK(lines == 33);
  CHECK(csv.find("\n-0.16,42\n") != std::string::npos);

  const auto scan = scan_to_csv({{-2, 10, std::sqrt(10.0)}});
  CHECK(scan.rfind("delay_ps,counts,poisson_error\n-2,10,", 0) == 0);
}
