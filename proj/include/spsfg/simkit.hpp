#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spsfg/experiment.hpp"

namespace spsfg {

/// Pulses handled per RNG stream. Part of the reproducibility contract:
/// changing it changes the sampled events (but not their statistics).
inline constexpr std::uint64_t kChunkPulses = std::uint64_t{1} << 30;

/// splitmix64 finaliser; used to derive independent 64-bit stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

/// Normalised cross-correlation of the two intensity envelopes at a relative
/// delay, 1 at zero delay for identical pulses. Closed form for two Gaussians,
/// quadrature otherwise. A zero duration acts as a delta envelope.
double pulse_overlap(const FieldSpec& a, const FieldSpec& b, double delay_ps);

/// Probability that a pulse holds at least one pair.
double occupied_probability(PairStatistics stats, double mean_pairs);
/// P(n) for the configured pair statistics (single: P(1) = mean, P(0) = 1 - mean).
double pair_number_probability(PairStatistics stats, double mean_pairs, int n);
/// Probability that at least one herald photon clicks in an unconditioned
/// pulse, each herald detected with probability `h`.
double herald_click_probability(PairStatistics stats, double mean_pairs, double h);

struct CoincidenceHistogram {
  double bin_width_ns = 0;
  double origin_ns = 0;  // left edge of bin 0, relative to the D1 click
  std::vector<std::uint64_t> counts;
  double duration_s = 0;
  std::uint64_t detection_events = 0;  // D1 clicks that opened a gate

  double bin_start(std::size_t i) const { return origin_ns + bin_width_ns * static_cast<double>(i); }
  double bin_center(std::size_t i) const { return bin_start(i) + 0.5 * bin_width_ns; }
  double span_ns() const { return bin_width_ns * static_cast<double>(counts.size()); }
  std::uint64_t total() const;
  void validate() const;
};

/// Resolved per-pulse quantities driving the Monte Carlo.
struct SimulationInputs {
  double efficiency = 0;            // per (signal, DFG) photon pair, before overlap
  double overlap = 1;               // pulse overlap at the configured delay
  double pair_mean = 0;             // pairs per pulse at the source
  double signal_transmission = 0;   // SPDC telecom photon to waveguide
  double dfg_mean_photons = 0;      // DFG photons per pulse in the waveguide
  double dfg_transmission = 0;      // extra DFG chain used by the conversion term
  double herald_click = 0;          // per herald photon: chain x D2 efficiency
  double shg_kappa = 0;             // D1 click probability per m(m-1) DFG photons
};

/// Resolve inputs from a configuration. `efficiency` overrides both the
/// configured override and the converged spectral integral.
SimulationInputs simulation_inputs(const ExperimentConfig& config,
                                   std::optional<double> efficiency = std::nullopt);

struct SimulationCounts {
  std::uint64_t pulses = 0;
  std::uint64_t d1_signal = 0;
  std::uint64_t d1_shg = 0;
  std::uint64_t d1_dark = 0;
  std::uint64_t d2_clicks = 0;        // gates with a D2 click
  std::uint64_t d2_outside_bins = 0;  // clicks in the gate but beyond the binned range

  std::uint64_t d1_clicks() const { return d1_signal + d1_shg + d1_dark; }
};

struct SimulationResult {
  CoincidenceHistogram histogram;
  SimulationCounts counts;
  SimulationInputs inputs;
};

/// Aggregated pulse-train Monte Carlo: D1 clicks are drawn per chunk from their
/// Poisson totals, each click opens a D2 gate and the earliest D2 click in the
/// gate is histogrammed against the D1 time. Bit-identical for a given
/// (config, seed) whatever the thread count.
SimulationResult simulate_coincidences(const ExperimentConfig& config);
SimulationResult simulate_coincidences(const ExperimentConfig& config, const SimulationInputs& inputs);

struct PeakTotal {
  int order = 0;          // k in k / f
  double center_ns = 0;
  std::uint64_t total = 0;
  std::vector<std::size_t> bins;
};

/// Sum the `n_bins` bins nearest to each expected peak centre offset + k/f.
/// Equidistant bins resolve toward the lower index. Requires bin width <=
/// period / 2 and a histogram at least one period long (DomainError).
std::vector<PeakTotal> integrate_peaks(const CoincidenceHistogram& histogram, const ClockSpec& clock,
                                       std::size_t n_bins = 2, double offset_ns = 0);

struct SnrResult {
  double value = 0;
  double error = 0;
  bool infinite = false;
  std::uint64_t central = 0;
  double side_mean = 0;
  std::size_t side_peaks = 0;
};

/// Central total over the mean side total, with Poisson error propagation.
/// Needs the k = 0 peak and at least two side peaks (DomainError otherwise).
SnrResult snr(const std::vector<PeakTotal>& peaks);

/// Dominant period of the histogram from its autocorrelation, in ns, with
/// parabolic refinement around the best lag. Throws StatisticsError for a
/// histogram without structure.
double peak_spacing_ns(const CoincidenceHistogram& histogram);

struct ScanPoint {
  double delay_ps = 0;
  std::uint64_t counts = 0;
  double poisson_error = 0;
};

/// One simulation per delay with the scan DFG photon number and per-point
/// duration; counts are the integrated central peak.
std::vector<ScanPoint> overlap_scan(const ExperimentConfig& config, const std::vector<double>& delays_ps);

struct GaussianFit {
  double baseline = 0;
  double amplitude = 0;
  double center = 0;
  double fwhm = 0;
  double chi2 = 0;
  int iterations = 0;
};

/// Weighted least-squares fit of baseline + amplitude * exp(-4 ln2 (x-c)^2 / fwhm^2).
GaussianFit fit_gaussian(const std::vector<double>& x, const std::vector<double>& y);

struct G2Result {
  double value = 0;
  double error = 0;
  std::uint64_t heralds = 0;
  std::uint64_t herald_arm1 = 0;
  std::uint64_t herald_arm2 = 0;
  std::uint64_t herald_both = 0;
};

/// Heralded g2(0) from a simulated 50:50 splitter on the telecom photon:
/// N_h12 N_h / (N_h1 N_h2). Coherent statistics use the clock as herald.
/// Throws StatisticsError when a denominator count is zero.
G2Result measure_heralded_g2(const ExperimentConfig& config, double duration_s);

/// D1 click source from SHG of the DFG pulses: probability kappa m(m-1) per
/// pulse with m DFG photons, so coherent light reproduces the calibrated
/// quadratic rate exactly.
struct ShgInjector {
  double kappa = 0;
  double calibration = 0;  // shg_noise_rate calibration constant
  double mean_photons = 0;
  double rate_hz = 0;      // at the configured DFG photon number

  /// Expected click rate for a mean DFG photon number in the waveguide.
  double rate_for_photons(double mean_photons, double rep_rate_hz) const;
};

ShgInjector shg_background_injector(const ExperimentConfig& config);

/// DFG photons per pulse in the waveguide for a power at the DWDM output.
double dfg_photons_from_power(const ExperimentConfig& config, double power_w);

std::string histogram_to_csv(const CoincidenceHistogram& histogram,
                             const std::vector<std::string>& preamble = {});
std::string scan_to_csv(const std::vector<ScanPoint>& points,
                        const std::vector<std::string>& preamble = {});

}  // namespace spsfg
