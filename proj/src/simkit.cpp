#include "spsfg/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <unsupported/Eigen/NonLinearOptimization>

#include "spsfg/config_text.hpp"
#include "spsfg/constants.hpp"
#include "spsfg/error.hpp"
#include "spsfg/parallel.hpp"

namespace spsfg {

namespace {

// Stream tags keep the coincidence, scan and g2 RNG families apart.
constexpr std::uint64_t kStreamCoincidence = 1;
constexpr std::uint64_t kStreamScan = 2;
constexpr std::uint64_t kStreamG2 = 3;

// Chunks per parallel task; tallies are summed in task order.
constexpr std::uint64_t kChunksPerTask = 16;

using Rng = std::mt19937_64;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t poisson(Rng& rng, double mean) {
  if (!(mean > 0)) return 0;
  return std::poisson_distribution<std::uint64_t>(mean)(rng);
}

bool bernoulli(Rng& rng, double p) {
  if (!(p > 0)) return false;
  if (p >= 1) return true;
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

std::uint64_t pulse_count(double duration_s, double rate_hz) {
  const double n = std::round(duration_s * rate_hz);
  if (!(n >= 0) || n > 1.8e19) throw ValidationError("simulation: duration gives an unusable pulse count");
  return static_cast<std::uint64_t>(n);
}

// Pair number of a pulse given that one of its signal photons converted
// (size-biased distribution n P(n) / mean).
int size_biased_pairs(Rng& rng, PairStatistics stats, double mean) {
  switch (stats) {
    case PairStatistics::single: return 1;
    case PairStatistics::thermal: {
      if (!(mean > 0)) return 1;
      std::geometric_distribution<int> g(1.0 / (1.0 + mean));
      return 1 + g(rng) + g(rng);
    }
    default: return 1 + static_cast<int>(poisson(rng, mean));
  }
}

// Pair number conditioned on n >= 1, by inversion of the truncated pmf.
int occupied_pairs(Rng& rng, PairStatistics stats, double mean, double p_occupied) {
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * p_occupied;
  for (int n = 1; n < 64; ++n) {
    u -= pair_number_probability(stats, mean, n);
    if (u <= 0) return n;
  }
  return 64;
}

double sigma_from_fwhm_ns(double fwhm_ps) { return fwhm_ps * 1e-3 / kGaussFwhmPerSigma; }

double envelope(SpectralShape shape, double duration_ps, double t_ps) {
  if (shape == SpectralShape::sech2) {
    const double c = 1.7627471740390860 * t_ps / duration_ps;
    const double s = 1.0 / std::cosh(c);
    return s * s;
  }
  return std::exp(-4.0 * std::log(2.0) * t_ps * t_ps / (duration_ps * duration_ps));
}

struct Geometry {
  double period_ns = 0;
  double gate_lo = 0, gate_hi = 0;
  double origin = 0, bin = 0;
  std::size_t bins = 0;
  double sigma1 = 0, sigma2 = 0;
  double dark_window = 0;
};

Geometry make_geometry(const ExperimentConfig& c) {
  Geometry g;
  g.period_ns = c.clock.period_ns();
  const double w = c.d2.gate_window_ns;
  const double off = c.d2.gate_offset_ns;
  g.gate_lo = off - 0.5 * w;
  g.gate_hi = off + 0.5 * w;
  g.bin = c.simulation.bin_width_ns;
  auto n = static_cast<std::size_t>(std::floor(w / g.bin + 1e-9));
  if (n % 2 == 0 && n > 0) --n;  // odd count, so one bin sits on the offset
  if (n == 0) throw ValidationError("simulation: bin width exceeds the D2 gate window");
  g.bins = n;
  g.origin = off - 0.5 * g.bin * static_cast<double>(n);
  g.sigma1 = sigma_from_fwhm_ns(c.d1.jitter_ps);
  g.sigma2 = sigma_from_fwhm_ns(c.d2.jitter_ps);
  g.dark_window = c.d1.clock_window_ns > 0 ? std::min(c.d1.clock_window_ns, g.period_ns) : g.period_ns;
  return g;
}

struct Tally {
  SimulationCounts counts;
  std::vector<std::uint64_t> hist;
};

void add_into(Tally& into, const Tally& from) {
  into.counts.pulses += from.counts.pulses;
  into.counts.d1_signal += from.counts.d1_signal;
  into.counts.d1_shg += from.counts.d1_shg;
  into.counts.d1_dark += from.counts.d1_dark;
  into.counts.d2_clicks += from.counts.d2_clicks;
  into.counts.d2_outside_bins += from.counts.d2_outside_bins;
  for (std::size_t i = 0; i < into.hist.size(); ++i) into.hist[i] += from.hist[i];
}

class ChunkRunner {
 public:
  ChunkRunner(const ExperimentConfig& c, const SimulationInputs& in) : c_(c), in_(in), g_(make_geometry(c)) {
    const double q = in.efficiency * in.overlap;
    signal_per_pulse_ = q * in.pair_mean * in.signal_transmission * in.dfg_mean_photons *
                        in.dfg_transmission * c.d1.efficiency;
    shg_per_pulse_ = in.shg_kappa * in.dfg_mean_photons * in.dfg_mean_photons;
    dark_per_pulse_ = c.d1.dark_rate_hz * g_.period_ns * 1e-9;
    unconditioned_ = herald_click_probability(c.pair_statistics, in.pair_mean, in.herald_click);
    const double reach = 0.5 * c.d2.gate_window_ns + std::abs(c.d2.gate_offset_ns) + g_.dark_window +
                         8.0 * (g_.sigma1 + g_.sigma2);
    max_slot_ = static_cast<int>(std::ceil(reach / g_.period_ns));
  }

  const Geometry& geometry() const { return g_; }

  void run(std::uint64_t chunk, std::uint64_t pulses, Tally& t) const {
    Rng rng(mix_seed(c_.simulation.seed, kStreamCoincidence, chunk));
    std::normal_distribution<double> unit_normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto n = static_cast<double>(pulses);
    const std::uint64_t n_signal = poisson(rng, signal_per_pulse_ * n);
    const std::uint64_t n_shg = poisson(rng, shg_per_pulse_ * n);
    const std::uint64_t n_dark = poisson(rng, dark_per_pulse_ * n);
    t.counts.pulses += pulses;
    t.counts.d1_signal += n_signal;
    t.counts.d1_shg += n_shg;
    t.counts.d1_dark += n_dark;

    const bool correlated = c_.pair_statistics != PairStatistics::coherent;
    for (std::uint64_t i = 0; i < n_signal; ++i) {
      double p0 = unconditioned_;
      if (correlated) {
        const int pairs = size_biased_pairs(rng, c_.pair_statistics, in_.pair_mean);
        p0 = 1.0 - std::pow(1.0 - in_.herald_click, pairs);
      }
      gate(rng, g_.sigma1 * unit_normal(rng), p0, t, unit_normal, unit);
    }
    for (std::uint64_t i = 0; i < n_shg; ++i)
      gate(rng, g_.sigma1 * unit_normal(rng), unconditioned_, t, unit_normal, unit);
    for (std::uint64_t i = 0; i < n_dark; ++i)
      gate(rng, (unit(rng) - 0.5) * g_.dark_window, unconditioned_, t, unit_normal, unit);
  }

 private:
  // One D2 gate opened by a D1 click at time t1 (ns, relative to its pulse).
  void gate(Rng& rng, double t1, double p0, Tally& t, std::normal_distribution<double>& unit_normal,
            std::uniform_real_distribution<double>& unit) const {
    double earliest = std::numeric_limits<double>::infinity();
    for (int j = -max_slot_; j <= max_slot_; ++j) {
      if (!bernoulli(rng, j == 0 ? p0 : unconditioned_)) continue;
      const double tau = j * g_.period_ns + g_.sigma2 * unit_normal(rng) - t1;
      if (tau >= g_.gate_lo && tau <= g_.gate_hi) earliest = std::min(earliest, tau);
    }
    if (bernoulli(rng, c_.d2.dark_probability_per_gate))
      earliest = std::min(earliest, g_.gate_lo + unit(rng) * (g_.gate_hi - g_.gate_lo));
    if (!std::isfinite(earliest)) return;
    ++t.counts.d2_clicks;
    const double idx = std::floor((earliest - g_.origin) / g_.bin);
    if (idx >= 0 && idx < static_cast<double>(g_.bins))
      ++t.hist[static_cast<std::size_t>(idx)];
    else
      ++t.counts.d2_outside_bins;
  }

  const ExperimentConfig& c_;
  SimulationInputs in_;
  Geometry g_;
  double signal_per_pulse_ = 0, shg_per_pulse_ = 0, dark_per_pulse_ = 0;
  double unconditioned_ = 0;
  int max_slot_ = 0;
};

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix(splitmix(splitmix(seed) ^ stream) ^ index);
}

double pulse_overlap(const FieldSpec& a, const FieldSpec& b, double delay_ps) {
  if (!std::isfinite(delay_ps)) throw DomainError("pulse_overlap: delay must be finite");
  const double da = a.duration_ps, db = b.duration_ps;
  if (!(da >= 0 && db >= 0)) throw DomainError("pulse_overlap: durations must be >= 0");
  if (da == 0 && db == 0) return delay_ps == 0 ? 1.0 : 0.0;
  if (da == 0) return envelope(b.shape, db, delay_ps);
  if (db == 0) return envelope(a.shape, da, delay_ps);
  if (a.shape == SpectralShape::gaussian && b.shape == SpectralShape::gaussian)
    return std::exp(-4.0 * std::log(2.0) * delay_ps * delay_ps / (da * da + db * db));
  // C(delay) = int Ia(t) Ib(t - delay) dt, normalised by C(0).
  const double half = 8.0 * (da + db) + std::abs(delay_ps);
  const int steps = 8000;
  const double h = 2.0 * half / steps;
  auto corr = [&](double d) {
    double s = 0;
    for (int i = 0; i <= steps; ++i) {
      const double t = -half + h * i;
      const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
      s += w * envelope(a.shape, da, t) * envelope(b.shape, db, t - d);
    }
    return s;
  };
  return corr(delay_ps) / corr(0.0);
}

double occupied_probability(PairStatistics stats, double mean) {
  switch (stats) {
    case PairStatistics::thermal: return mean / (1.0 + mean);
    case PairStatistics::single: return mean;
    default: return -std::expm1(-mean);
  }
}

double pair_number_probability(PairStatistics stats, double mean, int n) {
  if (n < 0) return 0;
  switch (stats) {
    case PairStatistics::thermal: return std::pow(mean, n) / std::pow(1.0 + mean, n + 1);
    case PairStatistics::single: return n == 0 ? 1.0 - mean : (n == 1 ? mean : 0.0);
    default: return std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
  }
}

double herald_click_probability(PairStatistics stats, double mean, double h) {
  switch (stats) {
    case PairStatistics::thermal: return mean * h / (1.0 + mean * h);
    case PairStatistics::single: return mean * h;
    default: return -std::expm1(-mean * h);
  }
}

std::uint64_t CoincidenceHistogram::total() const {
  std::uint64_t s = 0;
  for (auto c : counts) s += c;
  return s;
}

void CoincidenceHistogram::validate() const {
  if (!(bin_width_ns > 0)) throw ValidationError("histogram: bin width must be > 0");
  if (counts.empty()) throw ValidationError("histogram: no bins");
  if (total() > detection_events) throw ValidationError("histogram: more coincidences than detection events");
}

SimulationInputs simulation_inputs(const ExperimentConfig& config, std::optional<double> efficiency) {
  config.validate();
  const auto& spdc = config.sources.spdc;
  if (!spdc.pair_probability) throw ValidationError("simulation: spdc.pair_probability is required");
  SimulationInputs in;
  in.efficiency = efficiency ? *efficiency : conversion_efficiency(config);
  in.overlap = pulse_overlap(config.signal, config.idler, config.simulation.delay_ps);
  in.pair_mean = *spdc.pair_probability;
  in.signal_transmission = spdc.to_waveguide.product();
  in.dfg_mean_photons = config.sources.dfg_mean_photons(config.clock).value_or(0.0);
  in.dfg_transmission = config.sources.dfg.to_waveguide.product();
  in.herald_click = spdc.to_herald_detector.product() * config.d2.efficiency;
  in.shg_kappa = shg_background_injector(config).kappa;
  return in;
}

SimulationResult simulate_coincidences(const ExperimentConfig& config) {
  return simulate_coincidences(config, simulation_inputs(config));
}

SimulationResult simulate_coincidences(const ExperimentConfig& config, const SimulationInputs& inputs) {
  config.validate();
  if (config.d1.mode != DetectorMode::free_running)
    throw ValidationError("simulation: detectors.d1 must be free_running");
  const ChunkRunner runner(config, inputs);
  const Geometry& g = runner.geometry();

  const std::uint64_t pulses = pulse_count(config.simulation.duration_s, config.clock.rate_hz);
  const std::uint64_t chunks = (pulses + kChunkPulses - 1) / kChunkPulses;
  const std::uint64_t tasks = (chunks + kChunksPerTask - 1) / kChunksPerTask;
  std::vector<Tally> tallies(tasks, Tally{{}, std::vector<std::uint64_t>(g.bins, 0)});
  parallel_for(tasks, config.simulation.threads, [&](std::size_t task) {
    const std::uint64_t first = task * kChunksPerTask;
    const std::uint64_t last = std::min(chunks, first + kChunksPerTask);
    for (std::uint64_t chunk = first; chunk < last; ++chunk) {
      const std::uint64_t begin = chunk * kChunkPulses;
      runner.run(chunk, std::min(kChunkPulses, pulses - begin), tallies[task]);
    }
  });

  Tally sum{{}, std::vector<std::uint64_t>(g.bins, 0)};
  for (const auto& t : tallies) add_into(sum, t);

  SimulationResult r;
  r.inputs = inputs;
  r.counts = sum.counts;
  r.histogram.bin_width_ns = g.bin;
  r.histogram.origin_ns = g.origin;
  r.histogram.counts = std::move(sum.hist);
  r.histogram.duration_s = static_cast<double>(pulses) / config.clock.rate_hz;
  r.histogram.detection_events = r.counts.d1_clicks();
  return r;
}

std::vector<PeakTotal> integrate_peaks(const CoincidenceHistogram& h, const ClockSpec& clock,
                                       std::size_t n_bins, double offset_ns) {
  h.validate();
  clock.validate();
  const double period = clock.period_ns();
  if (n_bins == 0) throw DomainError("integrate_peaks: n_bins must be >= 1");
  if (h.bin_width_ns > 0.5 * period)
    throw DomainError("integrate_peaks: bin width exceeds half the clock period");
  if (h.span_ns() < period) throw DomainError("integrate_peaks: histogram shorter than one clock period");
  if (n_bins > h.counts.size()) throw DomainError("integrate_peaks: n_bins exceeds the histogram length");

  const double lo = h.origin_ns, hi = h.origin_ns + h.span_ns();
  const int kmin = static_cast<int>(std::ceil((lo - offset_ns) / period - 1e-12));
  const int kmax = static_cast<int>(std::floor((hi - offset_ns) / period + 1e-12));
  const double tie = 1e-9 * h.bin_width_ns;
  std::vector<PeakTotal> peaks;
  std::vector<std::size_t> order(h.counts.size());
  for (int k = kmin; k <= kmax; ++k) {
    PeakTotal p;
    p.order = k;
    p.center_ns = offset_ns + k * period;
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double da = std::abs(h.bin_center(a) - p.center_ns);
      const double db = std::abs(h.bin_center(b) - p.center_ns);
      if (std::abs(da - db) <= tie) return a < b;
      return da < db;
    });
    p.bins.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_bins));
    std::sort(p.bins.begin(), p.bins.end());
    for (auto i : p.bins) p.total += h.counts[i];
    peaks.push_back(std::move(p));
  }
  return peaks;
}

SnrResult snr(const std::vector<PeakTotal>& peaks) {
  SnrResult r;
  bool have_central = false;
  double side_sum = 0;
  for (const auto& p : peaks) {
    if (p.order == 0) {
      r.central = p.total;
      have_central = true;
    } else {
      side_sum += static_cast<double>(p.total);
      ++r.side_peaks;
    }
  }
  if (!have_central) throw DomainError("snr: no central peak");
  if (r.side_peaks < 2) throw DomainError("snr: at least two side peaks are required");
  const double ns = static_cast<double>(r.side_peaks);
  r.side_mean = side_sum / ns;
  const double c = static_cast<double>(r.central);
  if (r.side_mean == 0) {
    r.infinite = true;
    r.value = std::numeric_limits<double>::infinity();
    r.error = std::numeric_limits<double>::infinity();
    return r;
  }
  r.value = c / r.side_mean;
  const double var_mean = side_sum / (ns * ns);
  r.error = std::sqrt(c / (r.side_mean * r.side_mean) +
                      c * c * var_mean / std::pow(r.side_mean, 4));
  return r;
}

double peak_spacing_ns(const CoincidenceHistogram& h) {
  h.validate();
  const std::size_t n = h.counts.size();
  if (n < 6) throw StatisticsError("peak_spacing: histogram too short");
  double mean = 0;
  for (auto c : h.counts) mean += static_cast<double>(c);
  mean /= static_cast<double>(n);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(h.counts[i]) - mean;
  const std::size_t max_lag = n / 2;
  std::vector<double> acf(max_lag + 1, 0.0);
  for (std::size_t l = 0; l <= max_lag; ++l) {
    double s = 0;
    for (std::size_t i = 0; i + l < n; ++i) s += x[i] * x[i + l];
    acf[l] = s / static_cast<double>(n - l);
  }
  if (!(acf[0] > 0)) throw StatisticsError("peak_spacing: histogram has no structure");
  // First local maximum after the first local minimum.
  std::size_t l = 1;
  while (l + 1 <= max_lag && acf[l + 1] < acf[l]) ++l;
  std::size_t best = 0;
  for (std::size_t k = l + 1; k + 1 <= max_lag; ++k) {
    if (acf[k] >= acf[k - 1] && acf[k] >= acf[k + 1]) {
      best = k;
      break;
    }
  }
  if (best == 0) throw StatisticsError("peak_spacing: no periodic structure within half the histogram");
  const double ym = acf[best - 1], y0 = acf[best], yp = acf[best + 1];
  const double denom = ym - 2 * y0 + yp;
  const double shift = denom != 0 ? 0.5 * (ym - yp) / denom : 0.0;
  return (static_cast<double>(best) + std::clamp(shift, -0.5, 0.5)) * h.bin_width_ns;
}

std::vector<ScanPoint> overlap_scan(const ExperimentConfig& config, const std::vector<double>& delays_ps) {
  config.validate();
  if (!(config.simulation.scan_point_duration_s > 0))
    throw ValidationError("scan: simulation.scan_point_duration_s must be > 0");
  ExperimentConfig point = config;
  point.simulation.duration_s = config.simulation.scan_point_duration_s;
  if (config.simulation.scan_mean_photons > 0) {
    point.sources.dfg.mean_photons = config.simulation.scan_mean_photons;
    point.sources.dfg.power_w.reset();
  }
  SimulationInputs base = simulation_inputs(point);
  std::vector<ScanPoint> out;
  out.reserve(delays_ps.size());
  for (std::size_t i = 0; i < delays_ps.size(); ++i) {
    if (!std::isfinite(delays_ps[i])) throw ValidationError("scan: delays must be finite");
    point.simulation.delay_ps = delays_ps[i];
    point.simulation.seed = mix_seed(config.simulation.seed, kStreamScan, i);
    SimulationInputs in = base;
    in.overlap = pulse_overlap(point.signal, point.idler, delays_ps[i]);
    const auto r = simulate_coincidences(point, in);
    std::uint64_t central = 0;
    for (const auto& p : integrate_peaks(r.histogram, point.clock, 2, point.d2.gate_offset_ns))
      if (p.order == 0) central = p.total;
    out.push_back({delays_ps[i], central, std::sqrt(static_cast<double>(central))});
  }
  return out;
}

namespace {

struct GaussianResidual {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const std::vector<double>& x;
  const std::vector<double>& y;
  std::vector<double> w;

  int inputs() const { return 4; }
  int values() const { return static_cast<int>(x.size()); }

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
    const double k = 4.0 * std::log(2.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - p[2];
      f[static_cast<Eigen::Index>(i)] = w[i] * (p[0] + p[1] * std::exp(-k * d * d / (p[3] * p[3])) - y[i]);
    }
    return 0;
  }

  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& j) const {
    const double k = 4.0 * std::log(2.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const double d = x[i] - p[2];
      const double s2 = p[3] * p[3];
      const double e = std::exp(-k * d * d / s2);
      j(r, 0) = w[i];
      j(r, 1) = w[i] * e;
      j(r, 2) = w[i] * p[1] * e * 2.0 * k * d / s2;
      j(r, 3) = w[i] * p[1] * e * 2.0 * k * d * d / (s2 * p[3]);
    }
    return 0;
  }
};

}  // namespace

GaussianFit fit_gaussian(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("fit_gaussian: x and y differ in length");
  if (x.size() < 5) throw ValidationError("fit_gaussian: need at least 5 points");
  const auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());
  const double base = *ymin_it, top = *ymax_it;
  if (!(top > base)) throw StatisticsError("fit_gaussian: flat data");
  const std::size_t imax = static_cast<std::size_t>(ymax_it - y.begin());
  double left = x[imax], right = x[imax];
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] >= base + 0.5 * (top - base)) {
      left = std::min(left, x[i]);
      right = std::max(right, x[i]);
    }
  }
  double step = std::abs(x.back() - x.front()) / static_cast<double>(x.size() - 1);
  Eigen::VectorXd p(4);
  p << base, top - base, x[imax], std::max(right - left, step);

  GaussianResidual fn{x, y, std::vector<double>(x.size())};
  for (std::size_t i = 0; i < y.size(); ++i) fn.w[i] = 1.0 / std::sqrt(std::max(y[i], 1.0));
  Eigen::LevenbergMarquardt<GaussianResidual> lm(fn);
  lm.parameters.xtol = 1e-12;
  lm.parameters.ftol = 1e-12;
  lm.parameters.maxfev = 2000;
  const auto status = lm.minimize(p);
  if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters)
    throw SolverError("fit_gaussian: improper input to the least-squares solver");
  Eigen::VectorXd f(static_cast<Eigen::Index>(x.size()));
  fn(p, f);
  GaussianFit fit;
  fit.baseline = p[0];
  fit.amplitude = p[1];
  fit.center = p[2];
  fit.fwhm = std::abs(p[3]);
  fit.chi2 = f.squaredNorm();
  fit.iterations = static_cast<int>(lm.iter);
  return fit;
}

G2Result measure_heralded_g2(const ExperimentConfig& config, double duration_s) {
  config.validate();
  const auto& spdc = config.sources.spdc;
  if (!spdc.pair_probability) throw ValidationError("g2: spdc.pair_probability is required");
  if (!(duration_s > 0)) throw ValidationError("g2: duration must be > 0");
  const PairStatistics stats = config.pair_statistics;
  const double mean = *spdc.pair_probability;
  const double h = spdc.to_herald_detector.product() * config.d2.efficiency;
  const double t = config.simulation.g2_arm_efficiency;
  const double p_occ = occupied_probability(stats, mean);
  const bool clock_herald = stats == PairStatistics::coherent;

  const std::uint64_t pulses = pulse_count(duration_s, config.clock.rate_hz);
  const std::uint64_t chunks = (pulses + kChunkPulses - 1) / kChunkPulses;
  std::vector<G2Result> parts(chunks);
  parallel_for(chunks, config.simulation.threads, [&](std::size_t chunk) {
    Rng rng(mix_seed(config.simulation.seed, kStreamG2, chunk));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::uint64_t n = std::min(kChunkPulses, pulses - chunk * kChunkPulses);
    const std::uint64_t occupied =
        p_occ > 0 ? std::binomial_distribution<std::uint64_t>(n, std::min(p_occ, 1.0))(rng) : 0;
    G2Result& r = parts[chunk];
    if (clock_herald) r.heralds += n - occupied;
    for (std::uint64_t i = 0; i < occupied; ++i) {
      const int pairs = occupied_pairs(rng, stats, mean, p_occ);
      bool herald = clock_herald;
      bool a1 = false, a2 = false;
      for (int k = 0; k < pairs; ++k) {
        if (!herald && unit(rng) < h) herald = true;
        const double u = unit(rng);
        if (u < 0.5 * t)
          a1 = true;
        else if (u < t)
          a2 = true;
      }
      if (!herald) continue;
      ++r.heralds;
      r.herald_arm1 += a1;
      r.herald_arm2 += a2;
      r.herald_both += a1 && a2;
    }
  });
  G2Result g;
  for (const auto& p : parts) {
    g.heralds += p.heralds;
    g.herald_arm1 += p.herald_arm1;
    g.herald_arm2 += p.herald_arm2;
    g.herald_both += p.herald_both;
  }
  if (g.heralds == 0) throw StatisticsError("g2: no herald counts");
  if (g.herald_arm1 == 0 || g.herald_arm2 == 0) throw StatisticsError("g2: no heralded counts in one arm");
  const double nh = static_cast<double>(g.heralds), n1 = static_cast<double>(g.herald_arm1),
               n2 = static_cast<double>(g.herald_arm2), n12 = static_cast<double>(g.herald_both);
  g.value = n12 * nh / (n1 * n2);
  g.error = n12 > 0 ? g.value * std::sqrt(1 / n12 + 1 / n1 + 1 / n2 + 1 / nh) : nh / (n1 * n2);
  return g;
}

double ShgInjector::rate_for_photons(double m, double rep_rate_hz) const {
  return kappa * m * m * rep_rate_hz;
}

double dfg_photons_from_power(const ExperimentConfig& config, double power_w) {
  const auto& dfg = config.sources.dfg;
  return photons_per_pulse(power_w, dfg.wavelength_nm, config.clock.rate_hz) * dfg.dwdm_to_waveguide.product();
}

ShgInjector shg_background_injector(const ExperimentConfig& config) {
  ShgInjector inj;
  const auto& noise = config.noise;
  const auto& dfg = config.sources.dfg;
  inj.mean_photons = config.sources.dfg_mean_photons(config.clock).value_or(0.0);
  if (!(noise.anchor_power_nw > 0)) return inj;
  const double lambda = noise.shg_wavelength_nm > 0 ? noise.shg_wavelength_nm : dfg.wavelength_nm;
  const double pct = config.waveguide.shg_efficiency_pct_per_w_cm2;
  const double length = config.waveguide.grating.length_cm;
  inj.calibration = shg_noise_calibration(noise.anchor_power_nw * 1e-9, noise.anchor_rate_hz,
                                          dfg.fiber_coupling, pct, length, lambda);
  // Both the rate and m^2 scale as P^2, so any reference power fixes kappa.
  const double p_ref = 1e-9;
  const double m_ref = dfg_photons_from_power(config, p_ref);
  const double r_ref = shg_noise_rate(p_ref, dfg.fiber_coupling, pct, length, lambda, inj.calibration);
  inj.kappa = r_ref / (config.clock.rate_hz * m_ref * m_ref);
  inj.rate_hz = inj.rate_for_photons(inj.mean_photons, config.clock.rate_hz);
  return inj;
}

namespace {

void write_preamble(std::ostringstream& os, const std::vector<std::string>& preamble) {
  for (const auto& line : preamble) os << "# " << line << '\n';
}

std::string tidy(double x) { return format_number(std::round(x * 1e9) / 1e9); }

}  // namespace

std::string histogram_to_csv(const CoincidenceHistogram& h, const std::vector<std::string>& preamble) {
  std::ostringstream os;
  write_preamble(os, preamble);
  os << "bin_start_ns,counts\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) os << tidy(h.bin_start(i)) << ',' << h.counts[i] << '\n';
  return os.str();
}

std::string scan_to_csv(const std::vector<ScanPoint>& points, const std::vector<std::string>& preamble) {
  std::ostringstream os;
  write_preamble(os, preamble);
  os << "delay_ps,counts,poisson_error\n";
  for (const auto& p : points)
    os << tidy(p.delay_ps) << ',' << p.counts << ',' << format_number(p.poisson_error) << '\n';
  return os.str();
}

}  // namespace spsfg
