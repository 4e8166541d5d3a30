// spsfg: command-line front end. Every subcommand loads a configuration
// (the built-in one unless --config is given), writes its artifacts into
// --out and prints a one-line JSON status. Failures print an error object on
// stderr and exit nonzero.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "spsfg/config.hpp"
#include "spsfg/config_text.hpp"
#include "spsfg/conversion.hpp"
#include "spsfg/error.hpp"
#include "spsfg/report.hpp"
#include "spsfg/simkit.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace spsfg;

namespace {

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io_error"; }
};

struct Common {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<double> duration_s;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, Common& c, bool stochastic) {
  cmd->add_option("--config", c.config_path, "Configuration file (default: built-in setup)");
  cmd->add_option("--out", c.out_dir, "Output directory (created if missing)")->capture_default_str();
  cmd->add_option("--threads", c.threads, "Worker threads, 0 = all cores (results do not depend on it)");
  if (stochastic) {
    cmd->add_option("--seed", c.seed, "RNG seed (overrides [simulation] seed)");
    cmd->add_option("--duration", c.duration_s, "Simulated time in seconds (overrides [simulation] duration_s)");
  }
  cmd->footer(config_reference());
}

LoadedConfig load(const Common& c) {
  LoadedConfig cfg = c.config_path.empty() ? reference_config() : load_config_file(c.config_path);
  if (c.seed) cfg.config.simulation.seed = *c.seed;
  if (c.duration_s) cfg.config.simulation.duration_s = *c.duration_s;
  if (c.threads) cfg.config.simulation.threads = *c.threads;
  cfg.config.validate();
  // The hash follows the effective configuration, command-line overrides included.
  cfg.canonical = canonical_config(cfg.config);
  cfg.hash = fnv1a_hex(cfg.canonical);
  return cfg;
}

std::vector<std::string> preamble(const LoadedConfig& cfg, const std::string& command, bool stochastic) {
  std::vector<std::string> lines{"spsfg " SPSFG_VERSION " " + command, "config_hash " + cfg.hash};
  if (stochastic) lines.push_back("seed " + std::to_string(cfg.config.simulation.seed));
  return lines;
}

std::string write_file(const Common& c, const std::string& name, const std::string& content) {
  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + c.out_dir + "': " + ec.message());
  const fs::path p = fs::path(c.out_dir) / name;
  std::ofstream out(p, std::ios::binary);
  out << content;
  out.close();
  if (!out) throw IoError("cannot write '" + p.string() + "'");
  return p.string();
}

json header(const LoadedConfig& cfg, bool stochastic) {
  json j;
  j["tool_version"] = SPSFG_VERSION;
  j["config_hash"] = cfg.hash;
  if (stochastic) j["seed"] = cfg.config.simulation.seed;
  return j;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void status(const std::string& command, const std::vector<std::string>& files, json extra = json::object()) {
  extra["command"] = command;
  extra["status"] = "ok";
  extra["files"] = files;
  std::cout << extra.dump() << '\n';
}

// ---- subcommands ----------------------------------------------------------

struct TuningArgs {
  double from = 1546, to = 1566, step = 0.05;
};

void run_tuning(const Common& c, const TuningArgs& a) {
  const auto cfg = load(c);
  const WaveguideSpec w = resolve_waveguide(cfg.config);
  const auto curve = shg_tuning_curve(cfg.config.sellmeier, w, a.from, a.to, a.step);
  std::string csv;
  for (const auto& line : preamble(cfg, "tuning-curve", false)) csv += "# " + line + "\n";
  csv += "wavelength_nm,relative,absolute_pct_per_w_cm2\n";
  for (const auto& p : curve)
    csv += format_number(std::round(p.wavelength_nm * 1e9) / 1e9) + "," + format_number(p.relative) + "," +
           format_number(p.absolute_pct_per_w_cm2) + "\n";
  status("tuning-curve", {write_file(c, "tuning_curve.csv", csv)}, {{"rows", curve.size()}});
}

struct MatrixArgs {
  double signal_from = 1556, signal_to = 1564, signal_step = 0.05;
  double idler_from = 1547, idler_to = 1555, idler_step = 0.05;
};

void run_matrix(const Common& c, const MatrixArgs& a) {
  const auto cfg = load(c);
  const WaveguideSpec w = resolve_waveguide(cfg.config);
  const auto sig = uniform_grid(a.signal_from, a.signal_to, a.signal_step);
  const auto idl = uniform_grid(a.idler_from, a.idler_to, a.idler_step);
  const auto m = sfg_efficiency_matrix(cfg.config.sellmeier, w, sig, idl, cfg.config.simulation.threads);
  std::size_t best = 0;
  for (std::size_t k = 1; k < m.values.size(); ++k)
    if (m.values[k] > m.values[best]) best = k;
  json side = header(cfg, false);
  side["rows"] = sig.size();
  side["columns"] = idl.size();
  side["max"] = m.max();
  side["max_signal_nm"] = sig[best / idl.size()];
  side["max_idler_nm"] = idl[best % idl.size()];
  side["peak_photon_level"] = m.peak_value;
  side["poling_period_um"] = w.grating.period_um;
  side["crystal_temperature_c"] = w.grating.temperature_c;
  std::vector<std::string> files{write_file(c, "matrix.csv", matrix_to_csv(m, preamble(cfg, "matrix", false))),
                                 write_file(c, "matrix.json", side.dump(2) + "\n")};
  status("matrix", files, {{"max", m.max()}});
}

void run_budget(const Common& c) {
  const auto cfg = load(c);
  const auto r = budget_report(cfg.config);
  const std::string text = budget_report_text(r);
  std::vector<std::string> files{
      write_file(c, "budget.json", budget_report_json(r, SPSFG_VERSION, cfg.hash)),
      write_file(c, "budget.txt", "# spsfg " SPSFG_VERSION " budget\n# config_hash " + cfg.hash + "\n" + text),
      write_file(c, "noise.csv", noise_table_csv(r, preamble(cfg, "budget", false)))};
  std::cerr << text;
  status("budget", files,
         {{"beta_hz", r.beta_available ? json(r.beta.value) : json(nullptr)},
          {"effective_efficiency", r.effective.value},
          {"predicted_per_hour", r.beta_available ? json(per_hour(r.predicted_rate_hz)) : json(nullptr)}});
}

json peaks_json(const std::vector<PeakTotal>& peaks) {
  json out = json::array();
  for (const auto& p : peaks) out.push_back({{"order", p.order}, {"center_ns", p.center_ns}, {"total", p.total}});
  return out;
}

void run_simulate(const Common& c, std::optional<double> delay_ps) {
  auto cfg = load(c);
  if (delay_ps) {
    cfg.config.simulation.delay_ps = *delay_ps;
    cfg.canonical = canonical_config(cfg.config);
    cfg.hash = fnv1a_hex(cfg.canonical);
  }
  const auto& x = cfg.config;
  const auto r = simulate_coincidences(x);
  const auto peaks = integrate_peaks(r.histogram, x.clock, 2, x.d2.gate_offset_ns);
  const SnrResult s = snr(peaks);
  const std::uint64_t central = s.central;
  const double hours = r.histogram.duration_s / 3600.0;
  std::optional<double> spacing;
  try {
    spacing = peak_spacing_ns(r.histogram);
  } catch (const StatisticsError&) {
  }

  json j = header(cfg, true);
  j["duration_s"] = r.histogram.duration_s;
  j["pulses"] = r.counts.pulses;
  j["inputs"] = {{"efficiency", r.inputs.efficiency},
                 {"overlap", r.inputs.overlap},
                 {"pair_mean", r.inputs.pair_mean},
                 {"signal_transmission", r.inputs.signal_transmission},
                 {"dfg_mean_photons", r.inputs.dfg_mean_photons},
                 {"dfg_transmission", r.inputs.dfg_transmission},
                 {"herald_click", r.inputs.herald_click},
                 {"shg_kappa", r.inputs.shg_kappa}};
  j["counts"] = {{"d1_signal", r.counts.d1_signal},     {"d1_shg", r.counts.d1_shg},
                 {"d1_dark", r.counts.d1_dark},         {"d1_total", r.counts.d1_clicks()},
                 {"d2_clicks", r.counts.d2_clicks},     {"d2_outside_bins", r.counts.d2_outside_bins},
                 {"coincidences", r.histogram.total()}};
  j["rates"] = {{"d1_hz", static_cast<double>(r.counts.d1_clicks()) / r.histogram.duration_s},
                {"central_peak_per_hour", static_cast<double>(central) / hours},
                {"side_peak_mean_per_hour", s.side_mean / hours},
                {"central_peak_net_per_hour", (static_cast<double>(central) - s.side_mean) / hours}};
  j["peaks"] = peaks_json(peaks);
  j["snr"] = {{"value", finite_or_null(s.value)}, {"error", finite_or_null(s.error)}, {"infinite", s.infinite}};
  j["peak_spacing_ns"] = spacing ? json(*spacing) : json(nullptr);
  j["clock_period_ns"] = x.clock.period_ns();
  j["bin_width_ns"] = r.histogram.bin_width_ns;
  std::vector<std::string> files{
      write_file(c, "histogram.csv", histogram_to_csv(r.histogram, preamble(cfg, "simulate", true))),
      write_file(c, "summary.json", j.dump(2) + "\n")};
  status("simulate", files, {{"central_peak_per_hour", static_cast<double>(central) / hours},
                             {"snr", finite_or_null(s.value)}});
}

struct ScanArgs {
  double from = -30, to = 30, step = 2;
  std::optional<double> point_duration_s;
};

void run_scan(const Common& c, const ScanArgs& a) {
  auto cfg = load(c);
  if (a.point_duration_s) cfg.config.simulation.scan_point_duration_s = *a.point_duration_s;
  cfg.canonical = canonical_config(cfg.config);
  cfg.hash = fnv1a_hex(cfg.canonical);
  const auto delays = uniform_grid(a.from, a.to, a.step);
  const auto points = overlap_scan(cfg.config, delays);
  std::vector<std::string> files{write_file(c, "scan.csv", scan_to_csv(points, preamble(cfg, "scan-delay", true)))};
  json extra = json::object();
  if (points.size() >= 5) {
    std::vector<double> x, y;
    for (const auto& p : points) {
      x.push_back(p.delay_ps);
      y.push_back(static_cast<double>(p.counts));
    }
    json j = header(cfg, true);
    try {
      const auto fit = fit_gaussian(x, y);
      j["fit"] = {{"fwhm_ps", fit.fwhm}, {"center_ps", fit.center}, {"amplitude", fit.amplitude},
                  {"baseline", fit.baseline}, {"chi2", fit.chi2}, {"iterations", fit.iterations}};
      extra["fwhm_ps"] = fit.fwhm;
    } catch (const Error& e) {
      j["fit"] = nullptr;
      j["fit_error"] = e.what();
    }
    j["point_duration_s"] = cfg.config.simulation.scan_point_duration_s;
    files.push_back(write_file(c, "scan_fit.json", j.dump(2) + "\n"));
  }
  status("scan-delay", files, extra);
}

struct ExtractArgs {
  std::optional<double> rate_per_hour;
  std::optional<double> rate_error_per_hour;
};

void run_extract(const Common& c, const ExtractArgs& a) {
  const auto cfg = load(c);
  const auto& x = cfg.config;
  const double rate = a.rate_per_hour ? *a.rate_per_hour : x.measurement.rate_per_hour.value_or(
                                                                std::numeric_limits<double>::quiet_NaN());
  if (std::isnan(rate)) throw ValidationError("extract-efficiency: no rate given and [measurement] rate_per_hour unset");
  const double err = a.rate_error_per_hour.value_or(a.rate_per_hour ? 0.0 : x.measurement.rate_error_per_hour);
  const BetaProduct beta = beta_product(x.sources, x.clock);
  const Estimate eta = extract_sfg_efficiency(Estimate{from_per_hour(rate), from_per_hour(err)}, beta.value);
  const Estimate intrinsic = intrinsic_efficiency(eta, x.waveguide_to_d1, x.waveguide.coupling);
  json j = header(cfg, false);
  j["rate_per_hour"] = {{"value", rate}, {"error", err}};
  j["beta_hz"] = beta.value;
  j["efficiency"] = {{"value", eta.value}, {"error", eta.error},
                     {"relative_error", eta.value > 0 ? json(eta.error / eta.value) : json(nullptr)}};
  j["intrinsic_efficiency"] = {{"value", intrinsic.value}, {"error", intrinsic.error}};
  status("extract-efficiency", {write_file(c, "extraction.json", j.dump(2) + "\n")},
         {{"efficiency", eta.value}, {"error", eta.error}});
}

void run_g2(const Common& c) {
  const auto cfg = load(c);
  const auto g = measure_heralded_g2(cfg.config, cfg.config.simulation.duration_s);
  json j = header(cfg, true);
  j["duration_s"] = cfg.config.simulation.duration_s;
  j["pair_statistics"] = to_string(cfg.config.pair_statistics);
  j["g2"] = {{"value", g.value}, {"error", g.error}};
  j["counts"] = {{"heralds", g.heralds}, {"herald_arm1", g.herald_arm1}, {"herald_arm2", g.herald_arm2},
                 {"herald_both", g.herald_both}};
  status("g2", {write_file(c, "g2.json", j.dump(2) + "\n")}, {{"g2", g.value}});
}

void run_show_config(const Common& c) {
  const auto cfg = load(c);
  std::cout << "# config_hash " << cfg.hash << "\n" << cfg.canonical;
}

int fail(const std::string& kind, const std::string& message, int code) {
  json j{{"error", {{"kind", kind}, {"message", message}}}};
  std::cerr << j.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-photon sum-frequency generation toolkit: phase matching, efficiency budget "
               "and coincidence simulation"};
  app.set_version_flag("--version", std::string("spsfg ") + SPSFG_VERSION);
  app.require_subcommand(1);
  app.footer(config_reference());

  Common common;
  TuningArgs tuning;
  auto* tc = app.add_subcommand("tuning-curve", "SHG tuning curve at the calibration temperature -> tuning_curve.csv");
  add_common(tc, common, false);
  tc->add_option("--from", tuning.from, "First fundamental wavelength, nm")->capture_default_str();
  tc->add_option("--to", tuning.to, "Last fundamental wavelength, nm")->capture_default_str();
  tc->add_option("--step", tuning.step, "Step, nm")->capture_default_str();

  MatrixArgs matrix;
  auto* mc = app.add_subcommand("matrix", "Photon-level SFG efficiency over (signal, idler) -> matrix.csv, matrix.json");
  add_common(mc, common, false);
  mc->add_option("--signal-from", matrix.signal_from, "nm")->capture_default_str();
  mc->add_option("--signal-to", matrix.signal_to, "nm")->capture_default_str();
  mc->add_option("--signal-step", matrix.signal_step, "nm")->capture_default_str();
  mc->add_option("--idler-from", matrix.idler_from, "nm")->capture_default_str();
  mc->add_option("--idler-to", matrix.idler_to, "nm")->capture_default_str();
  mc->add_option("--idler-step", matrix.idler_step, "nm")->capture_default_str();

  auto* bc = app.add_subcommand("budget", "Efficiency and rate budget -> budget.json, budget.txt, noise.csv");
  add_common(bc, common, false);

  std::optional<double> delay_ps;
  auto* sc = app.add_subcommand("simulate", "Coincidence histogram Monte Carlo -> histogram.csv, summary.json");
  add_common(sc, common, true);
  sc->add_option("--delay-ps", delay_ps, "Relative signal/idler delay, ps (overrides [simulation] delay_ps)");

  ScanArgs scan;
  auto* dc = app.add_subcommand("scan-delay", "Delay scan of the central coincidence peak -> scan.csv, scan_fit.json");
  add_common(dc, common, true);
  dc->add_option("--from-ps", scan.from, "First delay, ps")->capture_default_str();
  dc->add_option("--to-ps", scan.to, "Last delay, ps")->capture_default_str();
  dc->add_option("--step-ps", scan.step, "Delay step, ps")->capture_default_str();
  dc->add_option("--point-duration", scan.point_duration_s,
                 "Simulated seconds per delay (overrides [simulation] scan_point_duration_s)");

  ExtractArgs extract;
  auto* ec = app.add_subcommand("extract-efficiency", "Efficiency from a coincidence rate -> extraction.json");
  add_common(ec, common, false);
  ec->add_option("--rate-per-hour", extract.rate_per_hour, "Coincidence rate (default: [measurement] rate_per_hour)");
  ec->add_option("--rate-error-per-hour", extract.rate_error_per_hour, "Its one-sigma error");

  auto* gc = app.add_subcommand("g2", "Heralded g2(0) Monte Carlo -> g2.json");
  add_common(gc, common, true);

  auto* vc = app.add_subcommand("show-config", "Print the canonical configuration and its hash");
  add_common(vc, common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage_error", e.what(), 2);
  }

  try {
    if (*tc) run_tuning(common, tuning);
    else if (*mc) run_matrix(common, matrix);
    else if (*bc) run_budget(common);
    else if (*sc) run_simulate(common, delay_ps);
    else if (*dc) run_scan(common, scan);
    else if (*ec) run_extract(common, extract);
    else if (*gc) run_g2(common);
    else if (*vc) run_show_config(common);
  } catch (const Error& e) {
    return fail(e.kind(), e.what(), 1);
  } catch (const std::exception& e) {
    return fail("internal_error", e.what(), 1);
  }
  return 0;
}
