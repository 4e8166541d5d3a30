#include "spsfg/config.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "spsfg/config_text.hpp"
#include "spsfg/error.hpp"
#include "spsfg/reference_config_data.hpp"

namespace spsfg {

namespace {

constexpr const char* kChainNames[] = {"spdc_to_waveguide", "herald_to_d2", "dfg_to_waveguide",
                                       "dwdm_to_waveguide", "waveguide_to_d1"};

constexpr const char* kKnownSections[] = {
    "clock", "sellmeier", "waveguide", "spdc", "dfg", "detectors.d1", "detectors.d2",
    "noise", "measurement", "simulation"};

bool known_section(const std::string& name) {
  for (const char* s : kKnownSections)
    if (name == s) return true;
  if (name.rfind("chains.", 0) == 0) {
    for (const char* c : kChainNames)
      if (name == std::string("chains.") + c) return true;
  }
  return false;
}

// Run a validating step and keep going; the message joins the error list.
template <typename Fn>
void collect(std::vector<std::string>& errors, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    errors.emplace_back(e.what());
  }
}

template <typename T, typename Parse>
T parsed_or(std::vector<std::string>& errors, const std::optional<std::string>& name, T fallback, Parse parse) {
  if (!name) return fallback;
  T out = fallback;
  collect(errors, [&] { out = parse(*name); });
  return out;
}

SellmeierModel read_sellmeier(SectionReader& r, const std::string& base_dir, std::string& source,
                              std::vector<std::string>& errors) {
  const double t = r.number_or("temperature_c", 25.0);
  const std::string model = r.text_or("model", "jundt1997");
  if (model == "jundt1997") {
    source = model;
    return SellmeierModel::congruent_lithium_niobate(t);
  }
  if (model == "file") {
    source = "inline";
    auto path = r.text("file");
    if (!path) return SellmeierModel::congruent_lithium_niobate(t);
    std::filesystem::path p(*path);
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    try {
      return load_sellmeier_file(p.string()).at_temperature(t);
    } catch (const Error& e) {
      errors.emplace_back(e.what());
      return SellmeierModel::congruent_lithium_niobate(t);
    }
  }
  if (model == "inline") {
    source = "inline";
    SellmeierCoefficients c;
    auto get = [&](const char* key, double& out) {
      if (auto v = r.number(key)) out = *v;
    };
    get("a1", c.a1); get("a2", c.a2); get("a3", c.a3); get("a4", c.a4); get("a5", c.a5); get("a6", c.a6);
    get("b1", c.b1); get("b2", c.b2); get("b3", c.b3); get("b4", c.b4);
    c.t_ref_c = r.number_or("t_ref_c", c.t_ref_c);
    c.t_offset_c = r.number_or("t_offset_c", c.t_offset_c);
    Interval w, tw;
    get("window_min_um", w.lo);
    get("window_max_um", w.hi);
    get("temperature_min_c", tw.lo);
    get("temperature_max_c", tw.hi);
    const std::string name = r.text_or("name", "inline");
    try {
      return SellmeierModel(name, c, w, tw, t);
    } catch (const Error& e) {
      errors.emplace_back(e.what());
      return SellmeierModel::congruent_lithium_niobate(t);
    }
  }
  errors.push_back("[sellmeier] model must be \"jundt1997\", \"file\" or \"inline\", got \"" + model + "\"");
  return SellmeierModel::congruent_lithium_niobate(t);
}

TransmissionChain read_chain(const ConfigText& doc, const char* name, std::vector<std::string>& errors) {
  const std::string section = std::string("chains.") + name;
  SectionReader r(doc.find(section), section, errors);
  TransmissionChain chain;
  for (auto& [key, value] : r.all_numbers()) collect(errors, [&] { chain.add(key, value); });
  r.finish();
  return chain;
}

void read_field(SectionReader& r, FieldSpec& f, const char* prefix, std::vector<std::string>& errors) {
  const std::string p = prefix;
  f.center_nm = r.number(p + "wavelength_nm").value_or(0);
  f.bandwidth_nm = r.number(p + "bandwidth_nm").value_or(0);
  f.duration_ps = r.number("pulse_duration_ps").value_or(0);
  f.shape = parsed_or(errors, r.text(p + "shape", false), SpectralShape::gaussian, parse_spectral_shape);
}

DetectorSpec read_detector(SectionReader& r, std::vector<std::string>& errors) {
  DetectorSpec d;
  d.mode = parsed_or(errors, r.text("mode"), DetectorMode::free_running, parse_detector_mode);
  d.efficiency = r.number("efficiency").value_or(0);
  d.jitter_ps = r.number("jitter_ps").value_or(0);
  if (d.mode == DetectorMode::gated) {
    d.dark_probability_per_gate = r.number("dark_probability_per_gate").value_or(0);
    d.gate_window_ns = r.number("gate_window_ns").value_or(0);
    d.gate_offset_ns = r.number_or("gate_offset_ns", 0);
  } else {
    d.dark_rate_hz = r.number("dark_rate_hz").value_or(0);
    d.clock_window_ns = r.number_or("clock_window_ns", 0);
  }
  return d;
}

std::uint64_t read_seed(SectionReader& r, std::vector<std::string>& errors) {
  const double s = r.number_or("seed", 1);
  if (!(s >= 0 && s <= 9007199254740992.0 && std::floor(s) == s)) {
    errors.push_back("[simulation] seed must be an integer in [0, 2^53]");
    return 1;
  }
  return static_cast<std::uint64_t>(s);
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view text, const std::string& base_dir) {
  const ConfigText doc = parse_config_text(text);
  std::vector<std::string> errors;
  for (const auto& s : doc.sections)
    if (!known_section(s.name))
      errors.push_back("unknown section [" + s.name + "] (line " + std::to_string(s.line) + ")");

  ExperimentConfig c;

  SectionReader clock(doc.find("clock"), "clock", errors);
  c.clock.rate_hz = clock.number("rate_mhz").value_or(0) * 1e6;
  c.clock.pulse_duration_ps = clock.number("pulse_duration_ps").value_or(0);
  clock.finish();

  SectionReader sell(doc.find("sellmeier"), "sellmeier", errors);
  c.sellmeier = read_sellmeier(sell, base_dir, c.sellmeier_source, errors);
  sell.finish();

  SectionReader wg(doc.find("waveguide"), "waveguide", errors);
  c.waveguide.grating.length_cm = wg.number("length_cm").value_or(0);
  c.waveguide.grating.order = static_cast<int>(wg.number_or("grating_order", 1));
  if (std::floor(wg.number_or("grating_order", 1)) != wg.number_or("grating_order", 1))
    errors.push_back("[waveguide] grating_order must be an integer");
  c.waveguide.shg_efficiency_pct_per_w_cm2 = wg.number("shg_efficiency_pct_per_w_cm2").value_or(0);
  c.waveguide.peak_wavelength_nm = wg.number("peak_wavelength_nm").value_or(0);
  c.waveguide.calibration_temperature_c = wg.number_or("calibration_temperature_c", 25.0);
  c.waveguide.grating.temperature_c = c.waveguide.calibration_temperature_c;
  c.waveguide.coupling = wg.number("coupling").value_or(0);
  c.waveguide.bandwidth_ghz_cm = wg.number("bandwidth_ghz_cm").value_or(0);
  c.waveguide.time_bandwidth_product = wg.number("time_bandwidth_product").value_or(0);
  c.operating_point = parsed_or(errors, wg.text("operating_point", false), OperatingPoint::tuned,
                                parse_operating_point);
  wg.finish();

  SectionReader spdc(doc.find("spdc"), "spdc", errors);
  read_field(spdc, c.signal, "signal_", errors);
  c.herald_wavelength_nm = spdc.number("herald_wavelength_nm").value_or(0);
  c.sources.spdc.pair_probability = spdc.number("pair_probability", false);
  c.pair_statistics = parsed_or(errors, spdc.text("pair_statistics", false), PairStatistics::poisson,
                                parse_pair_statistics);
  c.sources.spdc.herald_detection_efficiency = spdc.number("herald_detection_efficiency", false);
  c.sources.spdc.heralded_g2 = spdc.number_or("heralded_g2", 0);
  c.signal.mean_photons = c.sources.spdc.pair_probability.value_or(0);
  spdc.finish();

  SectionReader dfg(doc.find("dfg"), "dfg", errors);
  read_field(dfg, c.idler, "", errors);
  c.sources.dfg.wavelength_nm = c.idler.center_nm;
  c.sources.dfg.mean_photons = dfg.number("mean_photons", false);
  if (auto p = dfg.number("power_nw", false)) c.sources.dfg.power_w = *p * 1e-9;
  c.sources.dfg.fiber_coupling = dfg.number("fiber_coupling").value_or(0);
  c.sources.dfg.upconversion_detection_efficiency = dfg.number("upconversion_detection_efficiency", false);
  c.simulation.scan_mean_photons = dfg.number_or("scan_mean_photons", 0);
  dfg.finish();

  SectionReader d1(doc.find("detectors.d1"), "detectors.d1", errors);
  c.d1 = read_detector(d1, errors);
  d1.finish();
  SectionReader d2(doc.find("detectors.d2"), "detectors.d2", errors);
  c.d2 = read_detector(d2, errors);
  d2.finish();

  c.sources.spdc.to_waveguide = read_chain(doc, "spdc_to_waveguide", errors);
  c.sources.spdc.to_herald_detector = read_chain(doc, "herald_to_d2", errors);
  c.sources.dfg.to_waveguide = read_chain(doc, "dfg_to_waveguide", errors);
  c.sources.dfg.dwdm_to_waveguide = read_chain(doc, "dwdm_to_waveguide", errors);
  c.waveguide_to_d1 = read_chain(doc, "waveguide_to_d1", errors);
  c.idler.mean_photons = c.sources.dfg_mean_photons(c.clock).value_or(0);

  SectionReader noise(doc.find("noise"), "noise", errors);
  if (noise.present()) {
    c.noise.powers_nw = noise.numbers("powers_nw", false).value_or(std::vector<double>{});
    c.noise.measured_hz = noise.numbers("measured_hz", false).value_or(std::vector<double>{});
    c.noise.anchor_power_nw = noise.number("anchor_power_nw").value_or(0);
    c.noise.anchor_rate_hz = noise.number("anchor_rate_hz").value_or(0);
    c.noise.shg_relative_efficiency = noise.number_or("shg_relative_efficiency", 0);
    c.noise.shg_wavelength_nm = noise.number_or("shg_wavelength_nm", 0);
  }
  noise.finish();

  SectionReader meas(doc.find("measurement"), "measurement", errors);
  c.measurement.rate_per_hour = meas.number("rate_per_hour", false);
  c.measurement.rate_error_per_hour = meas.number_or("rate_error_per_hour", 0);
  meas.finish();

  SectionReader sim(doc.find("simulation"), "simulation", errors);
  c.simulation.duration_s = sim.number_or("duration_s", c.simulation.duration_s);
  c.simulation.seed = read_seed(sim, errors);
  c.simulation.bin_width_ns = sim.number_or("bin_width_ns", c.simulation.bin_width_ns);
  c.simulation.delay_ps = sim.number_or("delay_ps", 0);
  c.simulation.efficiency_override = sim.number("efficiency_override", false);
  c.simulation.scan_point_duration_s = sim.number_or("scan_point_duration_s", c.simulation.scan_point_duration_s);
  c.simulation.g2_arm_efficiency = sim.number_or("g2_arm_efficiency", 1.0);
  const double threads = sim.number_or("threads", 0);
  if (!(threads >= 0 && threads <= 4096 && std::floor(threads) == threads))
    errors.push_back("[simulation] threads must be an integer in [0, 4096]");
  else
    c.simulation.threads = static_cast<unsigned>(threads);
  sim.finish();

  if (errors.empty()) collect(errors, [&] { c.validate(); });
  if (!errors.empty()) {
    std::string msg = "invalid configuration (" + std::to_string(errors.size()) + " problem" +
                      (errors.size() == 1 ? "" : "s") + "):";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ValidationError(msg);
  }
  return c;
}

LoadedConfig load_config_text(std::string_view text, std::string source, const std::string& base_dir) {
  LoadedConfig out;
  out.config = parse_experiment_config(text, base_dir);
  out.canonical = canonical_config(out.config);
  out.hash = fnv1a_hex(out.canonical);
  out.source = std::move(source);
  return out;
}

LoadedConfig load_config_file(const std::string& path) {
  const std::string text = read_text_file(path);
  return load_config_text(text, path, std::filesystem::path(path).parent_path().string());
}

std::string_view reference_config_text() { return embedded::kReferenceConfig; }

LoadedConfig reference_config() { return load_config_text(reference_config_text(), "builtin:reference"); }

namespace {

class Emitter {
 public:
  void section(const std::string& name) {
    if (!first_) os_ << '\n';
    first_ = false;
    os_ << '[' << name << "]\n";
  }
  void num(const std::string& key, double v) { os_ << key << " = " << format_number(v) << '\n'; }
  void str(const std::string& key, const std::string& v) { os_ << key << " = \"" << v << "\"\n"; }
  void list(const std::string& key, const std::vector<double>& v) {
    os_ << key << " = [";
    for (std::size_t i = 0; i < v.size(); ++i) os_ << (i ? ", " : "") << format_number(v[i]);
    os_ << "]\n";
  }
  void opt(const std::string& key, const std::optional<double>& v) {
    if (v) num(key, *v);
  }
  void chain(const std::string& name, const TransmissionChain& c) {
    if (c.empty()) return;
    section("chains." + name);
    for (const auto& f : c.factors()) num(f.label, f.transmission);
  }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
  bool first_ = true;
};

void emit_detector(Emitter& e, const DetectorSpec& d) {
  e.str("mode", to_string(d.mode));
  e.num("efficiency", d.efficiency);
  e.num("jitter_ps", d.jitter_ps);
  if (d.mode == DetectorMode::gated) {
    e.num("dark_probability_per_gate", d.dark_probability_per_gate);
    e.num("gate_window_ns", d.gate_window_ns);
    e.num("gate_offset_ns", d.gate_offset_ns);
  } else {
    e.num("dark_rate_hz", d.dark_rate_hz);
    e.num("clock_window_ns", d.clock_window_ns);
  }
}

}  // namespace

std::string canonical_config(const ExperimentConfig& c) {
  Emitter e;
  e.section("clock");
  e.num("rate_mhz", c.clock.rate_hz / 1e6);
  e.num("pulse_duration_ps", c.clock.pulse_duration_ps);

  e.section("sellmeier");
  if (c.sellmeier_source == "jundt1997") {
    e.str("model", "jundt1997");
  } else {
    const auto& k = c.sellmeier.coefficients();
    e.str("model", "inline");
    e.str("name", c.sellmeier.name());
    e.num("a1", k.a1); e.num("a2", k.a2); e.num("a3", k.a3); e.num("a4", k.a4); e.num("a5", k.a5);
    e.num("a6", k.a6); e.num("b1", k.b1); e.num("b2", k.b2); e.num("b3", k.b3); e.num("b4", k.b4);
    e.num("t_ref_c", k.t_ref_c);
    e.num("t_offset_c", k.t_offset_c);
    e.num("window_min_um", c.sellmeier.window_um().lo);
    e.num("window_max_um", c.sellmeier.window_um().hi);
    e.num("temperature_min_c", c.sellmeier.temperature_window_c().lo);
    e.num("temperature_max_c", c.sellmeier.temperature_window_c().hi);
  }
  e.num("temperature_c", c.sellmeier.temperature_c());

  const auto& w = c.waveguide;
  e.section("waveguide");
  e.num("length_cm", w.grating.length_cm);
  e.num("grating_order", w.grating.order);
  e.num("shg_efficiency_pct_per_w_cm2", w.shg_efficiency_pct_per_w_cm2);
  e.num("peak_wavelength_nm", w.peak_wavelength_nm);
  e.num("calibration_temperature_c", w.calibration_temperature_c);
  e.str("operating_point", to_string(c.operating_point));
  e.num("coupling", w.coupling);
  e.num("bandwidth_ghz_cm", w.bandwidth_ghz_cm);
  e.num("time_bandwidth_product", w.time_bandwidth_product);

  const auto& s = c.sources.spdc;
  e.section("spdc");
  e.num("signal_wavelength_nm", c.signal.center_nm);
  e.num("signal_bandwidth_nm", c.signal.bandwidth_nm);
  e.str("signal_shape", to_string(c.signal.shape));
  e.num("pulse_duration_ps", c.signal.duration_ps);
  e.num("herald_wavelength_nm", c.herald_wavelength_nm);
  e.opt("pair_probability", s.pair_probability);
  e.str("pair_statistics", to_string(c.pair_statistics));
  e.opt("herald_detection_efficiency", s.herald_detection_efficiency);
  e.num("heralded_g2", s.heralded_g2);

  const auto& d = c.sources.dfg;
  e.section("dfg");
  e.num("wavelength_nm", c.idler.center_nm);
  e.num("bandwidth_nm", c.idler.bandwidth_nm);
  e.str("shape", to_string(c.idler.shape));
  e.num("pulse_duration_ps", c.idler.duration_ps);
  e.opt("mean_photons", d.mean_photons);
  if (d.power_w) e.num("power_nw", *d.power_w * 1e9);
  e.num("fiber_coupling", d.fiber_coupling);
  e.opt("upconversion_detection_efficiency", d.upconversion_detection_efficiency);
  e.num("scan_mean_photons", c.simulation.scan_mean_photons);

  e.section("detectors.d1");
  emit_detector(e, c.d1);
  e.section("detectors.d2");
  emit_detector(e, c.d2);

  e.chain("spdc_to_waveguide", s.to_waveguide);
  e.chain("herald_to_d2", s.to_herald_detector);
  e.chain("dfg_to_waveguide", d.to_waveguide);
  e.chain("dwdm_to_waveguide", d.dwdm_to_waveguide);
  e.chain("waveguide_to_d1", c.waveguide_to_d1);

  if (c.noise.anchor_power_nw > 0 || !c.noise.powers_nw.empty()) {
    e.section("noise");
    e.list("powers_nw", c.noise.powers_nw);
    if (!c.noise.measured_hz.empty()) e.list("measured_hz", c.noise.measured_hz);
    e.num("anchor_power_nw", c.noise.anchor_power_nw);
    e.num("anchor_rate_hz", c.noise.anchor_rate_hz);
    e.num("shg_relative_efficiency", c.noise.shg_relative_efficiency);
    e.num("shg_wavelength_nm", c.noise.shg_wavelength_nm);
  }

  if (c.measurement.rate_per_hour) {
    e.section("measurement");
    e.num("rate_per_hour", *c.measurement.rate_per_hour);
    e.num("rate_error_per_hour", c.measurement.rate_error_per_hour);
  }

  const auto& m = c.simulation;
  e.section("simulation");
  e.num("duration_s", m.duration_s);
  e.num("seed", static_cast<double>(m.seed));
  e.num("bin_width_ns", m.bin_width_ns);
  e.num("delay_ps", m.delay_ps);
  e.opt("efficiency_override", m.efficiency_override);
  e.num("scan_point_duration_s", m.scan_point_duration_s);
  e.num("g2_arm_efficiency", m.g2_arm_efficiency);
  return e.str();
}

std::string config_hash(const ExperimentConfig& config) { return fnv1a_hex(canonical_config(config)); }

std::string config_reference() {
  return R"(Configuration keys (units are part of the key name; '?' = optional):
  [clock]         rate_mhz, pulse_duration_ps
  [sellmeier]     model? = "jundt1997" | "file" | "inline", temperature_c? (default 25)
                  file (model = "file": path to a [sellmeier] coefficient file)
                  name?, a1..a6, b1..b4, t_ref_c?, t_offset_c?, window_min_um, window_max_um,
                  temperature_min_c, temperature_max_c (model = "inline")
  [waveguide]     length_cm, grating_order? (1), shg_efficiency_pct_per_w_cm2,
                  peak_wavelength_nm, calibration_temperature_c? (25),
                  operating_point? = "tuned" | "calibration", coupling (fraction),
                  bandwidth_ghz_cm, time_bandwidth_product
  [spdc]          signal_wavelength_nm, signal_bandwidth_nm, signal_shape? = "gaussian" | "sech2",
                  pulse_duration_ps, herald_wavelength_nm, pair_probability? (pairs/pulse),
                  pair_statistics? = "poisson" | "thermal" | "single" | "coherent",
                  herald_detection_efficiency?, heralded_g2?
  [dfg]           wavelength_nm, bandwidth_nm, shape?, pulse_duration_ps,
                  mean_photons? (per pulse in the waveguide), power_nw? (at the DWDM output),
                  fiber_coupling, upconversion_detection_efficiency?, scan_mean_photons?
  [detectors.d1]  [detectors.d2]
                  mode = "free_running" | "gated", efficiency, jitter_ps (FWHM)
                  free_running: dark_rate_hz, clock_window_ns? (0 = whole period)
                  gated: dark_probability_per_gate, gate_window_ns, gate_offset_ns? (0)
  [chains.NAME]   label = transmission in (0, 1], in order; NAME is one of
                  spdc_to_waveguide, herald_to_d2, dfg_to_waveguide, dwdm_to_waveguide,
                  waveguide_to_d1
  [noise]?        powers_nw? [list], measured_hz? [list], anchor_power_nw, anchor_rate_hz,
                  shg_relative_efficiency?, shg_wavelength_nm?
  [measurement]?  rate_per_hour?, rate_error_per_hour?
  [simulation]?   duration_s? (3600), seed? (1), bin_width_ns? (0.32), delay_ps? (0),
                  efficiency_override?, scan_point_duration_s? (600),
                  g2_arm_efficiency? (1), threads? (0 = all cores; no effect on results)
)";
}

}  // namespace spsfg
