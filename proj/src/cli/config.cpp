#include "fwm/cli/config.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <charconv>
#include <cmath>

#include "fwm/error.hpp"
#include "fwm/io.hpp"
#include "fwm/spectral.hpp"

namespace fwm::cli {

using nlohmann::json;

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema{
      {"profile.source", "fixture", "fixture | coefficients | d-samples | json"},
      {"profile.path", "", "D-sample CSV or profile JSON, for the d-samples and json sources"},
      {"profile.reference_wavelength_nm", 771.0, "expansion centre for coefficients and fits"},
      {"profile.coefficients", json::array(), "beta_0..beta_m in s^m/m, for the coefficients source"},
      {"profile.fit_degree", 3, "degree of the beta2 polynomial fitted to D samples"},
      {"profile.beta1", 1.47 / kSpeedOfLight, "1/v_g at the reference wavelength for fitted profiles, s/m"},
      {"profile.min_wavelength_nm", 450.0, "profile domain, for the coefficients source"},
      {"profile.max_wavelength_nm", 2000.0, "profile domain, for the coefficients source"},
      {"profile.index_offset", 0.0, "constant index added to the profile (birefringent axis)"},

      {"pump.center_nm", 771.0, "pump centre wavelength"},
      {"pump.fwhm_nm", 3.0, "pump intensity FWHM"},
      {"pump.gamma", kDefaultGamma, "nonlinear coefficient, 1/(W m)"},
      {"pump.peak_power_w", 0.0, "peak pump power; 0 with average_power_w > 0 derives it"},
      {"pump.average_power_w", 0.0, "average pump power"},
      {"pump.repetition_rate_hz", 1e6, "pump repetition rate"},
      {"pump.fiber_length_m", 0.65, "fiber length"},
      {"pump.range_min_nm", 750.0, "contour pump scan start"},
      {"pump.range_max_nm", 790.0, "contour pump scan end"},
      {"pump.steps", 81, "contour pump scan points"},

      {"grid.signal_min_nm", 507.0, ""},
      {"grid.signal_max_nm", 521.0, ""},
      {"grid.idler_min_nm", 1470.0, ""},
      {"grid.idler_max_nm", 1630.0, ""},
      {"grid.signal_points", 512, ""},
      {"grid.idler_points", 512, ""},
      {"grid.measured_jsi", "", "long-form JSI CSV to decompose instead of the model"},

      {"detectors.signal_resolution_nm", 0.7, "signal spectrometer resolution (FWHM)"},
      {"detectors.idler_resolution_nm", 24.0, "idler spectrometer resolution (FWHM)"},
      {"detectors.signal_efficiency", 0.094, "signal arm efficiency ahead of the TMD"},
      {"detectors.signal_dark_click_prob", 0.0, "per TMD bin and gate"},
      {"detectors.idler_efficiency", 0.055, "idler arm detection efficiency"},
      {"detectors.idler_dark_click_prob", 0.0, "per gate"},
      {"detectors.signal_rate_hz", 16500.0, "measured singles, signal (Si) arm"},
      {"detectors.idler_rate_hz", 6000.0, "measured singles, idler (InGaAs) arm"},
      {"detectors.coincidence_rate_hz", 1300.0, "measured raw coincidences"},
      {"detectors.idler_detector_efficiency", 0.25, "InGaAs detector efficiency for heralding"},

      {"tmd.bins", 8, "time bins"},
      {"tmd.bin_probabilities", json::array(), "routing probabilities; empty is uniform"},
      {"tmd.bin_efficiency", 1.0, "transmission of the TMD loops"},

      {"run.schmidt_source", "sqrt_of_intensity", "amplitude | sqrt_of_intensity, for measured-style maps"},
      {"run.modes_kept", 16, "Schmidt modes stored"},
      {"run.schmidt_lambdas", json::array(), "source Schmidt coefficients; empty derives them from the model"},
      {"run.counting_grid_points", 256, "grid points per axis when deriving the Schmidt coefficients"},
      {"run.gains", json::array(), "r0 values for the conditional table; empty uses the calibrated gain"},
      {"run.two_click_rate_hz", 2200.0, "calibration target for r0"},
      {"run.max_conditioning_clicks", 3, "conditional table rows m = 1..this"},
      {"run.n_max", 30, "pair-number truncation"},
      {"run.shots", 1000000, "Monte Carlo shots"},
      {"run.seed", 1, "Monte Carlo seed"},
      {"run.threads", 0, "worker threads, 0 = auto"},
  };
  return schema;
}

std::string flag_name(const std::string& key) {
  std::string out = key;
  std::replace(out.begin(), out.end(), '.', '-');
  std::replace(out.begin(), out.end(), '_', '-');
  return out;
}

namespace {

const ConfigKey& schema_entry(const std::string& key) {
  for (const auto& k : config_schema()) {
    if (k.name == key) return k;
  }
  throw ConfigError(fmt::format("unknown config key '{}'", key));
}

bool same_kind(const json& want, const json& got) {
  if (want.is_number_integer()) return got.is_number_integer() || (got.is_number() && std::floor(got.get<double>()) == got.get<double>());
  if (want.is_number()) return got.is_number();
  if (want.is_string()) return got.is_string();
  if (want.is_array()) return got.is_array() && std::all_of(got.begin(), got.end(), [](const json& v) { return v.is_number(); });
  return false;
}

double parse_number(const std::string& key, std::string text) {
  text.erase(0, text.find_first_not_of(" \t"));
  text.erase(text.find_last_not_of(" \t") + 1);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size() || text.empty()) {
    throw ConfigError(fmt::format("{}: '{}' is not a number", key, text));
  }
  return v;
}

}  // namespace

RunConfig::RunConfig() : values_(json::object()) {
  for (const auto& k : config_schema()) values_[k.name] = k.default_value;
}

RunConfig RunConfig::from_json_text(const std::string& text, const std::string& source_name) {
  json parsed;
  try {
    parsed = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", source_name, e.what()));
  }
  if (!parsed.is_object()) throw ConfigError(source_name + ": config must be a flat JSON object");
  RunConfig cfg;
  for (const auto& [key, value] : parsed.items()) {
    try {
      cfg.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}: {}", source_name, e.what()));
    }
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  auto cfg = from_json_text(io::read_file(path), path.string());
  cfg.base_dir = std::filesystem::absolute(path).parent_path();
  return cfg;
}

void RunConfig::set(const std::string& key, const json& value) {
  const auto& entry = schema_entry(key);
  if (!same_kind(entry.default_value, value)) {
    throw ConfigError(fmt::format("{}: expected {}, got {}", key, entry.default_value.type_name(), value.dump()));
  }
  if (entry.default_value.is_number_integer()) {
    values_[key] = static_cast<std::int64_t>(value.get<double>());
  } else if (entry.default_value.is_number()) {
    values_[key] = value.get<double>();
  } else {
    values_[key] = value;
  }
}

void RunConfig::set_from_string(const std::string& key, const std::string& text) {
  const auto& entry = schema_entry(key);
  if (entry.default_value.is_string()) {
    set(key, text);
  } else if (entry.default_value.is_array()) {
    json arr = json::array();
    std::size_t start = 0;
    while (start <= text.size() && !text.empty()) {
      const auto comma = text.find(',', start);
      arr.push_back(parse_number(key, text.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    set(key, arr);
  } else {
    set(key, parse_number(key, text));
  }
}

const json& RunConfig::get(const std::string& key) const {
  schema_entry(key);
  return values_.at(key);
}

double RunConfig::number(const std::string& key) const { return get(key).get<double>(); }
std::int64_t RunConfig::integer(const std::string& key) const { return get(key).get<std::int64_t>(); }
std::string RunConfig::text(const std::string& key) const { return get(key).get<std::string>(); }
std::vector<double> RunConfig::numbers(const std::string& key) const { return get(key).get<std::vector<double>>(); }

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& k : config_schema()) out[k.name] = values_.at(k.name);
  return out;
}

std::filesystem::path resolve_path(const RunConfig& cfg, const std::string& key) {
  const std::filesystem::path p = cfg.text(key);
  if (p.empty() || p.is_absolute() || cfg.base_dir.empty()) return p;
  return cfg.base_dir / p;
}

namespace {

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(fmt::format("{}: {}", key, what));
}

double positive(const RunConfig& cfg, const std::string& key) {
  const double v = cfg.number(key);
  require(v > 0.0 && std::isfinite(v), key, fmt::format("must be positive, got {}", v));
  return v;
}

double non_negative(const RunConfig& cfg, const std::string& key) {
  const double v = cfg.number(key);
  require(v >= 0.0 && std::isfinite(v), key, fmt::format("must be non-negative, got {}", v));
  return v;
}

double probability(const RunConfig& cfg, const std::string& key) {
  const double v = cfg.number(key);
  require(v >= 0.0 && v <= 1.0, key, fmt::format("must lie in [0, 1], got {}", v));
  return v;
}

std::size_t count(const RunConfig& cfg, const std::string& key, std::int64_t min) {
  const auto v = cfg.integer(key);
  require(v >= min, key, fmt::format("must be at least {}, got {}", min, v));
  return static_cast<std::size_t>(v);
}

}  // namespace

DispersionProfile resolve_profile(const RunConfig& cfg) {
  const std::string source = cfg.text("profile.source");
  const double offset = cfg.number("profile.index_offset");
  require(std::abs(offset) < 1.0, "profile.index_offset", "must be a small index offset");
  if (source == "fixture") return canonical_profile().with_index_offset(offset);

  const double ref_nm = positive(cfg, "profile.reference_wavelength_nm");
  if (source == "coefficients") {
    const auto beta = cfg.numbers("profile.coefficients");
    require(beta.size() >= 4, "profile.coefficients", "needs at least beta_0..beta_3");
    const double lo = positive(cfg, "profile.min_wavelength_nm");
    const double hi = positive(cfg, "profile.max_wavelength_nm");
    require(hi > lo, "profile.max_wavelength_nm", "must exceed profile.min_wavelength_nm");
    require(ref_nm >= lo && ref_nm <= hi, "profile.reference_wavelength_nm", "must lie inside the profile domain");
    return DispersionProfile(wavelength_to_angular_frequency(ref_nm), beta, lo, hi, offset);
  }

  const auto path = resolve_path(cfg, "profile.path");
  require(!path.empty(), "profile.path", fmt::format("required for profile.source '{}'", source));
  if (source == "json") return read_profile_json(path).with_index_offset(offset);
  if (source == "d-samples") {
    const auto samples = read_d_samples_csv(path);
    FitOptions opts;
    opts.beta1_ref = positive(cfg, "profile.beta1");
    opts.index_offset = offset;
    const auto degree = static_cast<int>(count(cfg, "profile.fit_degree", 1));
    try {
      return fit_from_d_samples(samples, degree, wavelength_to_angular_frequency(ref_nm), opts).profile;
    } catch (const FitError& e) {
      throw ConfigError(fmt::format("profile.path: {}: {}", path.string(), e.what()));
    }
  }
  throw ConfigError(fmt::format("profile.source: unknown source '{}'", source));
}

FwmConfig resolve_fwm(const RunConfig& cfg) {
  FwmConfig out;
  out.gamma = non_negative(cfg, "pump.gamma");
  out.fiber_length = positive(cfg, "pump.fiber_length_m");
  out.pump_center_nm = positive(cfg, "pump.center_nm");
  out.pump_fwhm_nm = positive(cfg, "pump.fwhm_nm");
  out.peak_pump_power = non_negative(cfg, "pump.peak_power_w");
  const double average = non_negative(cfg, "pump.average_power_w");
  if (out.peak_pump_power == 0.0 && average > 0.0) {
    const double duration = transform_limited_duration(out.pump_fwhm_nm, out.pump_center_nm);
    out.peak_pump_power = peak_power_from_average(average, positive(cfg, "pump.repetition_rate_hz"), duration);
  }
  return out;
}

PumpEnvelope resolve_envelope(const RunConfig& cfg) {
  PumpEnvelope e;
  e.center_nm = positive(cfg, "pump.center_nm");
  e.fwhm_nm = positive(cfg, "pump.fwhm_nm");
  return e;
}

Grid2D resolve_grid(const RunConfig& cfg) {
  const double s0 = positive(cfg, "grid.signal_min_nm"), s1 = positive(cfg, "grid.signal_max_nm");
  const double i0 = positive(cfg, "grid.idler_min_nm"), i1 = positive(cfg, "grid.idler_max_nm");
  require(s1 > s0, "grid.signal_max_nm", "must exceed grid.signal_min_nm");
  require(i1 > i0, "grid.idler_max_nm", "must exceed grid.idler_min_nm");
  const auto ns = count(cfg, "grid.signal_points", 2);
  const auto ni = count(cfg, "grid.idler_points", 2);
  return Grid2D{SpectralAxis(s0, s1, ns), SpectralAxis(i0, i1, ni)};
}

PumpScan resolve_pump_scan(const RunConfig& cfg) {
  PumpScan scan{positive(cfg, "pump.range_min_nm"), positive(cfg, "pump.range_max_nm"), count(cfg, "pump.steps", 1)};
  require(scan.max_nm >= scan.min_nm, "pump.range_max_nm", "pump range is empty");
  require(scan.steps == 1 || scan.max_nm > scan.min_nm, "pump.range_max_nm", "pump range is empty");
  return scan;
}

Instrument resolve_instrument(const RunConfig& cfg) {
  return {non_negative(cfg, "detectors.signal_resolution_nm"), non_negative(cfg, "detectors.idler_resolution_nm")};
}

DetectionChains resolve_chains(const RunConfig& cfg) {
  DetectionChains chains;
  chains.signal_tmd.n_bins = count(cfg, "tmd.bins", 1);
  require(chains.signal_tmd.n_bins <= kMaxTmdBins, "tmd.bins", fmt::format("at most {} bins", kMaxTmdBins));
  chains.signal_tmd.bin_probabilities = cfg.numbers("tmd.bin_probabilities");
  chains.signal_tmd.bin_efficiency = probability(cfg, "tmd.bin_efficiency");
  chains.signal_detector = {probability(cfg, "detectors.signal_efficiency"),
                            probability(cfg, "detectors.signal_dark_click_prob")};
  chains.idler_detector = {probability(cfg, "detectors.idler_efficiency"),
                           probability(cfg, "detectors.idler_dark_click_prob")};
  try {
    chains.signal_tmd.validate();
  } catch (const DomainError& e) {
    throw ConfigError(fmt::format("tmd.bin_probabilities: {}", e.what()));
  }
  return chains;
}

RateInputs resolve_rates(const RunConfig& cfg) {
  RateInputs r;
  r.signal_rate = non_negative(cfg, "detectors.signal_rate_hz");
  r.idler_rate = non_negative(cfg, "detectors.idler_rate_hz");
  r.raw_coincidence_rate = non_negative(cfg, "detectors.coincidence_rate_hz");
  r.repetition_rate = positive(cfg, "pump.repetition_rate_hz");
  r.idler_detector_efficiency = positive(cfg, "detectors.idler_detector_efficiency");
  require(r.idler_detector_efficiency <= 1.0, "detectors.idler_detector_efficiency", "must not exceed 1");
  return r;
}

SchmidtSource resolve_schmidt_source(const RunConfig& cfg) {
  const auto s = cfg.text("run.schmidt_source");
  if (s == "amplitude") return SchmidtSource::amplitude;
  if (s == "sqrt_of_intensity") return SchmidtSource::sqrt_of_intensity;
  throw ConfigError(fmt::format("run.schmidt_source: unknown source '{}'", s));
}

void validate(const RunConfig& cfg) {
  const auto profile = resolve_profile(cfg);
  resolve_fwm(cfg);
  resolve_envelope(cfg);
  resolve_grid(cfg);
  resolve_pump_scan(cfg);
  resolve_instrument(cfg);
  resolve_chains(cfg);
  resolve_rates(cfg);
  resolve_schmidt_source(cfg);
  count(cfg, "run.modes_kept", 1);
  count(cfg, "run.counting_grid_points", 2);
  count(cfg, "run.max_conditioning_clicks", 1);
  count(cfg, "run.n_max", 1);
  count(cfg, "run.shots", 1);
  count(cfg, "run.seed", 0);
  count(cfg, "run.threads", 0);
  positive(cfg, "run.two_click_rate_hz");
  for (double g : cfg.numbers("run.gains")) require(g >= 0.0, "run.gains", "gains must be non-negative");
  const auto lambdas = cfg.numbers("run.schmidt_lambdas");
  if (!lambdas.empty()) {
    double sum = 0.0;
    for (double l : lambdas) {
      require(l >= 0.0, "run.schmidt_lambdas", "coefficients must be non-negative");
      sum += l;
    }
    require(std::abs(sum - 1.0) <= 1e-6, "run.schmidt_lambdas", fmt::format("coefficients sum to {}, not 1", sum));
  }
  const auto measured = resolve_path(cfg, "grid.measured_jsi");
  require(measured.empty() || std::filesystem::exists(measured), "grid.measured_jsi",
          fmt::format("file not found: {}", measured.string()));
  (void)profile;
}

}  // namespace fwm::cli
