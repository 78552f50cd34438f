#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fwm/counting.hpp"
#include "fwm/dispersion.hpp"
#include "fwm/jsa.hpp"
#include "fwm/phasematch.hpp"
#include "fwm/schmidt.hpp"

namespace fwm::cli {

struct ConfigKey {
  std::string name;  // dotted, e.g. "pump.center_nm"
  nlohmann::json default_value;
  std::string help;
};

/// Every recognised key with its default, in output order.
const std::vector<ConfigKey>& config_schema();

/// "pump.center_nm" -> "pump-center-nm"
std::string flag_name(const std::string& key);

/// Flat dotted-key configuration. Unknown keys and type mismatches are
/// ConfigErrors naming the key.
class RunConfig {
 public:
  RunConfig();  // all defaults

  static RunConfig from_json_text(const std::string& text, const std::string& source_name = "<memory>");
  static RunConfig from_file(const std::filesystem::path& path);

  /// Sets a key from its JSON value, checking the schema type.
  void set(const std::string& key, const nlohmann::json& value);
  /// Sets a key from command-line text; arrays are comma-separated.
  void set_from_string(const std::string& key, const std::string& text);

  const nlohmann::json& get(const std::string& key) const;
  double number(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  std::string text(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;

  /// Fully resolved flat object, keys in schema order.
  nlohmann::ordered_json to_json() const;

  /// Relative paths in the config resolve against this directory.
  std::filesystem::path base_dir;

 private:
  nlohmann::json values_;
};

// Typed views. Each checks its ranges and throws ConfigError naming the key.
DispersionProfile resolve_profile(const RunConfig& cfg);
FwmConfig resolve_fwm(const RunConfig& cfg);
PumpEnvelope resolve_envelope(const RunConfig& cfg);
Grid2D resolve_grid(const RunConfig& cfg);

struct PumpScan {
  double min_nm;
  double max_nm;
  std::size_t steps;
};
PumpScan resolve_pump_scan(const RunConfig& cfg);

struct Instrument {
  double signal_resolution_nm;
  double idler_resolution_nm;
};
Instrument resolve_instrument(const RunConfig& cfg);

DetectionChains resolve_chains(const RunConfig& cfg);
RateInputs resolve_rates(const RunConfig& cfg);
SchmidtSource resolve_schmidt_source(const RunConfig& cfg);

/// Checks every section so that errors surface before any computation.
void validate(const RunConfig& cfg);

/// Absolute form of a path-valued key ("" stays empty).
std::filesystem::path resolve_path(const RunConfig& cfg, const std::string& key);

}  // namespace fwm::cli
