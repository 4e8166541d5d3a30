#pragma once

#include <string>
#include <string_view>

#include "spsfg/experiment.hpp"

namespace spsfg {

/// A parsed configuration together with its canonical text and hash.
struct LoadedConfig {
  ExperimentConfig config;
  std::string canonical;
  std::string hash;    // FNV-1a of `canonical`
  std::string source;  // file path, or "builtin:reference"
};

/// Parse a configuration document. Unknown sections or keys and all missing
/// required keys are reported together in one ValidationError. `base_dir`
/// resolves a relative [sellmeier] file.
ExperimentConfig parse_experiment_config(std::string_view text, const std::string& base_dir = "");

LoadedConfig load_config_text(std::string_view text, std::string source, const std::string& base_dir = "");
LoadedConfig load_config_file(const std::string& path);

/// The shipped configuration with the published setup values.
LoadedConfig reference_config();
std::string_view reference_config_text();

/// Normalised document: fixed section and key order, shortest round-trip
/// numbers. Parsing it yields the same canonical text. The thread count is
/// left out because it never changes results.
std::string canonical_config(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);

/// Reference of every section, key and unit, for --help output.
std::string config_reference();

}  // namespace spsfg
