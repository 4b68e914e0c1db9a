#pragma once

// Run configuration: a flat JSON object. Unknown keys are rejected, every
// field is validated on load, and frequencies given in MHz or GHz are
// converted to the internal angular units (rad/ns).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluxsr/experiments.hpp"

namespace fluxsr::config {

struct RunConfig {
  nlohmann::json effective;  // every key with defaults filled, in file units
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::filesystem::path out_dir = "out";
  std::string frequency_unit = "MHz";

  // spectrum
  circuit::JunctionSet junction;
  std::vector<double> flux_values{0.5};
  int n_levels = 4;

  // ensemble / optimize-flux
  experiments::BroadeningConfig broadening;

  // superradiance; spin fields that were not given are listed in `missing`
  experiments::SweepConfig sweep;
  experiments::EliminationConfig elimination;
  std::vector<std::string> missing;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::filesystem::path> out_dir;
};

// Parses and validates. ConfigError on malformed JSON (with line and column),
// unknown keys, wrong types or values outside their domain.
RunConfig parse_config(const std::string& text, const Overrides& overrides = {});
RunConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});

// Throws ConfigError naming the first field a superradiance command needs
// but the configuration does not provide.
void require_superradiance(const RunConfig& cfg, bool needs_delta_omega);

// FNV-1a 64 of the canonical (sorted-key) dump of `effective`, as 16 hex digits.
std::string config_hash(const nlohmann::json& effective);

// Keys accepted at the top level of a config file.
const std::vector<std::string>& known_keys();

}  // namespace fluxsr::config
