#pragma once

// Flat `key = value` configuration files with `#` comments and dotted keys.
// Every key has a default; files and --set overrides only change what
// they name. Unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tbtele/experiment.hpp"
#include "tbtele/relay.hpp"

namespace tbtele {

struct RelaySettings {
  LinkConfig link;
  std::vector<int> sections{1, 3};
  double max_km = 300.0;
  double step_km = 1.0;
  double qber_threshold = 0.11;
};

struct RunSettings {
  std::uint64_t seed = 1;
  int workers = 1;
  bool event_log = false;
};

struct ConfigFile {
  ExperimentConfig experiment;
  RelaySettings relay;
  RunSettings run;
};

// Domain checks on every section; DomainError or ConfigError.
void validate(const ConfigFile& cfg);

// Throws ParseError (with line number), UnknownKey or TypeMismatch, then
// validates the result.
ConfigFile parse_config(std::string_view text, std::string_view source = "<config>");
ConfigFile load_config(const std::filesystem::path& path);

void set_value(ConfigFile& cfg, std::string_view key, std::string_view value);
// `key=value`
void apply_override(ConfigFile& cfg, std::string_view assignment);

std::vector<std::string> config_keys();
std::string get_value(const ConfigFile& cfg, std::string_view key);

// All keys in sorted order, one `key = value` per line.
std::string canonical_dump(const ConfigFile& cfg);
std::uint64_t fnv1a64(std::string_view data);
std::uint64_t config_hash(const ConfigFile& cfg);

}  // namespace tbtele
