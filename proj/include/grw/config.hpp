#pragma once

#include "grw/scenario.hpp"

#include <filesystem>
#include <istream>
#include <string>

namespace grw {

/// Parses flat `key = value` text into a ScenarioConfig. `#` and `;` start
/// comments. Unknown or repeated keys and sections are errors; every error
/// is a ConfigError carrying the offending line number.
ScenarioConfig parse_scenario_config(std::istream& in);

ScenarioConfig load_scenario_config(const std::filesystem::path& path);

/// Inverse of parse_scenario_config for every explicitly settable key.
std::string format_scenario_config(const ScenarioConfig& config);

}  // namespace grw
