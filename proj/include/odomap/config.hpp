#pragma once

#include "odomap/pipeline.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace odomap {

/// Dotted parameter names (section.key) accepted in config files and as CLI
/// overrides, one per tunable field of PipelineConfig.
std::vector<std::string> config_keys();

/// Sets one parameter from its string form; throws std::invalid_argument
/// for unknown keys or unparsable values.
void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value);

/// Current value of one parameter as a string.
std::string get_config_value(const PipelineConfig& cfg, const std::string& key);

/// Loads a flat TOML file ([section] headers, key = value lines, '#'
/// comments) on top of the given base configuration.
PipelineConfig load_config_toml(const std::filesystem::path& file, PipelineConfig base = {});

/// Writes every parameter in the same flat TOML layout.
void save_config_toml(const PipelineConfig& cfg, const std::filesystem::path& file);

}  // namespace odomap
