#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dfock/experiments.hpp"

namespace dfock {

/// Run configuration; determinism is unconditional (no seeds anywhere).
using RunConfig = ExperimentConfig;

/// Flat `key = value` lines with optional [section] headers; '#' starts a
/// comment. Lists are "1, 2, 3" or "[1, 2, 3]". Unknown sections or keys,
/// duplicates and malformed values throw ConfigError naming origin:line and
/// the key. The result has experiment defaults resolved.
RunConfig parse_config_string(const std::string& text, const std::string& origin = "<config>",
                              const std::filesystem::path& base_dir = ".");
RunConfig parse_config_file(const std::filesystem::path& path);

/// Applies "key=value" or "section.key=value" assignments on top of the
/// given file text (used by command-line overrides).
RunConfig parse_config_with_overrides(const std::string& text, const std::vector<std::string>& assignments,
                                      const std::string& origin = "<config>",
                                      const std::filesystem::path& base_dir = ".");

/// Human-readable schema for --help.
std::string config_schema();

}  // namespace dfock
