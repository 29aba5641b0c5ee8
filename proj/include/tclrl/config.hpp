#pragma once

// INI configuration for experiments. Every tunable constant has a key with a
// default, so a file only needs the values it changes.

#include <cstdint>
#include <filesystem>
#include <string>

#include "tclrl/harness.hpp"

namespace tclrl {

inline constexpr const char* kCodeVersion = "0.3.0";

/// Parses INI text. Relative data paths are resolved against `base_dir`.
/// Unknown sections/keys and malformed values raise ParseError with the line.
ScenarioConfig parse_config(const std::string& text, const std::string& origin = "<config>",
                            const std::filesystem::path& base_dir = {});
ScenarioConfig load_config(const std::filesystem::path& path);

/// Canonical text: every key, fixed order, shortest round-trip number format.
std::string serialize_config(const ScenarioConfig& cfg);

/// FNV-1a over the canonical text with the approximator choice and seed list
/// left out, so runs that only differ in those can be aggregated together.
std::uint64_t config_hash(const ScenarioConfig& cfg);
std::string hash_hex(std::uint64_t h);

}  // namespace tclrl
