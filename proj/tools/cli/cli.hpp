#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "driverid/driverid.hpp"

namespace driverid::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct ManifestEntry {
  std::filesystem::path path;  ///< resolved against the manifest directory
  std::string driver_id;
  double rate_hz = kDefaultRateHz;
};

struct Manifest {
  std::string name;
  std::vector<ManifestEntry> entries;
};

/// CSV with header `path,driver_id,rate_hz`. Relative paths are resolved
/// against `base_dir`. Throws ConfigError on a malformed manifest.
Manifest parse_manifest(std::istream& source, const std::filesystem::path& base_dir,
                        std::string name);
Manifest read_manifest(const std::filesystem::path& path);
/// Writes entries with paths relative to `base_dir` when possible.
void write_manifest(std::ostream& sink, const Manifest& manifest,
                    const std::filesystem::path& base_dir);

struct RunConfig {
  PipelineConfig pipeline;
  std::optional<GridSpec> grid;
  std::optional<std::filesystem::path> out_dir;
};

/// INI-style run configuration; see docs/config.md. Unknown sections or keys
/// are rejected with ConfigError.
RunConfig parse_run_config(std::istream& source);
RunConfig read_run_config(const std::filesystem::path& path);
/// Parses a grid feature list: "all", "table", or subsets separated by ';'.
std::vector<FeatureConfig> parse_feature_list(const std::string& text);
std::vector<ModelSpec> parse_model_list(const std::string& text, const ModelSpec& base);

/// Entry point shared by the executable and the tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Requests that a running grid sweep stop after the current cell.
void request_interrupt();

}  // namespace driverid::cli
