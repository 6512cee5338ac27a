#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace driverid::cli {

/// Files staged in memory and written together, so a failed command leaves
/// no partial outputs behind.
class StagedOutput {
 public:
  explicit StagedOutput(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, std::string content) { files_[name] = std::move(content); }
  const std::filesystem::path& dir() const { return dir_; }

  /// Creates the directory, writes every file to a temporary name and renames
  /// it into place.
  void commit() const;

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::string> files_;
};

}  // namespace driverid::cli
