#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmchain/common.hpp"

namespace mmchain {

/// Schema errors, all collected before any computation starts.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitViolation = 2 };

/// Applies a dotted key=value override. The value is parsed as JSON when it
/// parses, otherwise kept as a string.
void apply_override(nlohmann::json& config, const std::string& assignment);

/// Checks every section and throws ConfigError listing all problems.
void validate_config(const nlohmann::json& config);

struct RunOptions {
  std::filesystem::path out_dir;
  std::vector<std::string> overrides;
  Execution exec;
  /// Progress and diagnostics; results only go to files.
  std::ostream* log = nullptr;
};

struct RunResult {
  int exit_code = kExitOk;
  std::filesystem::path manifest;
  nlohmann::json manifest_json;
};

/// Runs one scenario. Artifacts and manifest.json land in out_dir/<name>/.
RunResult run_scenario(const nlohmann::json& config, const RunOptions& options);

/// Runs a config file: either one scenario or {"suite": [relative paths]}.
/// A suite writes suite_manifest.json next to the scenario folders.
RunResult run_config_file(const std::filesystem::path& config_path, const RunOptions& options);

/// Reads a manifest, checks every artifact hash, writes <stem>_report.csv
/// beside it and returns the text summary. Nothing is recomputed.
std::string report(const std::filesystem::path& manifest_path);

/// Scenario files in the given directory with their analyses.
std::string list_scenarios(const std::filesystem::path& dir);

/// $MMCHAIN_OUT, else ./mmchain_out.
std::filesystem::path default_out_dir();
/// $MMCHAIN_SCENARIOS, else the scenarios folder of the source tree.
std::filesystem::path default_scenario_dir();

}  // namespace mmchain
