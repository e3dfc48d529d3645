#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cocycle/config.hpp"

namespace cocycle {

const std::vector<std::string>& experiments();

struct RunOptions {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides the config's seed
  int threads = 0;
};

struct RunResult {
  int exit_code = 0;  // 0 ok, 2 config error, 3 numeric failure
  std::string summary;
  std::vector<std::string> files;
  json details;     // fit/summary JSON (also written next to the CSVs)
  json diagnostic;  // set on failure
};

struct ValidationReport {
  std::vector<std::string> violations;
  std::vector<std::string> warnings;
  bool ok() const { return violations.empty(); }
};

// Defaults merged with the config; throws ConfigError on unknown or missing keys.
json effective_config(const std::string& experiment, const json& config);

ValidationReport validate(const std::string& experiment, const json& config);

// Never throws: errors are mapped to exit codes and a diagnostic.
RunResult run(const std::string& experiment, const json& config, const RunOptions& opt = {});

}  // namespace cocycle
