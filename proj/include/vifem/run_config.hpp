// SPDX-License-Identifier: Apache-2.0
//
// JSON run configuration for the command-line driver.

#pragma once

#include <string>

#include "vifem/experiments.hpp"

namespace vifem {

struct RunConfig {
  std::string case_name;
  CaseSettings settings;
  std::string output_dir = ".";

  bool operator==(const RunConfig& other) const;
};

/// Malformed configuration: carries the offending field and its line.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, int line, const std::string& message);
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

/// Parses a config document. Unknown keys, wrong types, out-of-range values
/// and unknown case names raise ConfigError.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

/// Serializes a config so that parse_run_config returns an equal value.
std::string dump_run_config(const RunConfig& cfg);

/// Library version string.
const char* library_version();

}  // namespace vifem
