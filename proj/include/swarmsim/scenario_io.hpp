#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "swarmsim/engine.hpp"

namespace swarmsim {

// A scenario document plus the run-level settings that live beside it.
struct ScenarioFile {
  Scenario scenario;
  int replications = 1;
  std::string output_dir;  // empty: caller decides

  bool operator==(const ScenarioFile&) const = default;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// JSON scenario format; unknown keys are rejected. Validation failures are
// reported as ConfigError carrying the dotted field path.
ScenarioFile parse_scenario(std::string_view json_text);
std::string serialize_scenario(const ScenarioFile& file);
ScenarioFile load_scenario(const std::filesystem::path& path);

// Shortest round-trip decimal form, independent of the C locale.
std::string format_double(double v);

// Writes `contents` to `path` via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace swarmsim
