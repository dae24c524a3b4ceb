#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "corrsim/errors.hpp"
#include "corrsim/io.hpp"

namespace corrsim {

enum class ExperimentKind { equality, gapip, simulate, scaling, measures, oracle, agreement };
const char* to_string(ExperimentKind kind);

/// Schema failure; diagnostics() lists every offending field.
class ConfigError : public DomainError {
 public:
  explicit ConfigError(std::vector<std::string> diagnostics);
  const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::measures;
  json echo;  // the validated config with defaults filled in; replays identically
  std::vector<std::string> source_specs;  // names or inline JSON dumps, in config order
  std::vector<BipartiteSource> sources;
  std::size_t trials = 0;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> json_path;
  std::optional<std::string> csv_path;

  double number(const char* key) const { return echo.at(key).get<double>(); }
  unsigned uint(const char* key) const { return echo.at(key).get<unsigned>(); }
};

/// Parses and schema-checks a JSON config. Unknown keys, type errors, bad
/// sources and missing seeds are collected into one ConfigError.
ExperimentConfig validate_config(std::string_view raw);
ExperimentConfig validate_config_json(const json& j);

struct RunReport {
  json config;
  json results = json::array();  // one entry per item, in config order
  std::vector<std::string> failed_checks;
  double wall_clock_s = 0.0;
  std::string version;
  std::string rng;
  std::string csv;  // empty when the experiment has no table

  bool ok() const noexcept { return failed_checks.empty(); }
  int exit_code() const noexcept { return ok() ? 0 : 1; }
};

json to_json(const RunReport& r);

/// Dispatches to the owning module. Capacity and domain errors are rethrown with
/// the experiment name prepended. Files named in the config are written.
RunReport run_experiment(const ExperimentConfig& cfg);

/// Name of the library version compiled in.
const char* version();

}  // namespace corrsim
