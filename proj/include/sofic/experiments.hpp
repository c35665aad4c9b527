#pragma once

// The experiment registry E1..E9: each runner reads a JSON config, computes
// its tables through the library modules and evaluates the pass thresholds
// declared in the config.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sofic/io.hpp"

namespace sofic {

struct Check {
  std::string name;
  bool passed = false;
  double value = 0;
  double threshold = 0;
  std::string detail;
};

struct ExperimentResult {
  std::string id;
  std::string checksum;  // of the effective config
  std::vector<std::pair<std::string, CsvTable>> tables;
  std::vector<Check> checks;
  Json metrics = Json::object();
  std::vector<std::pair<std::string, std::string>> plots;  // name, SVG text

  bool passed() const;
  /// Rendered CSV text of a table, checksum line included.
  std::string csv(const std::string& table) const;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;    // replaces the config's "seed"
  std::optional<std::uint64_t> budget;  // replaces the config's "budget"
  bool plot = false;
};

/// Version of configs/schema.json understood by validate_config.
inline constexpr int kSchemaVersion = 1;

const std::vector<std::string>& experiment_ids();

/// The config with command-line overrides applied; this is what gets
/// checksummed.
Json effective_config(const Json& config, const RunOptions& options);

/// Human-readable problems; empty when the config is valid.
std::vector<std::string> validate_config(const Json& config);

/// Throws ValidationError for invalid configs; BudgetExceeded and the other
/// library errors propagate.
ExperimentResult run_experiment(const Json& config, const RunOptions& options = {});

Json summary_json(const ExperimentResult& result);

/// Writes <dir>/<id>_<table>.csv, <dir>/<id>_summary.json and, when present,
/// <dir>/<id>_<plot>.svg. Returns the paths written.
std::vector<std::string> write_result(const ExperimentResult& result, const std::string& dir);

struct ReportLine {
  std::string id;
  std::string checksum;
  std::size_t checks = 0;
  std::size_t failed = 0;
  std::vector<std::string> failures;
};

/// Reads every *_summary.json in a results directory, sorted by name.
std::vector<ReportLine> read_report(const std::string& dir);

}  // namespace sofic
