// Experiment orchestration: flat JSON configuration, deterministic execution over a
// degree list, ONB caching, and report files (report.json, rows.csv, hist.svg).
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "masslab/bergman.hpp"
#include "masslab/bundles.hpp"

namespace masslab {

inline constexpr const char* kToolVersion = "1.0.0";

/// Experiment kinds, in the spelling used by configs and CLI subcommands.
const std::vector<std::string>& experiment_kinds();

/// Collects every field error found while parsing a config.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

struct RunConfig {
  std::string kind;
  /// Explicit degree list (kp_law = "list").
  std::vector<int> k;
  /// Inclusive p range for the p, p^2 and 2^p laws.
  std::optional<std::pair<int, int>> p_range;
  std::string kp_law = "list";
  std::string eps_law = "zero";
  double c = 0.1;
  double a = 0.5;
  std::string profile = "tilt";
  std::string phi = "const1";
  std::size_t samples = 2000;
  std::uint64_t seed = 0;
  double b = 3.0;
  /// Equidistribution threshold parameter (exceedance measured at 2 * epsilon).
  double epsilon = 0.1;
  /// Overrides the kind's primary tolerance.
  std::optional<double> tolerance;
  bool svg = false;
  std::string out = "out";
  double diophantine_constant = 1.0;

  MetricSequenceSpec metric_spec() const;
  /// Indices p covered by the run, in order.
  std::vector<int> indices() const;
  /// Canonical flat JSON of every field except the output directory (defaults filled in).
  std::string to_json() const;
};

/// Parses a flat JSON object. Throws ConfigError listing unknown keys ("unknown key: <name>"),
/// missing required keys, type errors and invalid values.
RunConfig parse_config(const std::string& text);

struct ResultRow {
  int k = 0;
  double area = 0.0;
  std::size_t dimension = 0;
  std::string phi;
  std::string check;
  double estimate = 0.0;
  double target = 0.0;
  double abs_err = 0.0;
  bool pass = false;
  /// Extra named values echoed in report.json.
  std::vector<std::pair<std::string, double>> extras;
};

struct ExperimentReport {
  RunConfig config;
  std::string spec_hash;
  std::vector<ResultRow> rows;
  std::vector<std::string> warnings;
  /// Normalized samples for the histogram (clt only, last degree).
  std::vector<double> histogram_samples;
  /// Wall-clock seconds; written to timing.json only, so the other files stay reproducible.
  double wall_seconds = 0.0;
  bool all_pass() const;
};

/// Loads the basis from <cache_dir>/cache when the file matches, otherwise builds and stores it.
/// Passing an empty cache_dir disables caching.
KernelEvaluator cached_evaluator(const MetricSequenceSpec& spec, int p, const std::filesystem::path& cache_dir);

ExperimentReport run(const RunConfig& config);

std::string report_json(const ExperimentReport& report);
std::string rows_csv(const ExperimentReport& report);
std::string histogram_svg(const std::vector<double>& samples);

/// Writes report.json, rows.csv, timing.json and (when enabled) hist.svg.
/// Throws std::runtime_error naming the path when the directory is not writable.
void write_report(const ExperimentReport& report, const std::filesystem::path& directory);

}  // namespace masslab
