#pragma once

// Batch driver: one experiment per acceptance property, declarative config,
// CSV + manifest + plot-script outputs.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mlab/io.hpp"

namespace mlab {

inline constexpr const char* kLibraryVersion = "0.1.0";
inline constexpr int kManifestVersion = 1;

struct ExperimentConfig {
  std::string experiment;
  std::optional<std::size_t> N;  // moment grid cells; per-experiment default when empty
  double S = kDefaultWindow;
  std::size_t t_nodes = 65;
  std::optional<std::vector<int>> k_list;
  std::map<std::string, double> tolerances;  // overrides of the defaults
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::size_t corpus_size = 22;

  /// Throws ConfigError naming every offending field.
  static ExperimentConfig from_json(const json& j);
  json to_json() const;
  void validate() const;
};

const std::vector<std::string>& experiment_names();
std::map<std::string, double> default_tolerances(const std::string& experiment);
/// CSV files and their columns, per experiment, for --help.
std::string csv_documentation();

struct Check {
  std::string name;
  double measured = 0.0;
  std::string relation;  // ">=" or "<="
  double bound = 0.0;
  bool pass = false;
};

struct RunResult {
  std::vector<Check> checks;
  std::vector<std::string> artifacts;
  json manifest;
  bool ok() const;
  const Check* first_failure() const;
};

/// Runs the experiment and writes its artifacts under config.output_dir.
/// `write` = false computes the checks only.
RunResult run(const ExperimentConfig& config, bool write = true);

}  // namespace mlab
