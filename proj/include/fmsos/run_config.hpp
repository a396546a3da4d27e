#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fmsos/data_io.hpp"
#include "fmsos/rjmcmc.hpp"

namespace fmsos {

enum class TruthModel { kTransport, kRotation };
enum class InitMethod { kPrior, kClustered };

/// Everything a CLI run needs. Loaded from flat `key = value` text; '#' starts a comment.
struct RunConfig {
  SamplerConfig sampler;

  // Paths. Empty means "not given".
  std::string data;
  std::string test;
  std::string truth;
  std::string trace;
  std::string out = ".";
  PairsFormat data_format = PairsFormat::kUnitVectors;

  std::size_t chains = 1;
  InitMethod init = InitMethod::kClustered;
  std::size_t init_candidates = 20;     // prior draws scored when init = prior
  std::size_t probe_points = 50000;    // uniform points for map distances
  std::size_t distance_records = 200;  // trace records used for posterior distances
  double test_fraction = 0.2;          // used when no --test file is given

  // Simulation truth.
  std::size_t k = 5;
  double kappa = 10.0;
  std::size_t n = 100;
  TruthModel truth_model = TruthModel::kTransport;

  // sim-study grid.
  std::vector<std::size_t> grid_k{5};
  std::vector<double> grid_kappa{10.0, 100.0};
  std::vector<std::size_t> grid_n{100, 500, 1000};

  std::uint64_t seed() const { return sampler.seed; }
  void validate() const;
};

/// Known keys, in the order they are echoed.
const std::vector<std::string>& run_config_keys();

/// Sets one key; throws ConfigError for unknown keys or unparsable values.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);
std::string get_config_value(const RunConfig& config, const std::string& key);

/// Parses config text and validates the result. ConfigError messages carry the line number.
RunConfig parse_run_config(const std::string& text, RunConfig base = {});
RunConfig load_run_config(const std::string& path, RunConfig base = {});

/// Every key with its resolved value, for output prologues.
Prologue resolved_config(const RunConfig& config);

} // namespace fmsos
