#pragma once

#include <exception>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fmsos/metrics.hpp"
#include "fmsos/run_config.hpp"

namespace fmsos {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

int exit_code_for(const std::exception& e);

// Seed streams derived from the run seed.
inline constexpr std::uint64_t kStreamCloud = 1;
inline constexpr std::uint64_t kStreamTruth = 2;
inline constexpr std::uint64_t kStreamData = 3;
inline constexpr std::uint64_t kStreamProbes = 4;
inline constexpr std::uint64_t kStreamSplit = 5;
inline constexpr std::uint64_t kStreamChain = 100;

ReferenceCloud make_cloud(const RunConfig& config);

/// Draws a truth with exactly `config.k` atoms (or a pure rotation) and kappa = `config.kappa`.
ModelState simulate_truth(const RunConfig& config, const ReferenceCloud& cloud, Rng& rng);

struct FitSummary {
  std::size_t n = 0;
  std::size_t records = 0;
  MoveStats stats;
  double mean_k = 0.0;
  double mean_kappa = 0.0;
  std::vector<std::size_t> k_histogram; // index k, pooled over chains
  std::optional<PosteriorDistance> distance;
};

struct FitResult {
  std::vector<ChainTrace> chains;
  FitSummary summary;
};

/// Runs `config.chains` chains on `data`; measures posterior distance to `truth` when given.
FitResult fit_model(const RunConfig& config, const Dataset& data, const std::optional<ModelState>& truth);

/// Evenly spaced subset of at most `max_records` records.
ChainTrace thinned(const ChainTrace& trace, std::size_t max_records);
/// All chains' records in one trace (chain order preserved).
ChainTrace pooled(const std::vector<ChainTrace>& chains);

/// Random split into (train, test) by `config.test_fraction`, seeded from the run seed.
std::pair<Dataset, Dataset> train_test_split(const RunConfig& config, const Dataset& data);

struct SimCell {
  std::size_t index = 0;
  std::size_t k = 0;
  double kappa = 0.0;
  std::size_t n = 0;
  double dtilde_mean = 0.0;
  double dtilde_sd = 0.0;
  double mean_k = 0.0;
  double runtime_s = 0.0;
  std::string status = "ok";
};

/// Every (k, kappa, n) cell of the grid, in row-major order over k, kappa, n.
/// One truth per (k, kappa); datasets for different n are nested prefixes of one draw.
/// Cells run in parallel; a failing cell records its error and the rest continue.
std::vector<SimCell> run_sim_study(const RunConfig& config);

// Subcommands. Each writes its outputs under `config.out` and a summary to `log`.
void cmd_simulate(const RunConfig& config, std::ostream& log);
void cmd_fit(const RunConfig& config, std::ostream& log);
void cmd_predict(const RunConfig& config, std::ostream& log);
void cmd_evaluate(const RunConfig& config, std::ostream& log);
void cmd_baseline_rotation(const RunConfig& config, std::ostream& log);
void cmd_sim_study(const RunConfig& config, std::ostream& log);
void cmd_parse_hurdat2(const RunConfig& config, std::ostream& log);

} // namespace fmsos
