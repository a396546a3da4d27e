#include "fmsos/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>

#include <boost/algorithm/string/classification.hpp>
#include <boost/algorithm/string/split.hpp>

#include "fmsos/errors.hpp"
#include "fmsos/initialize.hpp"
#include "fmsos/trace_io.hpp"

namespace fmsos {
namespace {

namespace fs = std::filesystem;

std::string fmt_real(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

fs::path out_path(const RunConfig& config, const std::string& name) {
  const fs::path dir(config.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory '" + config.out + "': " + ec.message());
  return dir / name;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

void write_prologue(std::ostream& out, const Prologue& prologue) {
  for (const auto& [key, value] : prologue) out << "# " << key << '=' << value << '\n';
}

void require(const std::string& value, const char* what) {
  if (value.empty()) throw ConfigError(std::string(what) + " is required");
}

// The data file fixes the sphere dimension.
RunConfig with_data_dim(RunConfig config, const Dataset& data) {
  config.sampler.prior.p = data.dim() - 1;
  return config;
}

Dataset load_data(const RunConfig& config, const std::string& path) {
  return load_pairs_csv(path, config.data_format);
}

const char* const kSlotNames[6] = {"atom", "psi", "birth", "death", "rotation", "kappa"};

void print_summary(std::ostream& out, const FitSummary& s) {
  out << "n=" << s.n << '\n';
  out << "records=" << s.records << '\n';
  for (std::size_t slot = 0; slot < 6; ++slot) {
    out << "accept_" << kSlotNames[slot] << '=' << fmt_real(s.stats.rate(slot), "%.4f") << " ("
        << s.stats.accepted[slot] << '/' << s.stats.proposed[slot] << ")\n";
  }
  out << "mean_k=" << fmt_real(s.mean_k, "%.4f") << '\n';
  if (s.n > 0) out << "mean_kappa=" << fmt_real(s.mean_kappa, "%.4f") << '\n';
  if (s.n == 0) {
    out << "k_histogram=";
    for (std::size_t k = 1; k < s.k_histogram.size(); ++k) {
      out << (k > 1 ? "," : "") << k << ':' << s.k_histogram[k];
    }
    out << '\n';
  }
  if (s.distance) {
    out << "dtilde_mean=" << fmt_real(s.distance->mean, "%.5f") << '\n';
    out << "dtilde_sd=" << fmt_real(s.distance->sd, "%.5f") << '\n';
  }
}

} // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) != nullptr) return kExitConfig;
  if (dynamic_cast<const DataError*>(&e) != nullptr) return kExitData;
  return kExitNumeric;
}

ReferenceCloud make_cloud(const RunConfig& config) {
  return ReferenceCloud::sample(config.sampler.prior.p, config.sampler.prior.cloud_size,
                                mix_seed(config.seed(), kStreamCloud));
}

ModelState simulate_truth(const RunConfig& config, const ReferenceCloud& cloud, Rng& rng) {
  if (config.truth_model == TruthModel::kRotation) {
    return ModelState{std::nullopt, sample_haar_rotation(config.sampler.prior.p, rng), config.kappa};
  }
  ModelState truth = sample_prior_dual(config.sampler.prior, cloud, rng, config.k);
  truth.kappa = config.kappa;
  return truth;
}

ChainTrace thinned(const ChainTrace& trace, std::size_t max_records) {
  ChainTrace out;
  out.dim = trace.dim;
  out.rotation_only = trace.rotation_only;
  out.header = trace.header;
  out.stats = trace.stats;
  const std::size_t n = trace.records.size();
  if (n <= max_records) {
    out.records = trace.records;
    return out;
  }
  for (std::size_t i = 0; i < max_records; ++i) {
    out.records.push_back(trace.records[(i * n) / max_records]);
  }
  return out;
}

ChainTrace pooled(const std::vector<ChainTrace>& chains) {
  if (chains.empty()) throw DomainError("no chains to pool");
  ChainTrace out;
  out.dim = chains.front().dim;
  out.rotation_only = chains.front().rotation_only;
  out.header = chains.front().header;
  for (const auto& c : chains) {
    out.records.insert(out.records.end(), c.records.begin(), c.records.end());
    for (std::size_t s = 0; s < 6; ++s) {
      out.stats.proposed[s] += c.stats.proposed[s];
      out.stats.accepted[s] += c.stats.accepted[s];
    }
  }
  return out;
}

FitResult fit_model(const RunConfig& config, const Dataset& data, const std::optional<ModelState>& truth) {
  config.validate();
  if (data.dim() != config.sampler.prior.p + 1) throw ConfigError("p does not match the data dimension");
  const ReferenceCloud cloud = make_cloud(config);
  const Prologue header = resolved_config(config);

  FitResult result;
  for (std::size_t c = 0; c < config.chains; ++c) {
    Rng rng = make_rng(config.seed(), kStreamChain + c);
    const ModelState init = config.init == InitMethod::kClustered
                                ? clustered_initial_state(config.sampler, cloud, data, rng)
                                : initial_state(config.sampler, cloud, data, rng, config.init_candidates);
    ChainTrace trace = run_chain(init, config.sampler, cloud, data, rng);
    trace.header = header;
    trace.header.emplace_back("chain", std::to_string(c));
    result.chains.push_back(std::move(trace));
  }

  const ChainTrace all = pooled(result.chains);
  FitSummary& s = result.summary;
  s.n = data.size();
  s.records = all.records.size();
  s.stats = all.stats;
  s.k_histogram.assign(config.sampler.prior.k_max + 1, 0);
  for (const auto& r : all.records) {
    s.mean_k += static_cast<double>(r.k());
    s.mean_kappa += r.kappa;
    if (r.k() < s.k_histogram.size()) ++s.k_histogram[r.k()];
  }
  if (s.records > 0) {
    s.mean_k /= static_cast<double>(s.records);
    s.mean_kappa /= static_cast<double>(s.records);
  }
  if (truth && s.records > 0) {
    Rng probe_rng = make_rng(config.seed(), kStreamProbes);
    const auto probes = uniform_points(config.sampler.prior.p, config.probe_points, probe_rng);
    std::vector<ChainTrace> subsets;
    for (const auto& c : result.chains) subsets.push_back(thinned(c, config.distance_records));
    s.distance = posterior_map_distance(pooled(subsets), *truth, probes);
  }
  return result;
}

std::pair<Dataset, Dataset> train_test_split(const RunConfig& config, const Dataset& data) {
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng = make_rng(config.seed(), kStreamSplit);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_test = static_cast<std::size_t>(std::round(config.test_fraction * static_cast<double>(data.size())));
  if (n_test == 0 || n_test >= data.size()) throw DataError("dataset too small to split into train and test");
  std::vector<std::size_t> test(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {data.subset(train), data.subset(test)};
}

std::vector<SimCell> run_sim_study(const RunConfig& config) {
  config.validate();
  std::vector<SimCell> cells;
  for (std::size_t a = 0; a < config.grid_k.size(); ++a) {
    for (std::size_t b = 0; b < config.grid_kappa.size(); ++b) {
      for (std::size_t c = 0; c < config.grid_n.size(); ++c) {
        SimCell cell;
        cell.index = cells.size();
        cell.k = config.grid_k[a];
        cell.kappa = config.grid_kappa[b];
        cell.n = config.grid_n[c];
        cells.push_back(cell);
      }
    }
  }
  const std::size_t n_max = *std::max_element(config.grid_n.begin(), config.grid_n.end());
  const std::size_t per_truth = config.grid_n.size();

#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < cells.size(); ++i) {
    SimCell& cell = cells[i];
    const auto start = std::chrono::steady_clock::now();
    try {
      const std::size_t truth_index = i / per_truth;
      RunConfig cell_config = config;
      cell_config.k = cell.k;
      cell_config.kappa = cell.kappa;
      cell_config.sampler.seed = mix_seed(config.seed(), 1000 + truth_index);
      const ReferenceCloud cloud = make_cloud(cell_config);
      Rng truth_rng = make_rng(cell_config.seed(), kStreamTruth);
      const ModelState truth = simulate_truth(cell_config, cloud, truth_rng);
      Rng data_rng = make_rng(cell_config.seed(), kStreamData);
      const Dataset full = simulate_dataset(truth, n_max, data_rng);
      std::vector<std::size_t> prefix(cell.n);
      std::iota(prefix.begin(), prefix.end(), 0);
      const FitResult fit = fit_model(cell_config, full.subset(prefix), truth);
      cell.dtilde_mean = fit.summary.distance->mean;
      cell.dtilde_sd = fit.summary.distance->sd;
      cell.mean_k = fit.summary.mean_k;
    } catch (const std::exception& e) {
      cell.status = std::string("error: ") + e.what();
    }
    cell.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return cells;
}

void cmd_simulate(const RunConfig& config, std::ostream& log) {
  config.validate();
  const ReferenceCloud cloud = make_cloud(config);
  Rng truth_rng = make_rng(config.seed(), kStreamTruth);
  const ModelState truth = simulate_truth(config, cloud, truth_rng);
  Rng data_rng = make_rng(config.seed(), kStreamData);
  const Dataset data = simulate_dataset(truth, config.n, data_rng);
  const Prologue prologue = resolved_config(config);
  const fs::path data_path = out_path(config, "data.csv");
  const fs::path truth_path = out_path(config, "truth.txt");
  write_pairs_csv(data_path.string(), data, prologue);
  write_state(truth_path.string(), truth, prologue);
  log << "wrote " << data.size() << " pairs to " << data_path.string() << '\n';
  log << "wrote truth (k=" << truth.k() << ", kappa=" << truth.kappa << ") to " << truth_path.string() << '\n';
}

void cmd_fit(const RunConfig& base, std::ostream& log) {
  RunConfig config = base;
  Dataset data = Dataset::empty(config.sampler.prior.p + 1);
  if (!config.data.empty()) {
    data = load_data(config, config.data);
    config = with_data_dim(config, data);
  }
  std::optional<ModelState> truth;
  if (!config.truth.empty()) truth = read_state(config.truth);
  const FitResult fit = fit_model(config, data, truth);
  for (std::size_t c = 0; c < fit.chains.size(); ++c) {
    write_trace(out_path(config, "trace_" + std::to_string(c) + ".txt").string(), fit.chains[c]);
  }
  std::ofstream summary = open_out(out_path(config, "summary.txt"));
  write_prologue(summary, resolved_config(config));
  print_summary(summary, fit.summary);
  print_summary(log, fit.summary);
}

namespace {

// --trace accepts a comma-separated list of chain files.
ChainTrace load_traces(const RunConfig& config) {
  require(config.trace, "--trace");
  std::vector<ChainTrace> chains;
  std::vector<std::string> paths;
  boost::algorithm::split(paths, config.trace, boost::algorithm::is_any_of(","));
  for (const auto& path : paths) chains.push_back(read_trace(path));
  return thinned(pooled(chains), config.distance_records);
}

} // namespace

void cmd_predict(const RunConfig& config, std::ostream& log) {
  require(config.data, "--data");
  const ChainTrace trace = load_traces(config);
  if (trace.records.empty()) throw DataError("trace has no records");
  const Dataset data = load_data(config, config.data);
  if (data.dim() != trace.dim) throw DataError("trace and data dimensions differ");
  kernels::PointMatrix sum = kernels::PointMatrix::Zero(data.dim(), static_cast<Eigen::Index>(data.size()));
  for (const auto& r : trace.records) sum += predict_means(r.to_state(), data.x());
  std::ofstream out = open_out(out_path(config, "predictions.csv"));
  write_prologue(out, resolved_config(config));
  const int d = data.dim();
  for (int c = 1; c <= d; ++c) out << 'x' << c << ',';
  for (int c = 1; c <= d; ++c) out << "yhat" << c << (c == d ? '\n' : ',');
  for (Eigen::Index i = 0; i < sum.cols(); ++i) {
    // Posterior mean direction: normalized average of per-record predictions.
    const double norm = sum.col(i).norm();
    const Eigen::VectorXd yhat = norm > 0.0 ? Eigen::VectorXd(sum.col(i) / norm) : Eigen::VectorXd(sum.col(i));
    for (int c = 0; c < d; ++c) out << fmt_real(data.x()(c, i), "%.17g") << ',';
    for (int c = 0; c < d; ++c) out << fmt_real(yhat[c], "%.17g") << (c + 1 == d ? '\n' : ',');
  }
  log << "wrote " << data.size() << " predictions from " << trace.records.size() << " records\n";
}

void cmd_evaluate(const RunConfig& config, std::ostream& log) {
  const ChainTrace trace = load_traces(config);
  if (trace.records.empty()) throw DataError("trace has no records");
  std::ofstream out = open_out(out_path(config, "evaluation.txt"));
  write_prologue(out, resolved_config(config));
  const std::string& test_path = config.test.empty() ? config.data : config.test;
  if (!test_path.empty()) {
    const Dataset test = load_data(config, test_path);
    const HeldOutScore score = held_out_log_likelihood(trace, test);
    const std::string line = "heldout_loglik=" + fmt_real(score.mean, "%.4f") + " (" +
                             fmt_real(score.std_error, "%.4f") + ")\n";
    out << line;
    log << line;
  }
  if (!config.truth.empty()) {
    const ModelState truth = read_state(config.truth);
    Rng probe_rng = make_rng(config.seed(), kStreamProbes);
    const auto probes = uniform_points(trace.dim - 1, config.probe_points, probe_rng);
    const PosteriorDistance d = posterior_map_distance(trace, truth, probes);
    const std::string line = "dtilde=" + fmt_real(d.mean, "%.4f") + " (" + fmt_real(d.sd, "%.4f") + ")\n";
    out << line;
    log << line;
  }
  if (test_path.empty() && config.truth.empty()) throw ConfigError("evaluate needs --test/--data or --truth");
}

void cmd_baseline_rotation(const RunConfig& base, std::ostream& log) {
  require(base.data, "--data");
  RunConfig config = base;
  const Dataset data = load_data(config, config.data);
  config = with_data_dim(config, data);
  config.sampler.rotation_only = true;
  Dataset train = data;
  Dataset test = data;
  if (config.test.empty()) {
    std::tie(train, test) = train_test_split(config, data);
  } else {
    test = load_data(config, config.test);
  }
  const FitResult fit = fit_model(config, train, std::nullopt);
  const ChainTrace all = thinned(pooled(fit.chains), config.distance_records);
  const HeldOutScore score = held_out_log_likelihood(all, test);
  std::ofstream out = open_out(out_path(config, "baseline.txt"));
  write_prologue(out, resolved_config(config));
  const std::string line = "baseline_heldout_loglik=" + fmt_real(score.mean, "%.4f") + " (" +
                           fmt_real(score.std_error, "%.4f") + ")\n";
  out << "train_n=" << train.size() << "\ntest_n=" << test.size() << '\n' << line;
  log << line;
  for (std::size_t c = 0; c < fit.chains.size(); ++c) {
    write_trace(out_path(config, "baseline_trace_" + std::to_string(c) + ".txt").string(), fit.chains[c]);
  }
}

void cmd_sim_study(const RunConfig& config, std::ostream& log) {
  const std::vector<SimCell> cells = run_sim_study(config);
  const Prologue prologue = resolved_config(config);
  std::ofstream table = open_out(out_path(config, "sim_study.csv"));
  write_prologue(table, prologue);
  table << "cell,k,kappa,n,dtilde_mean,dtilde_sd,mean_k,runtime_s,status\n";
  for (const auto& c : cells) {
    table << c.index << ',' << c.k << ',' << fmt_real(c.kappa) << ',' << c.n << ','
          << fmt_real(c.dtilde_mean, "%.6f") << ',' << fmt_real(c.dtilde_sd, "%.6f") << ','
          << fmt_real(c.mean_k, "%.4f") << ',' << fmt_real(c.runtime_s, "%.2f") << ",\"" << c.status << "\"\n";
  }
  std::ofstream curves = open_out(out_path(config, "curves.csv"));
  write_prologue(curves, prologue);
  curves << "series,n,dtilde_mean,dtilde_sd\n";
  for (const auto& c : cells) {
    if (c.status != "ok") continue;
    curves << "k=" << c.k << ";kappa=" << fmt_real(c.kappa) << ',' << c.n << ',' << fmt_real(c.dtilde_mean, "%.6f")
           << ',' << fmt_real(c.dtilde_sd, "%.6f") << '\n';
  }
  log << "k\tkappa\tn\tdtilde (sd)\truntime_s\n";
  for (const auto& c : cells) {
    log << c.k << '\t' << fmt_real(c.kappa) << '\t' << c.n << '\t';
    if (c.status == "ok") {
      log << fmt_real(c.dtilde_mean, "%.3f") << " (" << fmt_real(c.dtilde_sd, "%.3f") << ")";
    } else {
      log << c.status;
    }
    log << '\t' << fmt_real(c.runtime_s, "%.1f") << '\n';
  }
}

void cmd_parse_hurdat2(const RunConfig& config, std::ostream& log) {
  require(config.data, "--data");
  const std::vector<StormTrack> tracks = load_hurdat2(config.data);
  const TrackPairs pairs = tracks_to_regression_pairs(tracks);
  std::size_t fixes = 0;
  for (const auto& t : tracks) fixes += t.fixes.size();
  Prologue prologue = resolved_config(config);
  prologue.emplace_back("storms", std::to_string(tracks.size()));
  prologue.emplace_back("fixes", std::to_string(fixes));
  prologue.emplace_back("skipped_single_fix", std::to_string(pairs.skipped));
  const fs::path path = out_path(config, "hurdat2_pairs.csv");
  write_pairs_csv(path.string(), pairs.data, prologue);
  log << "storms=" << tracks.size() << " fixes=" << fixes << " pairs=" << pairs.data.size()
      << " skipped_single_fix=" << pairs.skipped << '\n';
  log << "wrote " << path.string() << '\n';
}

} // namespace fmsos
