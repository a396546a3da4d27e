// Command-line front end: fmsos <subcommand> [flags].
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fmsos/commands.hpp"
#include "fmsos/errors.hpp"
#include "fmsos/run_config.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> data, test, truth, trace, out, format, truth_model;
  std::optional<std::size_t> chains, cloud_size, k, n, iters, burn_in, thin;
  std::optional<double> kappa;
  std::vector<std::string> sets;
};

void add_common(CLI::App* sub, Flags& f, bool seed_required) {
  const fmsos::RunConfig defaults;
  sub->add_option("--config", f.config, "Flat key = value config file");
  if (seed_required) {
    sub->add_option("--seed", f.seed, "Run seed")->required();
  } else {
    sub->add_option("--seed", f.seed, "Run seed (default " + std::to_string(defaults.seed()) + ")");
  }
  sub->add_option("--data", f.data, "Pairs CSV (or HURDAT2 file for parse-hurdat2)");
  sub->add_option("--out", f.out, "Output directory (default " + defaults.out + ")");
  sub->add_option("--chains", f.chains, "Independent chains (default " + std::to_string(defaults.chains) + ")");
  sub->add_option("--cloud-size", f.cloud_size,
                  "Reference cloud size (default " + std::to_string(defaults.sampler.prior.cloud_size) + ")");
  sub->add_option("--format", f.format, "Pairs CSV layout: unit or lonlat (default unit)");
  sub->add_option("--set", f.sets, "Override any config key: --set key=value (repeatable)");
}

void add_sampler(CLI::App* sub, Flags& f) {
  sub->add_option("--iters", f.iters, "Iterations per chain (default 20000)");
  sub->add_option("--burn-in", f.burn_in, "Burn-in iterations (default 5000)");
  sub->add_option("--thin", f.thin, "Keep every thin-th iteration (default 5)");
}

fmsos::RunConfig resolve(const Flags& f) {
  fmsos::RunConfig config;
  if (!f.config.empty()) config = fmsos::load_run_config(f.config);
  auto put = [&config](const char* key, const auto& value) {
    if (!value) return;
    if constexpr (std::is_same_v<std::decay_t<decltype(*value)>, std::string>) {
      fmsos::set_config_value(config, key, *value);
    } else {
      fmsos::set_config_value(config, key, std::to_string(*value));
    }
  };
  put("seed", f.seed);
  put("data", f.data);
  put("test", f.test);
  put("truth", f.truth);
  put("trace", f.trace);
  put("out", f.out);
  put("data_format", f.format);
  put("truth_model", f.truth_model);
  put("chains", f.chains);
  put("cloud_size", f.cloud_size);
  put("k", f.k);
  put("n", f.n);
  put("iters", f.iters);
  put("burn_in", f.burn_in);
  put("thin", f.thin);
  if (f.kappa) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", *f.kappa);
    fmsos::set_config_value(config, "kappa", buf);
  }
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw fmsos::ConfigError("--set expects key=value, got '" + s + "'");
    fmsos::set_config_value(config, s.substr(0, eq), s.substr(eq + 1));
  }
  config.validate();
  return config;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian sphere-on-sphere regression with optimal transport maps"};
  app.require_subcommand(1);
  Flags f;

  auto* simulate = app.add_subcommand("simulate", "Draw a truth and a dataset from it");
  add_common(simulate, f, true);
  simulate->add_option("--k", f.k, "Atoms in the truth (default 5)");
  simulate->add_option("--kappa", f.kappa, "Response concentration (default 10)");
  simulate->add_option("--n", f.n, "Number of pairs (default 100)");
  simulate->add_option("--truth-model", f.truth_model, "transport or rotation (default transport)");

  auto* fit = app.add_subcommand("fit", "Run the sampler and write traces and a summary");
  add_common(fit, f, true);
  fit->add_option("--truth", f.truth, "Truth file; adds posterior distance to the summary");
  add_sampler(fit, f);

  auto* predict = app.add_subcommand("predict", "Posterior mean predictions for the covariates in --data");
  add_common(predict, f, false);
  predict->add_option("--trace", f.trace, "Trace file(s), comma separated")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Held-out log-likelihood and distance to a truth");
  add_common(evaluate, f, false);
  evaluate->add_option("--trace", f.trace, "Trace file(s), comma separated")->required();
  evaluate->add_option("--test", f.test, "Held-out pairs CSV");
  evaluate->add_option("--truth", f.truth, "Truth file");

  auto* baseline = app.add_subcommand("baseline-rotation", "Fit the rotation-only model and score held-out data");
  add_common(baseline, f, false);
  add_sampler(baseline, f);
  baseline->add_option("--test", f.test, "Held-out pairs CSV (default: random split of --data)");

  auto* study = app.add_subcommand("sim-study", "Run a (k, kappa, n) simulation grid");
  add_common(study, f, true);
  add_sampler(study, f);

  auto* hurdat = app.add_subcommand("parse-hurdat2", "Convert a HURDAT2 file to start/end location pairs");
  add_common(hurdat, f, false);

  CLI11_PARSE(app, argc, argv);

  const std::map<CLI::App*, std::function<void(const fmsos::RunConfig&, std::ostream&)>> handlers = {
      {simulate, fmsos::cmd_simulate},    {fit, fmsos::cmd_fit},
      {predict, fmsos::cmd_predict},      {evaluate, fmsos::cmd_evaluate},
      {baseline, fmsos::cmd_baseline_rotation}, {study, fmsos::cmd_sim_study},
      {hurdat, fmsos::cmd_parse_hurdat2},
  };
  try {
    const fmsos::RunConfig config = resolve(f);
    for (const auto& [sub, handler] : handlers) {
      if (sub->parsed()) handler(config, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return fmsos::exit_code_for(e);
  }
  return fmsos::kExitOk;
}
