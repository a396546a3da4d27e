#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fmsos/commands.hpp"
#include "fmsos/errors.hpp"
#include "fmsos/trace_io.hpp"

using namespace fmsos;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fmsos_test_commands_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig quick_config(std::uint64_t seed) {
  RunConfig c;
  c.sampler.seed = seed;
  c.sampler.iters = 400;
  c.sampler.burn_in = 100;
  c.sampler.thin = 10;
  c.sampler.prior.cloud_size = 3000;
  c.probe_points = 2000;
  c.k = 3;
  c.n = 60;
  return c;
}

} // namespace

TEST_CASE("exit codes by error type") {
  CHECK(exit_code_for(ConfigError("x")) == kExitConfig);
  CHECK(exit_code_for(DataError("x")) == kExitData);
  CHECK(exit_code_for(ParseError("BadNumber", 3, "x")) == kExitData);
  CHECK(exit_code_for(NotConverged("x")) == kExitNumeric);
  CHECK(exit_code_for(std::runtime_error("x")) == kExitNumeric);
}

TEST_CASE("simulated truths") {
  RunConfig c = quick_config(5);
  const ReferenceCloud cloud = make_cloud(c);
  Rng rng = make_rng(1);
  const ModelState t = simulate_truth(c, cloud, rng);
  CHECK(t.k() == 3);
  CHECK(t.kappa == c.kappa);
  c.truth_model = TruthModel::kRotation;
  CHECK(simulate_truth(c, cloud, rng).k() == 0);
}

TEST_CASE("thinning and pooling") {
  ChainTrace a;
  for (std::size_t i = 0; i < 10; ++i) {
    TraceRecord r;
    r.iteration = i;
    a.records.push_back(r);
  }
  a.stats.proposed[0] = 4;
  const ChainTrace t = thinned(a, 4);
  REQUIRE(t.records.size() == 4);
  CHECK(t.records[0].iteration == 0);
  CHECK(t.records[3].iteration == 7);
  CHECK(thinned(a, 50).records.size() == 10);
  const ChainTrace p = pooled({a, t});
  CHECK(p.records.size() == 14);
  CHECK(p.stats.proposed[0] == 8);
  CHECK_THROWS_AS(pooled({}), DomainError);
}

TEST_CASE("train/test split is a seeded partition") {
  RunConfig c = quick_config(9);
  const ReferenceCloud cloud = make_cloud(c);
  Rng rng = make_rng(2);
  const Dataset d = simulate_dataset(simulate_truth(c, cloud, rng), 50, rng);
  const auto [train, test] = train_test_split(c, d);
  CHECK(train.size() == 40);
  CHECK(test.size() == 10);
  const auto [train2, test2] = train_test_split(c, d);
  CHECK(test.x() == test2.x());
  CHECK_THROWS_AS(train_test_split(c, d.subset({0, 1})), DataError);
}

TEST_CASE("fit with a truth reports a distance; no data reports a k histogram") {
  const RunConfig c = quick_config(11);
  const ReferenceCloud cloud = make_cloud(c);
  Rng rng = make_rng(3);
  const ModelState truth = simulate_truth(c, cloud, rng);
  const Dataset d = simulate_dataset(truth, 80, rng);
  const FitResult fit = fit_model(c, d, truth);
  CHECK(fit.chains.size() == 1);
  CHECK(fit.summary.records == c.sampler.expected_records());
  REQUIRE(fit.summary.distance.has_value());
  CHECK(fit.summary.distance->mean > 0.0);

  const FitResult prior = fit_model(c, Dataset::empty(3), std::nullopt);
  std::size_t total = 0;
  for (auto v : prior.summary.k_histogram) total += v;
  CHECK(total == prior.summary.records);
  CHECK_FALSE(prior.summary.distance.has_value());
}

TEST_CASE("simulate writes identical files for the same seed") {
  RunConfig c = quick_config(21);
  c.out = scratch("sim_a").string();
  std::ostringstream log;
  cmd_simulate(c, log);
  RunConfig c2 = c;
  c2.out = scratch("sim_b").string();
  cmd_simulate(c2, log);
  // The prologue echoes the output directory, so compare from the first data line on.
  auto body = [](const std::string& s) { return s.substr(s.find("\nx1")); };
  CHECK(body(slurp(fs::path(c.out) / "data.csv")) == body(slurp(fs::path(c2.out) / "data.csv")));
  const Dataset d = load_pairs_csv((fs::path(c.out) / "data.csv").string(), PairsFormat::kUnitVectors);
  CHECK(d.size() == 60);
  const ModelState t = read_state((fs::path(c.out) / "truth.txt").string());
  CHECK(t.k() == 3);
}

TEST_CASE("concentrated simulation puts responses on the map") {
  RunConfig c = quick_config(22);
  c.kappa = 1e6;
  c.out = scratch("sim_kappa").string();
  std::ostringstream log;
  cmd_simulate(c, log);
  const Dataset d = load_pairs_csv((fs::path(c.out) / "data.csv").string(), PairsFormat::kUnitVectors);
  const ModelState t = read_state((fs::path(c.out) / "truth.txt").string());
  const kernels::PointMatrix means = predict_means(t, d.x());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(geodesic_distance(d.y(i), UnitVector::normalized(means.col(static_cast<Eigen::Index>(i)))) < 0.01);
  }
}

TEST_CASE("mini simulation grid emits every cell") {
  RunConfig c = quick_config(31);
  c.grid_k = {2, 3};
  c.grid_kappa = {50};
  c.grid_n = {20, 40, 60};
  const auto cells = run_sim_study(c);
  REQUIRE(cells.size() == 6);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    CHECK(cells[i].index == i);
    CHECK(cells[i].status == "ok");
  }
  CHECK(cells[0].k == 2);
  CHECK(cells[5].n == 60);
}

TEST_CASE("baseline scores are deterministic") {
  RunConfig c = quick_config(41);
  c.out = scratch("baseline_data").string();
  std::ostringstream log;
  cmd_simulate(c, log);
  c.data = (fs::path(c.out) / "data.csv").string();
  c.out = scratch("baseline_a").string();
  std::ostringstream a;
  cmd_baseline_rotation(c, a);
  c.out = scratch("baseline_b").string();
  std::ostringstream b;
  cmd_baseline_rotation(c, b);
  CHECK(a.str() == b.str());
  CHECK(a.str().find("baseline_heldout_loglik=") == 0);
}

TEST_CASE("missing inputs are configuration or data errors") {
  RunConfig c = quick_config(51);
  std::ostringstream log;
  CHECK_THROWS_AS(cmd_predict(c, log), ConfigError);
  c.data = "/nonexistent/data.csv";
  CHECK_THROWS_AS(cmd_fit(c, log), DataError);
}
