#include <doctest.h>

#include <cmath>

#include "fmsos/bessel.hpp"
#include "fmsos/initialize.hpp"
#include "fmsos/vmf.hpp"

using namespace fmsos;

TEST_CASE("kappa from resultant inverts the Bessel ratio") {
  for (double k : {0.5, 3.0, 40.0, 900.0}) {
    CHECK(kappa_from_resultant(bessel_ratio(3, k), 3) == doctest::Approx(k).epsilon(1e-8));
    CHECK(kappa_from_resultant(bessel_ratio(5, k), 5) == doctest::Approx(k).epsilon(1e-8));
  }
}

TEST_CASE("spherical k-means separates tight clusters") {
  Rng rng = make_rng(131);
  kernels::PointMatrix pts(3, 300);
  for (int i = 0; i < 300; ++i) {
    const UnitVector c = UnitVector::basis(3, i % 3);
    pts.col(i) = vmf_sample(VmfParams(c, 500.0), rng).coords();
  }
  const SphericalKMeans km = spherical_kmeans(pts, 3, rng);
  for (int i = 3; i < 300; ++i) CHECK(km.labels[static_cast<std::size_t>(i)] == km.labels[static_cast<std::size_t>(i % 3)]);
  for (int j = 0; j < 3; ++j) CHECK(std::abs(km.centers.col(j).norm() - 1.0) < 1e-12);
  CHECK(km.objective > 290.0);
}

TEST_CASE("potentials reproduce labels of a Laguerre tessellation") {
  Rng rng = make_rng(132);
  kernels::PointMatrix atoms(3, 4);
  for (int j = 0; j < 4; ++j) atoms.col(j) = sample_uniform_sphere(2, rng).coords();
  const std::vector<double> psi{0.4, -0.3, 0.1, 0.0};
  kernels::PointMatrix pts(3, 500);
  for (int i = 0; i < 500; ++i) pts.col(i) = sample_uniform_sphere(2, rng).coords();
  Eigen::MatrixXd costs;
  kernels::cost_table(pts, atoms, costs);
  std::vector<int> labels(500);
  kernels::assign(costs, psi, labels);
  const std::vector<double> fitted = fit_potentials_to_labels(costs, labels, 4, 200);
  std::vector<int> again(500);
  kernels::assign(costs, fitted, again);
  std::size_t wrong = 0;
  for (int i = 0; i < 500; ++i) wrong += again[i] != labels[i];
  CHECK(wrong <= 5);
}

TEST_CASE("clustered start is valid and beats prior draws on likelihood") {
  PriorConfig prior;
  const ReferenceCloud cloud = ReferenceCloud::sample(2, 5000, 133);
  Rng rng = make_rng(134);
  ModelState truth = sample_prior_dual(prior, cloud, rng, 3);
  truth.kappa = 200.0;
  const Dataset data = simulate_dataset(truth, 400, rng);
  SamplerConfig config;
  ClusteredInitOptions opts;
  opts.k_high = 5;
  opts.rotation_candidates = 40;
  opts.refine_steps = 200;
  const ModelState init = clustered_initial_state(config, cloud, data, rng, opts);
  CHECK_NOTHROW(validate_state(init, cloud));
  CHECK(init.kappa > 1.0);

  const ModelState prior_start = initial_state(config, cloud, data, rng, 20);
  CHECK(log_likelihood(init, data) > log_likelihood(prior_start, data));

  // Small data falls back to a prior draw.
  const Dataset tiny = data.subset({0, 1, 2});
  CHECK_NOTHROW(validate_state(clustered_initial_state(config, cloud, tiny, rng, opts), cloud));
}
