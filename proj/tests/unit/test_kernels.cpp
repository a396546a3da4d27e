#include <doctest.h>

#include <limits>
#include <vector>

#include "fmsos/kernels.hpp"
#include "fmsos/sphere.hpp"

using namespace fmsos;
using namespace fmsos::kernels;

namespace {

PointMatrix random_points(int p, std::size_t n, Rng& rng) {
  PointMatrix out(p + 1, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) out.col(static_cast<Eigen::Index>(i)) = sample_uniform_sphere(p, rng).coords();
  return out;
}

} // namespace

TEST_CASE("cost table matches the scalar cost") {
  Rng rng = make_rng(41);
  const PointMatrix pts = random_points(2, 50, rng);
  const PointMatrix atoms = random_points(2, 4, rng);
  Eigen::MatrixXd costs;
  cost_table(pts, atoms, costs, Exec::kSerial);
  REQUIRE(costs.rows() == 50);
  REQUIRE(costs.cols() == 4);
  for (Eigen::Index i = 0; i < 50; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      const double ref = cost(UnitVector::from_unit(pts.col(i)), UnitVector::from_unit(atoms.col(j)));
      CHECK(costs(i, j) == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("serial and OpenMP kernels agree exactly") {
  Rng rng = make_rng(42);
  const PointMatrix pts = random_points(3, 5000, rng);
  const PointMatrix atoms = random_points(3, 7, rng);
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  cost_table_serial(pts, atoms, a);
  cost_table_omp(pts, atoms, b);
  CHECK(a == b);

  Eigen::VectorXd col_s(5000);
  Eigen::VectorXd col_p(5000);
  cost_column(pts, atoms.col(2), col_s, Exec::kSerial);
  cost_column(pts, atoms.col(2), col_p, Exec::kParallel);
  CHECK(col_s == col_p);
  CHECK(col_s == a.col(2));

  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> psi(7);
  for (double& v : psi) v = u(rng);
  std::vector<int> ls(5000);
  std::vector<int> lp(5000);
  assign_serial(a, psi, ls);
  assign_omp(a, psi, lp);
  CHECK(ls == lp);

  for (int j = 0; j < 7; ++j) {
    const HoldOutScan s = hold_out_scan_serial(a, psi, j);
    const HoldOutScan p = hold_out_scan_omp(a, psi, j);
    CHECK(s.min_gap == p.min_gap);
    CHECK(s.max_gap_by_cell == p.max_gap_by_cell);
    CHECK(s.count_by_cell == p.count_by_cell);
  }
}

TEST_CASE("assignment breaks ties towards the lowest index") {
  Eigen::MatrixXd costs(2, 3);
  costs << 1.0, 1.0, 1.0,
           2.0, 0.5, 0.5;
  const std::vector<double> psi{0.0, 0.0, 0.0};
  std::vector<int> labels(2);
  assign(costs, psi, labels, Exec::kSerial);
  CHECK(labels == std::vector<int>{0, 1});
  CHECK(count_labels(labels, 3) == std::vector<std::size_t>{1, 1, 0});
}

TEST_CASE("hold-out scan against a brute-force oracle") {
  Rng rng = make_rng(43);
  const PointMatrix pts = random_points(2, 400, rng);
  const PointMatrix atoms = random_points(2, 5, rng);
  Eigen::MatrixXd costs;
  cost_table(pts, atoms, costs);
  const std::vector<double> psi{0.3, -0.2, 0.0, 0.5, -0.4};
  for (int j = 0; j < 5; ++j) {
    const HoldOutScan scan = hold_out_scan(costs, psi, j);
    double min_gap = std::numeric_limits<double>::infinity();
    std::vector<double> max_gap(5, -std::numeric_limits<double>::infinity());
    for (Eigen::Index i = 0; i < costs.rows(); ++i) {
      int best = -1;
      for (int l = 0; l < 5; ++l) {
        if (l == j) continue;
        if (best < 0 || costs(i, l) - psi[l] < costs(i, best) - psi[best]) best = l;
      }
      const double gap = costs(i, j) - (costs(i, best) - psi[best]);
      min_gap = std::min(min_gap, gap);
      max_gap[best] = std::max(max_gap[best], gap);
    }
    CHECK(scan.min_gap == min_gap);
    CHECK(scan.max_gap_by_cell == max_gap);
  }
}
