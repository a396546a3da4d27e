#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fmsos/errors.hpp"
#include "fmsos/semidiscrete_ot.hpp"

using namespace fmsos;
using std::numbers::pi;

namespace {

UnitVector e(int i) { return UnitVector::basis(3, i); }

TargetMeasure antipodal(double psi0, double psi1) { return TargetMeasure({e(0), e(0).antipode()}, {psi0, psi1}); }

const ReferenceCloud& big_cloud() {
  static const ReferenceCloud cloud = ReferenceCloud::sample(2, 100000, 51);
  return cloud;
}

// Mass of the first cell for antipodal atoms with psi = (t, 0): the boundary sits at
// colatitude pi/2 + t/pi from e1, so the cell is a cap of that angular radius.
double antipodal_cap_mass(double t) { return (1.0 - std::cos(pi / 2 + t / pi)) / 2.0; }

} // namespace

TEST_CASE("target measure structure checks") {
  CHECK_THROWS_AS(TargetMeasure({}, {}), DomainError);
  CHECK_THROWS_AS(TargetMeasure({e(0), e(1)}, {0.0}), DomainError);
  CHECK_THROWS_AS(TargetMeasure({e(0), e(0)}, {0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(TargetMeasure({e(0), UnitVector::basis(4, 1)}, {0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(TargetMeasure({e(0)}, {std::nan("")}), DomainError);
  CHECK(antipodal(0.1, 0.0).within_potential_bounds());
  CHECK_FALSE(antipodal(pi * pi / 2 + 0.1, 0.0).within_potential_bounds());
  CHECK_FALSE(TargetMeasure({e(0), e(1)}, {3.0, -3.0}).within_potential_bounds());
}

TEST_CASE("transport map evaluation") {
  Rng rng = make_rng(52);
  const TargetMeasure one({e(2)}, {1.3});
  for (int i = 0; i < 50; ++i) CHECK(transport_map_eval(one, sample_uniform_sphere(2, rng)) == 0);

  const TargetMeasure split = antipodal(0.0, 0.0);
  for (int i = 0; i < 200; ++i) {
    const UnitVector x = sample_uniform_sphere(2, rng);
    CHECK(transport_map_eval(split, x) == (x[0] > 0.0 ? 0u : 1u));
  }

  std::vector<UnitVector> atoms;
  for (int j = 0; j < 6; ++j) atoms.push_back(sample_uniform_sphere(2, rng));
  const TargetMeasure flat(atoms, std::vector<double>(6, 0.4));
  for (int i = 0; i < 1000; ++i) {
    const UnitVector x = sample_uniform_sphere(2, rng);
    CHECK(transport_map_eval(flat, x) == voronoi_assign(atoms, x));
  }
}

TEST_CASE("voronoi rule on orthogonal atoms") {
  const std::vector<UnitVector> atoms{e(0), e(1), e(2)};
  Eigen::VectorXd v(3);
  v << 1.0 + 1e-6, 1.0, 1.0;
  CHECK(voronoi_assign(atoms, UnitVector::normalized(v)) == 0);
}

TEST_CASE("cell masses") {
  const ReferenceCloud& cloud = big_cloud();
  CHECK(cell_mass_estimate(TargetMeasure({e(1)}, {0.0}), cloud) == std::vector<double>{1.0});
  const auto half = cell_mass_estimate(antipodal(0.0, 0.0), cloud);
  CHECK(std::abs(half[0] - 0.5) < 0.005);
  const double t = pi * pi / 4;
  CHECK(antipodal_cap_mass(t) == doctest::Approx(0.8536).epsilon(1e-4));
  const auto tilted = cell_mass_estimate(antipodal(t, 0.0), cloud);
  CHECK(std::abs(tilted[0] - antipodal_cap_mass(t)) < 0.005);
  CHECK(tilted[0] + tilted[1] == doctest::Approx(1.0));
}

TEST_CASE("serial and parallel cell counts agree") {
  Rng rng = make_rng(53);
  std::vector<UnitVector> atoms;
  for (int j = 0; j < 8; ++j) atoms.push_back(sample_uniform_sphere(2, rng));
  const TargetMeasure m(atoms, {0.1, -0.2, 0.3, 0.0, 0.05, -0.1, 0.2, 0.0});
  CHECK(cell_counts(m, big_cloud(), kernels::Exec::kSerial) == cell_counts(m, big_cloud(), kernels::Exec::kParallel));
}

TEST_CASE("feasibility") {
  const ReferenceCloud& cloud = big_cloud();
  CHECK(is_feasible(TargetMeasure({e(0)}, {0.0}), cloud));
  CHECK(is_feasible(antipodal(0.0, 0.0), cloud));
  CHECK_FALSE(is_feasible(antipodal(pi * pi / 2 + 0.1, 0.0), cloud));
}

TEST_CASE("conditional feasible interval for antipodal atoms") {
  const ReferenceCloud& cloud = big_cloud();
  const FeasibleInterval b = conditional_feasible_bounds(antipodal(0.0, 0.0), 0, cloud);
  CHECK(std::abs(b.lower + pi * pi / 2) < 0.05);
  CHECK(std::abs(b.upper - pi * pi / 2) < 0.05);
  const FeasibleInterval shifted = conditional_feasible_bounds(antipodal(0.0, 0.7), 0, cloud);
  CHECK(shifted.lower == doctest::Approx(b.lower + 0.7).epsilon(1e-12));
  CHECK(shifted.upper == doctest::Approx(b.upper + 0.7).epsilon(1e-12));
  const FeasibleInterval boxed = conditional_feasible_interval(antipodal(0.0, 0.7), 0, cloud);
  CHECK(boxed.upper <= pi * pi / 2);
  const FeasibleInterval single = conditional_feasible_bounds(TargetMeasure({e(0)}, {0.0}), 0, cloud);
  CHECK(std::isinf(single.lower));
  CHECK(std::isinf(single.upper));
}

TEST_CASE("interval membership matches feasibility") {
  const ReferenceCloud cloud = ReferenceCloud::sample(2, 20000, 54);
  Rng rng = make_rng(55);
  std::vector<UnitVector> atoms;
  for (int j = 0; j < 5; ++j) atoms.push_back(sample_uniform_sphere(2, rng));
  const TargetMeasure m(atoms, std::vector<double>(5, 0.0));
  const FeasibleInterval iv = conditional_feasible_bounds(m, 2, cloud);
  for (double v : {iv.lower - 1e-6, iv.lower + 1e-6, 0.5 * (iv.lower + iv.upper), iv.upper - 1e-6, iv.upper + 1e-6}) {
    CHECK(iv.contains(v) == is_feasible(m.with_psi(2, v), cloud));
  }
}

TEST_CASE("empty interval is reported") {
  const ReferenceCloud& cloud = big_cloud();
  // Atom 1 already has no cell, so no value of psi_0 can fix feasibility.
  const TargetMeasure m({e(0), e(1), e(0).antipode()}, {0.0, -4.9, 0.0});
  CHECK_THROWS_AS(conditional_feasible_interval(m, 0, cloud), EmptyInterval);
}

TEST_CASE("dual objective values") {
  const ReferenceCloud& cloud = big_cloud();
  const std::vector<UnitVector> one{e(0)};
  double mean_cost = 0.0;
  for (Eigen::Index i = 0; i < cloud.points().cols(); ++i) {
    mean_cost += cost(UnitVector::from_unit(cloud.points().col(i)), e(0));
  }
  mean_cost /= static_cast<double>(cloud.size());
  const std::vector<double> w1{1.0};
  CHECK(dual_objective(one, std::vector<double>{0.9}, w1, cloud) == doctest::Approx(mean_cost).epsilon(1e-12));

  const std::vector<UnitVector> two{e(0), e(0).antipode()};
  const std::vector<double> w2{0.5, 0.5};
  const std::vector<double> psi{0.3, -0.1};
  const std::vector<double> psi_shift{1.3, 0.9};
  CHECK(dual_objective(two, psi, w2, cloud) == doctest::Approx(dual_objective(two, psi_shift, w2, cloud)).epsilon(1e-12));

  // Quadrature: integral of (theta^2 / 2) sin(theta) over [0, pi/2] equals pi/2 - 1.
  const double quad = pi / 2 - 1.0;
  CHECK(std::abs(dual_objective(two, std::vector<double>{0.0, 0.0}, w2, cloud) - quad) < 0.01);
}

TEST_CASE("dual solver inverts cell masses") {
  const ReferenceCloud& cloud = big_cloud();
  const std::vector<UnitVector> two{e(0), e(0).antipode()};
  const auto sym = solve_dual_potentials(two, std::vector<double>{0.5, 0.5}, cloud);
  CHECK(sym[1] == 0.0);
  CHECK(std::abs(sym[0]) < 0.05);

  const double t = pi * pi / 4;
  const double w = antipodal_cap_mass(t);
  DualSolveOptions opts;
  opts.tol = 1e-3;
  const auto psi = solve_dual_potentials(two, std::vector<double>{w, 1 - w}, cloud, opts);
  CHECK(psi[1] == 0.0);
  // Cell mass moves by about sin(theta0) / (2 pi) per unit of psi near the boundary.
  const double slope = std::sin(pi / 2 + t / pi) / (2 * pi);
  CHECK(std::abs(psi[0] - t) < (opts.tol + 0.005) / slope);
  const auto mass = cell_mass_estimate(TargetMeasure(two, psi), cloud);
  CHECK(std::abs(mass[0] - w) <= opts.tol + 1e-12);
}

TEST_CASE("dual solver reports non-convergence") {
  const ReferenceCloud cloud = ReferenceCloud::sample(2, 2000, 56);
  Rng rng = make_rng(57);
  std::vector<UnitVector> atoms;
  for (int j = 0; j < 6; ++j) atoms.push_back(sample_uniform_sphere(2, rng));
  DualSolveOptions opts;
  opts.max_iter = 1;
  opts.tol = 1e-9;
  CHECK_THROWS_AS(solve_dual_potentials(atoms, std::vector<double>(6, 1.0 / 6), cloud, opts), NotConverged);
}
