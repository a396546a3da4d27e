#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fmsos/errors.hpp"
#include "fmsos/sphere.hpp"

using namespace fmsos;
using std::numbers::pi;

namespace {

UnitVector e(int i) { return UnitVector::basis(3, i); }

Eigen::VectorXd vec3(double a, double b, double c) {
  Eigen::VectorXd v(3);
  v << a, b, c;
  return v;
}

} // namespace

TEST_CASE("unit vectors normalize or reject") {
  const UnitVector u = UnitVector::normalized(vec3(3, 0, 4));
  CHECK(u[0] == doctest::Approx(0.6));
  CHECK(u[2] == doctest::Approx(0.8));
  CHECK_THROWS_AS(UnitVector::normalized(vec3(0, 0, 0)), DomainError);
  CHECK_THROWS_AS(UnitVector::normalized(Eigen::VectorXd::Ones(1)), DomainError);
  CHECK_THROWS_AS(UnitVector::from_unit(vec3(0.5, 0, 0)), DomainError);
  CHECK_NOTHROW(UnitVector::from_unit(vec3(1 + 1e-12, 0, 0)));
}

TEST_CASE("geodesic distance on basis vectors") {
  CHECK(geodesic_distance(e(0), e(0)) == 0.0);
  CHECK(geodesic_distance(e(0), e(0).antipode()) == doctest::Approx(pi).epsilon(1e-12));
  CHECK(geodesic_distance(e(0), e(1)) == doctest::Approx(pi / 2).epsilon(1e-12));
}

TEST_CASE("cost is half the squared distance") {
  CHECK(cost(e(0), e(0)) == 0.0);
  CHECK(cost(e(0), e(0).antipode()) == doctest::Approx(pi * pi / 2).epsilon(1e-12));
  CHECK(cost(e(0), e(1)) == doctest::Approx(pi * pi / 8).epsilon(1e-12));
  CHECK(kMaxCost == doctest::Approx(4.934802200544679));
}

TEST_CASE("tangent vectors must be orthogonal to the base") {
  CHECK_THROWS_AS(TangentVector(e(0), vec3(1, 0, 0)), DomainError);
  const TangentVector t = TangentVector::project(e(0), vec3(5, 1, 2));
  CHECK(t.vec()[0] == 0.0);
  CHECK(t.vec()[1] == 1.0);
}

TEST_CASE("exp map closed forms") {
  CHECK(exp_map(TangentVector(e(1), vec3(0, 0, 0))) == e(1));
  const UnitVector half = exp_map(TangentVector(e(0), vec3(0, pi / 2, 0)));
  CHECK((half.coords() - e(1).coords()).norm() < 1e-12);
  const UnitVector full = exp_map(TangentVector(e(0), vec3(0, pi, 0)));
  CHECK((full.coords() + e(0).coords()).norm() < 1e-12);
}

TEST_CASE("log map inverts exp map") {
  const TangentVector zero = log_map(e(2), e(2));
  CHECK(zero.norm() == 0.0);
  const TangentVector t = log_map(e(0), e(1));
  CHECK((t.vec() - vec3(0, pi / 2, 0)).norm() < 1e-12);
  CHECK_THROWS_AS(log_map(e(0), e(0).antipode()), AntipodalError);

  Rng rng = make_rng(11);
  for (int i = 0; i < 200; ++i) {
    const UnitVector x = sample_uniform_sphere(2, rng);
    const UnitVector y = sample_uniform_sphere(2, rng);
    if (x.dot(y) < -0.999) continue;
    const UnitVector back = exp_map(log_map(x, y));
    CHECK((back.coords() - y.coords()).norm() < 1e-9);
    CHECK(log_map(x, y).norm() == doctest::Approx(geodesic_distance(x, y)).epsilon(1e-9));
  }
}

TEST_CASE("metric axioms on random triples") {
  Rng rng = make_rng(12);
  for (int i = 0; i < 500; ++i) {
    const UnitVector a = sample_uniform_sphere(3, rng);
    const UnitVector b = sample_uniform_sphere(3, rng);
    const UnitVector c = sample_uniform_sphere(3, rng);
    CHECK(geodesic_distance(a, b) == doctest::Approx(geodesic_distance(b, a)));
    CHECK(geodesic_distance(a, c) <= geodesic_distance(a, b) + geodesic_distance(b, c) + 1e-12);
    CHECK(geodesic_distance(a, a) == 0.0);
  }
}

TEST_CASE("dimension mismatch is rejected") {
  CHECK_THROWS_AS(geodesic_distance(e(0), UnitVector::basis(4, 0)), DomainError);
}

TEST_CASE("uniform sampler symmetry and cap mass") {
  Rng rng = make_rng(13);
  const int n = 100000;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  int positive = 0;
  int in_cap = 0;
  const double theta0 = 0.7;
  for (int i = 0; i < n; ++i) {
    const UnitVector u = sample_uniform_sphere(2, rng);
    mean += u.coords();
    positive += u[0] > 0.0;
    in_cap += u[0] > std::cos(theta0);
  }
  mean /= n;
  CHECK(mean.cwiseAbs().maxCoeff() < 0.01);
  CHECK(std::abs(positive / double(n) - 0.5) < 0.01);
  const double expected = (1.0 - std::cos(theta0)) / 2.0;
  const double se = std::sqrt(expected * (1 - expected) / n);
  CHECK(std::abs(in_cap / double(n) - expected) < 4 * se);
}
