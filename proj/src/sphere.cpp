#include "fmsos/sphere.hpp"

#include <cmath>
#include <string>

#include "fmsos/errors.hpp"

namespace fmsos {

UnitVector UnitVector::normalized(Eigen::VectorXd v) {
  if (v.size() < 2) {
    throw DomainError("unit vector needs ambient dimension >= 2, got " + std::to_string(v.size()));
  }
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw DomainError("cannot normalize a zero or non-finite vector");
  }
  v /= n;
  return UnitVector(std::move(v));
}

UnitVector UnitVector::from_unit(Eigen::VectorXd v, double tol) {
  if (v.size() < 2) {
    throw DomainError("unit vector needs ambient dimension >= 2, got " + std::to_string(v.size()));
  }
  const double n = v.norm();
  if (!(std::abs(n - 1.0) <= tol)) {
    throw DomainError("vector norm " + std::to_string(n) + " is not within tolerance of 1");
  }
  v /= n;
  return UnitVector(std::move(v));
}

UnitVector UnitVector::basis(int ambient_dim, int index) {
  if (ambient_dim < 2 || index < 0 || index >= ambient_dim) {
    throw DomainError("invalid basis vector request");
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(ambient_dim);
  v[index] = 1.0;
  return UnitVector(std::move(v));
}

double UnitVector::dot(const UnitVector& other) const {
  check_same_dim(*this, other);
  return v_.dot(other.v_);
}

void check_same_dim(const UnitVector& a, const UnitVector& b) {
  if (a.dim() != b.dim()) {
    throw DomainError("dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                      std::to_string(b.dim()));
  }
}

TangentVector::TangentVector(UnitVector base, Eigen::VectorXd vec)
    : base_(std::move(base)), vec_(std::move(vec)) {
  if (vec_.size() != base_.dim()) {
    throw DomainError("tangent vector dimension does not match its base point");
  }
  if (std::abs(base_.coords().dot(vec_)) > 1e-10) {
    throw DomainError("vector is not tangent to its base point");
  }
}

TangentVector TangentVector::project(UnitVector base, const Eigen::VectorXd& v) {
  Eigen::VectorXd t = v - base.coords().dot(v) * base.coords();
  return TangentVector(std::move(base), std::move(t));
}

double clamped_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double d = a.dot(b);
  return d > 1.0 ? 1.0 : (d < -1.0 ? -1.0 : d);
}

double geodesic_distance(const UnitVector& a, const UnitVector& b) {
  check_same_dim(a, b);
  return chord_angle(a.coords(), b.coords());
}

double chord_angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  // acos loses about half the digits near 0 and pi; the chord form does not.
  return 2.0 * std::atan2((a - b).norm(), (a + b).norm());
}

double cost(const UnitVector& a, const UnitVector& b) {
  const double d = geodesic_distance(a, b);
  return 0.5 * d * d;
}

UnitVector exp_map(const TangentVector& t) {
  const double n = t.norm();
  if (n == 0.0) {
    return t.base();
  }
  Eigen::VectorXd out = std::cos(n) * t.base().coords() + (std::sin(n) / n) * t.vec();
  return UnitVector::normalized(std::move(out));
}

TangentVector log_map(const UnitVector& x, const UnitVector& y) {
  check_same_dim(x, y);
  const double d = x.coords().dot(y.coords());
  if (d <= -1.0 + 1e-12) {
    throw AntipodalError();
  }
  Eigen::VectorXd w = y.coords() - d * x.coords();
  const double wn = w.norm();
  if (wn == 0.0) {
    return TangentVector(x, Eigen::VectorXd::Zero(x.dim()));
  }
  // atan2 keeps accuracy for nearly identical points where acos loses digits.
  const double theta = std::atan2(wn, d);
  w *= theta / wn;
  // Remove the O(eps) normal component left by cancellation.
  w -= x.coords().dot(w) * x.coords();
  return TangentVector(x, std::move(w));
}

UnitVector sample_uniform_sphere(int p, Rng& rng) {
  if (p < 1) {
    throw DomainError("sphere dimension p must be >= 1");
  }
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(p + 1);
  for (;;) {
    for (int i = 0; i <= p; ++i) {
      v[i] = normal(rng);
    }
    if (v.squaredNorm() > 1e-300) {
      return UnitVector::normalized(v);
    }
  }
}

} // namespace fmsos
