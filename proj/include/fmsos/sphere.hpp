#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "fmsos/random.hpp"

namespace fmsos {

/// Largest value the half squared geodesic cost can take (antipodal pair).
inline constexpr double kMaxCost = std::numbers::pi * std::numbers::pi / 2.0;

/// A point on S^p, stored as a unit (p+1)-vector.
///
/// The only ways to build one normalize or check the norm, so every instance
/// satisfies | |v| - 1 | <= 1e-12 and has ambient dimension >= 2.
class UnitVector {
public:
  /// Normalizes `v`; throws DomainError on a zero vector or dimension < 2.
  static UnitVector normalized(Eigen::VectorXd v);
  /// Accepts a vector already within `tol` of unit norm and renormalizes it.
  static UnitVector from_unit(Eigen::VectorXd v, double tol = 1e-9);
  /// Standard basis vector e_{index} in R^{ambient_dim} (0-based index).
  static UnitVector basis(int ambient_dim, int index);

  int dim() const { return static_cast<int>(v_.size()); }
  int sphere_dim() const { return dim() - 1; }
  const Eigen::VectorXd& coords() const { return v_; }
  double operator[](int i) const { return v_[i]; }
  double dot(const UnitVector& other) const;
  UnitVector antipode() const { return UnitVector(-v_); }

  friend bool operator==(const UnitVector& a, const UnitVector& b) { return a.v_ == b.v_; }

private:
  explicit UnitVector(Eigen::VectorXd v) : v_(std::move(v)) {}
  Eigen::VectorXd v_;
};

/// Element of the tangent space T_base S^p.
class TangentVector {
public:
  /// Throws DomainError unless |base . vec| <= 1e-10 and dimensions agree.
  TangentVector(UnitVector base, Eigen::VectorXd vec);
  /// Orthogonal projection of an arbitrary ambient vector onto T_base.
  static TangentVector project(UnitVector base, const Eigen::VectorXd& v);

  const UnitVector& base() const { return base_; }
  const Eigen::VectorXd& vec() const { return vec_; }
  double norm() const { return vec_.norm(); }

private:
  UnitVector base_;
  Eigen::VectorXd vec_;
};

/// Inner product clamped to [-1, 1].
double clamped_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Angle between unit vectors via 2 atan2(|a - b|, |a + b|); exact zero for a == b.
double chord_angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Great-circle distance arccos(a . b), in [0, pi].
double geodesic_distance(const UnitVector& a, const UnitVector& b);

/// Transport cost d(a, b)^2 / 2.
double cost(const UnitVector& a, const UnitVector& b);

/// Cost as a function of a (clamped) inner product; the hot path used by the kernels.
inline double cost_from_dot(double dot) {
  const double c = dot > 1.0 ? 1.0 : (dot < -1.0 ? -1.0 : dot);
  const double theta = std::acos(c);
  return 0.5 * theta * theta;
}

UnitVector exp_map(const TangentVector& t);

/// Inverse of exp_map; throws AntipodalError when x . y <= -1 + 1e-12.
TangentVector log_map(const UnitVector& x, const UnitVector& y);

/// Uniform draw on S^p (normalized standard Gaussian).
UnitVector sample_uniform_sphere(int p, Rng& rng);

void check_same_dim(const UnitVector& a, const UnitVector& b);

} // namespace fmsos
