#pragma once

#include <Eigen/Dense>

#include "fmsos/random.hpp"
#include "fmsos/sphere.hpp"

namespace fmsos {

/// Element of SO(p+1). Construction checks R^T R = I and det R = +1 to 1e-10.
class RotationMatrix {
public:
  static RotationMatrix identity(int dim);
  static RotationMatrix from_matrix(Eigen::MatrixXd m, double tol = 1e-10);
  /// Rotation by `theta` in the (i, j) coordinate plane, taking e_i towards e_j.
  static RotationMatrix plane_rotation(int dim, int i, int j, double theta);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& matrix() const { return m_; }

  UnitVector apply(const UnitVector& x) const;
  RotationMatrix transpose() const { return RotationMatrix(m_.transpose()); }
  RotationMatrix operator*(const RotationMatrix& other) const;

private:
  explicit RotationMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {}
  Eigen::MatrixXd m_;
};

/// Number of free parameters of a skew-symmetric dim x dim matrix.
constexpr int skew_param_count(int dim) { return dim * (dim - 1) / 2; }

/// Omega(eps). For dim 3 this is the hat map
///   [[0, -e3, e2], [e3, 0, -e1], [-e2, e1, 0]];
/// otherwise eps fills the strictly lower triangle row by row
/// ((1,0), (2,0), (2,1), (3,0), ...) and the upper triangle is its negation.
Eigen::MatrixXd skew_from_vector(const Eigen::VectorXd& eps, int dim);

/// exp of a skew-symmetric matrix: Rodrigues for 3x3, scaling-and-squaring Pade(6) otherwise.
Eigen::MatrixXd expm_skew(const Eigen::MatrixXd& omega);

/// exp(Omega(eps)) * R, re-projected onto SO(p+1).
RotationMatrix skew_exponential_step(const RotationMatrix& r, const Eigen::VectorXd& eps);

/// Haar draw on SO(p+1): QR of a Gaussian matrix with sign and determinant fixes.
RotationMatrix sample_haar_rotation(int p, Rng& rng);

} // namespace fmsos
