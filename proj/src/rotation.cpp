#include "fmsos/rotation.hpp"

#include <cmath>
#include <string>

#include "fmsos/errors.hpp"

namespace fmsos {
namespace {

// Nearest rotation in Frobenius norm (polar factor); removes accumulated drift.
Eigen::MatrixXd project_to_so(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::MatrixXd u = svd.matrixU();
  const Eigen::MatrixXd& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) {
    u.col(u.cols() - 1) *= -1.0;
  }
  return u * v.transpose();
}

} // namespace

RotationMatrix RotationMatrix::identity(int dim) {
  if (dim < 2) {
    throw DomainError("rotation dimension must be >= 2");
  }
  return RotationMatrix(Eigen::MatrixXd::Identity(dim, dim));
}

RotationMatrix RotationMatrix::from_matrix(Eigen::MatrixXd m, double tol) {
  if (m.rows() != m.cols() || m.rows() < 2) {
    throw DomainError("rotation must be a square matrix of size >= 2");
  }
  const Eigen::MatrixXd gram = m.transpose() * m;
  const double orth_err = (gram - Eigen::MatrixXd::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
  if (!(orth_err <= tol)) {
    throw DomainError("matrix is not orthogonal (max |R^T R - I| = " + std::to_string(orth_err) + ")");
  }
  if (!(std::abs(m.determinant() - 1.0) <= tol)) {
    throw DomainError("matrix does not have determinant +1");
  }
  return RotationMatrix(std::move(m));
}

RotationMatrix RotationMatrix::plane_rotation(int dim, int i, int j, double theta) {
  if (i == j || i < 0 || j < 0 || i >= dim || j >= dim) {
    throw DomainError("invalid rotation plane");
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(dim, dim);
  m(i, i) = std::cos(theta);
  m(j, j) = std::cos(theta);
  m(j, i) = std::sin(theta);
  m(i, j) = -std::sin(theta);
  return RotationMatrix(std::move(m));
}

UnitVector RotationMatrix::apply(const UnitVector& x) const {
  if (x.dim() != dim()) {
    throw DomainError("rotation/vector dimension mismatch");
  }
  return UnitVector::normalized(m_ * x.coords());
}

RotationMatrix RotationMatrix::operator*(const RotationMatrix& other) const {
  if (other.dim() != dim()) {
    throw DomainError("rotation dimension mismatch");
  }
  return RotationMatrix(m_ * other.m_);
}

Eigen::MatrixXd skew_from_vector(const Eigen::VectorXd& eps, int dim) {
  if (eps.size() != skew_param_count(dim)) {
    throw DomainError("skew parameter vector has length " + std::to_string(eps.size()) +
                      ", expected " + std::to_string(skew_param_count(dim)));
  }
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(dim, dim);
  if (dim == 3) {
    omega(0, 1) = -eps[2];
    omega(0, 2) = eps[1];
    omega(1, 0) = eps[2];
    omega(1, 2) = -eps[0];
    omega(2, 0) = -eps[1];
    omega(2, 1) = eps[0];
    return omega;
  }
  int idx = 0;
  for (int i = 1; i < dim; ++i) {
    for (int j = 0; j < i; ++j) {
      omega(i, j) = eps[idx];
      omega(j, i) = -eps[idx];
      ++idx;
    }
  }
  return omega;
}

Eigen::MatrixXd expm_skew(const Eigen::MatrixXd& omega) {
  const Eigen::Index n = omega.rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  if (n == 3) {
    const Eigen::Vector3d w(omega(2, 1), omega(0, 2), omega(1, 0));
    const double theta = w.norm();
    if (theta < 1e-12) {
      return id + omega;
    }
    const Eigen::MatrixXd k = omega / theta;
    return id + std::sin(theta) * k + (1.0 - std::cos(theta)) * (k * k);
  }

  // Pade(6) coefficients c_k = (2q-k)! q! / ((2q)! k! (q-k)!), q = 6.
  static constexpr double c[7] = {1.0,
                                  1.0 / 2.0,
                                  5.0 / 44.0,
                                  1.0 / 66.0,
                                  1.0 / 792.0,
                                  1.0 / 15840.0,
                                  1.0 / 665280.0};
  const double norm = omega.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  }
  const Eigen::MatrixXd a = omega / std::ldexp(1.0, squarings);
  Eigen::MatrixXd num = c[0] * id;
  Eigen::MatrixXd den = c[0] * id;
  Eigen::MatrixXd power = id;
  for (int k = 1; k <= 6; ++k) {
    power = power * a;
    num += c[k] * power;
    den += ((k % 2 == 0) ? c[k] : -c[k]) * power;
  }
  Eigen::MatrixXd result = den.partialPivLu().solve(num);
  for (int s = 0; s < squarings; ++s) {
    result = result * result;
  }
  return result;
}

RotationMatrix skew_exponential_step(const RotationMatrix& r, const Eigen::VectorXd& eps) {
  const Eigen::MatrixXd step = expm_skew(skew_from_vector(eps, r.dim()));
  return RotationMatrix::from_matrix(project_to_so(step * r.matrix()));
}

RotationMatrix sample_haar_rotation(int p, Rng& rng) {
  if (p < 1) {
    throw DomainError("sphere dimension p must be >= 1");
  }
  const int n = p + 1;
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      g(i, j) = normal(rng);
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd rr = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i) {
    if (rr(i, i) < 0.0) {
      q.col(i) *= -1.0;
    }
  }
  if (q.determinant() < 0.0) {
    q.col(0) *= -1.0;
  }
  return RotationMatrix::from_matrix(std::move(q));
}

} // namespace fmsos
