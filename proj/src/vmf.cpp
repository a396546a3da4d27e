#include "fmsos/vmf.hpp"

#include <cmath>
#include <numbers>

#include "fmsos/bessel.hpp"
#include "fmsos/errors.hpp"

namespace fmsos {

VmfParams::VmfParams(UnitVector mean_direction, double kappa)
    : mean_(std::move(mean_direction)), kappa_(kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw DomainError("vMF concentration must be positive and finite");
  }
}

double vmf_log_normalizer(int m, double kappa) {
  if (!(kappa > 0.0)) {
    throw DomainError("vMF concentration must be positive");
  }
  const double nu = 0.5 * m - 1.0;
  return nu * std::log(kappa) - 0.5 * m * std::log(2.0 * std::numbers::pi) - log_bessel_i(nu, kappa);
}

double vmf_log_density(const UnitVector& y, const VmfParams& params) {
  const UnitVector& mu = params.mean_direction();
  check_same_dim(y, mu);
  return vmf_log_normalizer(y.dim(), params.kappa()) + params.kappa() * mu.coords().dot(y.coords());
}

Eigen::MatrixXd reflection_from_e1(const UnitVector& target) {
  const int m = target.dim();
  Eigen::VectorXd u = -target.coords();
  u[0] += 1.0;
  const double un2 = u.squaredNorm();
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(m, m);
  if (un2 > 1e-30) {
    h -= (2.0 / un2) * u * u.transpose();
  }
  return h;
}

UnitVector vmf_sample(const VmfParams& params, Rng& rng) {
  const int m = params.mean_direction().dim();
  const double kappa = params.kappa();
  const double dm1 = m - 1.0;

  // b = (-2k + sqrt(4k^2 + (m-1)^2)) / (m-1), written without cancellation.
  const double b = dm1 / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + dm1 * dm1));
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + dm1 * std::log(1.0 - x0 * x0);

  std::gamma_distribution<double> gamma(0.5 * dm1, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double w = 0.0;
  for (;;) {
    const double g1 = gamma(rng);
    const double g2 = gamma(rng);
    const double z = g1 / (g1 + g2);
    w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
    const double u = unif(rng);
    if (kappa * w + dm1 * std::log(1.0 - x0 * w) - c >= std::log(u)) {
      break;
    }
  }

  Eigen::VectorXd local(m);
  local[0] = w;
  const double r = std::sqrt(std::max(0.0, 1.0 - w * w));
  if (m == 2) {
    local[1] = (unif(rng) < 0.5 ? -r : r);
  } else {
    std::normal_distribution<double> normal;
    Eigen::VectorXd v(m - 1);
    double vn = 0.0;
    do {
      for (int i = 0; i < m - 1; ++i) v[i] = normal(rng);
      vn = v.norm();
    } while (vn < 1e-300);
    local.tail(m - 1) = (r / vn) * v;
  }
  return UnitVector::normalized(reflection_from_e1(params.mean_direction()) * local);
}

} // namespace fmsos
