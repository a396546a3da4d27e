#pragma once

#include "fmsos/random.hpp"
#include "fmsos/sphere.hpp"

namespace fmsos {

/// von Mises-Fisher parameters; construction rejects kappa <= 0.
class VmfParams {
public:
  VmfParams(UnitVector mean_direction, double kappa);

  const UnitVector& mean_direction() const { return mean_; }
  double kappa() const { return kappa_; }

private:
  UnitVector mean_;
  double kappa_;
};

/// log C_m(kappa) = log[kappa^{m/2-1} / ((2 pi)^{m/2} I_{m/2-1}(kappa))], m the ambient dimension.
double vmf_log_normalizer(int m, double kappa);

double vmf_log_density(const UnitVector& y, const VmfParams& params);

/// Wood's rejection sampler (beta-distributed radial envelope, tangent-normal split).
UnitVector vmf_sample(const VmfParams& params, Rng& rng);

/// Householder reflection taking e_1 to `target`; used to place samples drawn around e_1.
Eigen::MatrixXd reflection_from_e1(const UnitVector& target);

} // namespace fmsos
