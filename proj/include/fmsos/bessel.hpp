#pragma once

namespace fmsos {

/// log I_nu(x) for nu >= 0, x > 0, without overflow for large x.
double log_bessel_i(double nu, double x);

/// Mean resultant ratio A_m(kappa) = I_{m/2}(kappa) / I_{m/2-1}(kappa) of a vMF
/// distribution on the unit sphere in R^m (m = p + 1 is the ambient dimension).
///
/// Series in log space for kappa <= 50, Lentz continued fraction above that.
/// Throws DomainError for kappa <= 0 or m < 2.
double bessel_ratio(int m, double kappa);

} // namespace fmsos
