#include "fmsos/bessel.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "fmsos/errors.hpp"

namespace fmsos {
namespace {

constexpr double kSwitchKappa = 50.0;

// Power series sum_k (x/2)^{2k+nu} / (k! Gamma(k+nu+1)), accumulated in log space.
double log_bessel_i_series(double nu, double x) {
  const double log_half_x = std::log(0.5 * x);
  double max_term = -std::numeric_limits<double>::infinity();
  double acc = 0.0; // sum of exp(term - max_term)
  for (int k = 0; k < 100000; ++k) {
    const double term = (2.0 * k + nu) * log_half_x - std::lgamma(k + 1.0) - std::lgamma(k + nu + 1.0);
    if (term > max_term) {
      acc = acc * std::exp(max_term - term) + 1.0;
      max_term = term;
    } else {
      acc += std::exp(term - max_term);
    }
    // Terms are unimodal in k; stop once past the peak and negligible.
    if (k > 0.5 * x && term < max_term - 40.0) {
      break;
    }
  }
  return max_term + std::log(acc);
}

// Hankel asymptotic expansion e^x / sqrt(2 pi x) * sum_k (-1)^k a_k(nu) / x^k.
double log_bessel_i_asymptotic(double nu, double x) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (k * 8.0 * x);
    if (std::abs(next) >= std::abs(term)) {
      break; // series starts diverging
    }
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) {
      break;
    }
  }
  return x - 0.5 * std::log(2.0 * std::numbers::pi * x) + std::log(sum);
}

} // namespace

double log_bessel_i(double nu, double x) {
  if (!(x > 0.0)) {
    throw DomainError("log_bessel_i requires x > 0");
  }
  if (nu < 0.0) {
    throw DomainError("log_bessel_i requires nu >= 0");
  }
  if (x <= kSwitchKappa || x < nu * nu) {
    return log_bessel_i_series(nu, x);
  }
  return log_bessel_i_asymptotic(nu, x);
}

double bessel_ratio(int m, double kappa) {
  if (!(kappa > 0.0)) {
    throw DomainError("bessel_ratio requires kappa > 0");
  }
  if (m < 2) {
    throw DomainError("bessel_ratio requires ambient dimension m >= 2");
  }
  const double nu = 0.5 * m - 1.0;
  if (kappa <= kSwitchKappa) {
    return std::exp(log_bessel_i_series(nu + 1.0, kappa) - log_bessel_i_series(nu, kappa));
  }
  // I_{nu+1}/I_nu = 1 / (b_1 + 1 / (b_2 + ...)), b_j = 2 (nu + j) / kappa (modified Lentz).
  constexpr double tiny = 1e-300;
  double f = 2.0 * (nu + 1.0) / kappa;
  double c = f;
  double d = 0.0;
  for (int j = 2; j < 1000000; ++j) {
    const double b = 2.0 * (nu + j) / kappa;
    d = b + d;
    if (std::abs(d) < tiny) d = tiny;
    c = b + 1.0 / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) {
      break;
    }
  }
  return 1.0 / f;
}

} // namespace fmsos
