// Small hypothesis-testing helpers shared by unit and acceptance tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace fmsos::testing {

/// Asymptotic Kolmogorov survival function P(K > x).
inline double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * x * x);
    sum += (j % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

/// One-sample KS p-value of `xs` against `cdf`.
inline double ks_pvalue(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const auto n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  const double sn = std::sqrt(n);
  return kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
}

/// Two-sample KS p-value.
inline double ks2_pvalue(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d);
}

/// Pearson chi-square goodness of fit; bins with expected count below `min_expected`
/// are pooled into their neighbour.
inline double chi_square_pvalue(const std::vector<double>& observed, const std::vector<double>& expected,
                                double min_expected = 5.0) {
  std::vector<double> o;
  std::vector<double> e;
  double acc_o = 0.0;
  double acc_e = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    acc_o += observed[i];
    acc_e += expected[i];
    if (acc_e >= min_expected) {
      o.push_back(acc_o);
      e.push_back(acc_e);
      acc_o = acc_e = 0.0;
    }
  }
  if (acc_e > 0.0 || acc_o > 0.0) {
    if (e.empty()) return 1.0;
    o.back() += acc_o;
    e.back() += acc_e;
  }
  if (e.size() < 2) return 1.0;
  double stat = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) stat += (o[i] - e[i]) * (o[i] - e[i]) / e[i];
  const boost::math::chi_squared dist(static_cast<double>(e.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

/// Chi-square test of homogeneity between two count vectors.
inline double chi_square_two_sample_pvalue(const std::vector<double>& a, const std::vector<double>& b,
                                            double min_expected = 5.0) {
  const double na = std::accumulate(a.begin(), a.end(), 0.0);
  const double nb = std::accumulate(b.begin(), b.end(), 0.0);
  // Pool sparse bins first, then compute the contingency statistic.
  std::vector<double> pa;
  std::vector<double> pb;
  double ca = 0.0;
  double cb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca += a[i];
    cb += b[i];
    const double tot = ca + cb;
    if (std::min(tot * na, tot * nb) / (na + nb) >= min_expected) {
      pa.push_back(ca);
      pb.push_back(cb);
      ca = cb = 0.0;
    }
  }
  if (ca + cb > 0.0 && !pa.empty()) {
    pa.back() += ca;
    pb.back() += cb;
  }
  if (pa.size() < 2) return 1.0;
  double stat = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double tot = pa[i] + pb[i];
    const double ea = tot * na / (na + nb);
    const double eb = tot * nb / (na + nb);
    stat += (pa[i] - ea) * (pa[i] - ea) / ea + (pb[i] - eb) * (pb[i] - eb) / eb;
  }
  const boost::math::chi_squared dist(static_cast<double>(pa.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
    i = j + 1;
  }
  return r;
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / static_cast<double>(ra.size());
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / static_cast<double>(rb.size());
  double num = 0.0;
  double da = 0.0;
  double db = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  return (da == 0.0 || db == 0.0) ? 0.0 : num / std::sqrt(da * db);
}

} // namespace fmsos::testing
