#include "fmsos/initialize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include "fmsos/bessel.hpp"
#include "fmsos/errors.hpp"

namespace fmsos {
namespace {

struct Candidate {
  Eigen::MatrixXd rotation;
  std::vector<double> psi;
  double score = -std::numeric_limits<double>::infinity();
};

std::vector<int> argmin_rows(const Eigen::MatrixXd& costs, const std::vector<double>& psi) {
  std::vector<int> out(static_cast<std::size_t>(costs.rows()));
  kernels::assign(costs, psi, out);
  return out;
}

// Bring potentials inside the box and the range bound; the assignment only sees differences.
void clamp_to_bounds(std::vector<double>& psi) {
  const double top = *std::max_element(psi.begin(), psi.end());
  const double floor = top - kMaxCost * (1.0 - 1e-9);
  for (double& v : psi) v = std::max(v, floor);
  const auto [lo, hi] = std::minmax_element(psi.begin(), psi.end());
  const double shift = 0.5 * (*lo + *hi);
  for (double& v : psi) v -= shift;
}

} // namespace

SphericalKMeans spherical_kmeans(const kernels::PointMatrix& points, std::size_t k, Rng& rng, std::size_t restarts,
                                 std::size_t iters) {
  const auto n = static_cast<std::size_t>(points.cols());
  if (k < 1 || k > n) throw DomainError("k-means needs 1 <= k <= number of points");
  SphericalKMeans best;
  best.objective = -std::numeric_limits<double>::infinity();
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t r = 0; r < std::max<std::size_t>(restarts, 1); ++r) {
    kernels::PointMatrix centers(points.rows(), static_cast<Eigen::Index>(k));
    centers.col(0) = points.col(static_cast<Eigen::Index>(pick(rng)));
    std::vector<double> dist(n);
    for (std::size_t j = 1; j < k; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        double d = std::numeric_limits<double>::infinity();
        for (std::size_t l = 0; l < j; ++l) {
          d = std::min(d, 1.0 - points.col(static_cast<Eigen::Index>(i)).dot(centers.col(static_cast<Eigen::Index>(l))));
        }
        dist[i] = std::max(d, 0.0);
      }
      std::discrete_distribution<std::size_t> draw(dist.begin(), dist.end());
      centers.col(static_cast<Eigen::Index>(j)) = points.col(static_cast<Eigen::Index>(draw(rng)));
    }
    std::vector<int> labels(n, -1);
    double objective = 0.0;
    for (std::size_t it = 0; it < iters; ++it) {
      const Eigen::MatrixXd sim = centers.transpose() * points; // k x n
      bool changed = false;
      objective = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        Eigen::Index best_j = 0;
        objective += sim.col(static_cast<Eigen::Index>(i)).maxCoeff(&best_j);
        if (labels[i] != static_cast<int>(best_j)) {
          labels[i] = static_cast<int>(best_j);
          changed = true;
        }
      }
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(points.rows(), static_cast<Eigen::Index>(k));
      for (std::size_t i = 0; i < n; ++i) sums.col(labels[i]) += points.col(static_cast<Eigen::Index>(i));
      for (Eigen::Index j = 0; j < sums.cols(); ++j) {
        if (sums.col(j).norm() > 0.0) centers.col(j) = sums.col(j).normalized();
      }
      if (!changed) break;
    }
    if (objective > best.objective) {
      best.centers = centers;
      best.labels = labels;
      best.objective = objective;
    }
  }
  return best;
}

std::vector<double> fit_potentials_to_labels(const Eigen::MatrixXd& costs, const std::vector<int>& labels,
                                             std::size_t k, std::size_t passes) {
  std::vector<double> psi(k, 0.0);
  std::vector<double> best = psi;
  std::size_t best_errors = std::numeric_limits<std::size_t>::max();
  for (std::size_t pass = 0; pass < passes; ++pass) {
    const double rate = 1.0 / (1.0 + 0.2 * static_cast<double>(pass));
    std::size_t errors = 0;
    for (Eigen::Index i = 0; i < costs.rows(); ++i) {
      Eigen::Index p = 0;
      double lowest = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < costs.cols(); ++j) {
        const double v = costs(i, j) - psi[static_cast<std::size_t>(j)];
        if (v < lowest) {
          lowest = v;
          p = j;
        }
      }
      const auto l = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
      if (static_cast<std::size_t>(p) == l) continue;
      ++errors;
      // Split the correction between the wanted and the winning cell.
      const double gap = costs(i, static_cast<Eigen::Index>(l)) - psi[l] - lowest;
      const double step = rate * 0.5 * gap + 1e-4;
      psi[l] += step;
      psi[static_cast<std::size_t>(p)] -= step;
    }
    if (errors < best_errors) {
      best_errors = errors;
      best = psi;
    }
    if (errors == 0) break;
  }
  return best;
}

double kappa_from_resultant(double rbar, int dim) {
  if (!(rbar > 0.0)) return 1e-6;
  if (rbar >= 1.0) return 1e6;
  double lo = std::log(1e-6);
  double hi = std::log(1e6);
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (bessel_ratio(dim, std::exp(mid)) < rbar) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::exp(0.5 * (lo + hi));
}

ModelState clustered_initial_state(const SamplerConfig& config, const ReferenceCloud& cloud, const Dataset& data,
                                   Rng& rng, const ClusteredInitOptions& options) {
  const std::size_t n = data.size();
  const int dim = data.dim();
  if (config.rotation_only || n < 2 * options.k_low) return initial_state(config, cloud, data, rng);

  std::optional<ModelState> best;
  double best_bic = -std::numeric_limits<double>::infinity();
  const std::size_t k_high = std::min({options.k_high, config.prior.k_max, n / 2});
  for (std::size_t k = options.k_low; k <= k_high; ++k) {
    const SphericalKMeans km = spherical_kmeans(data.y(), k, rng);
    std::vector<std::size_t> sizes(k, 0);
    for (int l : km.labels) ++sizes[static_cast<std::size_t>(l)];
    if (std::find(sizes.begin(), sizes.end(), std::size_t{0}) != sizes.end()) continue;

    Eigen::MatrixXd costs;
    auto evaluate = [&](const Eigen::MatrixXd& r) {
      Candidate c;
      c.rotation = r;
      const Eigen::MatrixXd atoms = r.transpose() * km.centers;
      kernels::cost_table(data.x(), atoms, costs);
      c.psi = fit_potentials_to_labels(costs, km.labels, k);
      const std::vector<int> assigned = argmin_rows(costs, c.psi);
      c.score = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        c.score += data.y().col(static_cast<Eigen::Index>(i)).dot(km.centers.col(assigned[i]));
      }
      return c;
    };

    Candidate top;
    for (std::size_t t = 0; t < options.rotation_candidates; ++t) {
      Candidate c = evaluate(sample_haar_rotation(dim - 1, rng).matrix());
      if (c.score > top.score) top = std::move(c);
    }
    double sigma = 0.3;
    const std::size_t stage = std::max<std::size_t>(options.refine_steps / 6, 1);
    for (std::size_t t = 0; t < options.refine_steps; ++t) {
      std::normal_distribution<double> normal(0.0, sigma);
      Eigen::VectorXd eps(skew_param_count(dim));
      for (Eigen::Index i = 0; i < eps.size(); ++i) eps[i] = normal(rng);
      const RotationMatrix base = RotationMatrix::from_matrix(top.rotation, 1e-8);
      Candidate c = evaluate(skew_exponential_step(base, eps).matrix());
      if (c.score > top.score) top = std::move(c);
      if ((t + 1) % stage == 0) sigma *= 0.6;
    }

    // Make the candidate a valid state: prior bounds, then drop atoms with empty cloud cells.
    std::vector<UnitVector> atoms;
    for (std::size_t j = 0; j < k; ++j) {
      atoms.push_back(UnitVector::normalized(top.rotation.transpose() * km.centers.col(static_cast<Eigen::Index>(j))));
    }
    std::vector<double> psi = top.psi;
    clamp_to_bounds(psi);
    for (;;) {
      TargetMeasure m(atoms, psi);
      const std::vector<std::size_t> counts = cell_counts(m, cloud);
      const auto empty = std::find(counts.begin(), counts.end(), std::size_t{0});
      if (empty == counts.end()) break;
      const auto j = static_cast<std::ptrdiff_t>(empty - counts.begin());
      atoms.erase(atoms.begin() + j);
      psi.erase(psi.begin() + j);
    }
    ModelState state{TargetMeasure(std::move(atoms), std::move(psi)),
                     RotationMatrix::from_matrix(top.rotation, 1e-8), 1.0};
    const kernels::PointMatrix means = predict_means(state, data.x());
    const double rbar = (means.array() * data.y().array()).sum() / static_cast<double>(n);
    state.kappa = std::clamp(kappa_from_resultant(rbar, dim), config.prior.kappa_init_low, 1e4);
    const double params = static_cast<double>(state.k()) * static_cast<double>(dim);
    const double bic = log_likelihood(state, data) - 0.5 * params * std::log(static_cast<double>(n));
    if (bic > best_bic) {
      best_bic = bic;
      best = std::move(state);
    }
  }
  if (!best) return initial_state(config, cloud, data, rng);
  return std::move(*best);
}

} // namespace fmsos
