#include "fmsos/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fmsos/errors.hpp"
#include "fmsos/vmf.hpp"

namespace fmsos {

void PriorConfig::validate() const {
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (p < 1) throw ConfigError("p must be >= 1");
  if (cloud_size < 1) throw ConfigError("cloud_size must be >= 1");
  if (k_max < 1) throw ConfigError("k_max must be >= 1");
  if (rejection_budget < 1) throw ConfigError("rejection_budget must be >= 1");
  if (!(kappa_init_low > 0.0) || !(kappa_init_high > kappa_init_low)) {
    throw ConfigError("kappa initialization range must satisfy 0 < low < high");
  }
}

Dataset::Dataset(kernels::PointMatrix x, kernels::PointMatrix y) : x_(std::move(x)), y_(std::move(y)) {
  if (x_.rows() != y_.rows() || x_.cols() != y_.cols()) {
    throw DomainError("covariates and responses differ in shape");
  }
  if (x_.rows() < 2) {
    throw DomainError("dataset ambient dimension must be >= 2");
  }
  for (Eigen::Index i = 0; i < x_.cols(); ++i) {
    if (std::abs(x_.col(i).norm() - 1.0) > 1e-12 || std::abs(y_.col(i).norm() - 1.0) > 1e-12) {
      throw DomainError("dataset row " + std::to_string(i) + " is not a pair of unit vectors");
    }
  }
}

Dataset Dataset::empty(int ambient_dim) {
  return Dataset(kernels::PointMatrix(ambient_dim, 0), kernels::PointMatrix(ambient_dim, 0));
}

UnitVector Dataset::x(std::size_t i) const {
  return UnitVector::from_unit(x_.col(static_cast<Eigen::Index>(i)), 1e-12);
}

UnitVector Dataset::y(std::size_t i) const {
  return UnitVector::from_unit(y_.col(static_cast<Eigen::Index>(i)), 1e-12);
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  kernels::PointMatrix xs(dim(), static_cast<Eigen::Index>(indices.size()));
  kernels::PointMatrix ys(dim(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t r = 0; r < indices.size(); ++r) {
    xs.col(static_cast<Eigen::Index>(r)) = x_.col(static_cast<Eigen::Index>(indices[r]));
    ys.col(static_cast<Eigen::Index>(r)) = y_.col(static_cast<Eigen::Index>(indices[r]));
  }
  return Dataset(std::move(xs), std::move(ys));
}

Dataset Dataset::concatenated(const Dataset& other) const {
  if (other.dim() != dim()) {
    throw DomainError("cannot concatenate datasets of different dimension");
  }
  kernels::PointMatrix xs(dim(), x_.cols() + other.x_.cols());
  kernels::PointMatrix ys(dim(), x_.cols() + other.x_.cols());
  xs << x_, other.x_;
  ys << y_, other.y_;
  return Dataset(std::move(xs), std::move(ys));
}

double log_prior_k(std::size_t k, double lambda, std::size_t k_max) {
  if (k < 1 || k > k_max) {
    return -std::numeric_limits<double>::infinity();
  }
  auto log_pois = [lambda](std::size_t j) {
    return static_cast<double>(j) * std::log(lambda) - lambda - std::lgamma(static_cast<double>(j) + 1.0);
  };
  // Normalizer over the admissible support {1, ..., k_max}.
  double max_term = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j <= k_max; ++j) max_term = std::max(max_term, log_pois(j));
  double acc = 0.0;
  for (std::size_t j = 1; j <= k_max; ++j) acc += std::exp(log_pois(j) - max_term);
  return log_pois(k) - (max_term + std::log(acc));
}

UnitVector regression_map_eval(const ModelState& state, const UnitVector& x) {
  if (!state.measure) {
    return state.rotation.apply(x);
  }
  return state.rotation.apply(state.measure->atom(transport_map_eval(*state.measure, x)));
}

kernels::PointMatrix predict_means(const ModelState& state, const kernels::PointMatrix& points) {
  const Eigen::MatrixXd& r = state.rotation.matrix();
  if (!state.measure) {
    return r * points;
  }
  const std::vector<int> labels = assign_points(*state.measure, points);
  const Eigen::MatrixXd rotated_atoms = r * state.measure->atom_matrix();
  kernels::PointMatrix out(points.rows(), points.cols());
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    out.col(i) = rotated_atoms.col(labels[static_cast<std::size_t>(i)]);
  }
  return out;
}

double log_likelihood(const ModelState& state, const Dataset& data) {
  if (data.size() == 0) {
    return 0.0;
  }
  if (data.dim() != state.dim()) {
    throw DomainError("dataset and model dimensions differ");
  }
  const kernels::PointMatrix means = predict_means(state, data.x());
  const double inner = (means.array() * data.y().array()).sum();
  return static_cast<double>(data.size()) * vmf_log_normalizer(data.dim(), state.kappa) + state.kappa * inner;
}

namespace {

std::size_t sample_k(const PriorConfig& config, Rng& rng) {
  std::poisson_distribution<std::size_t> pois(config.lambda);
  for (;;) {
    const std::size_t k = pois(rng);
    if (k >= 1 && k <= config.k_max) return k;
  }
}

double sample_initial_kappa(const PriorConfig& config, Rng& rng) {
  std::uniform_real_distribution<double> u(config.kappa_init_low, config.kappa_init_high);
  return u(rng);
}

} // namespace

ModelState sample_prior_dual(const PriorConfig& config, const ReferenceCloud& cloud, Rng& rng,
                             std::optional<std::size_t> fixed_k) {
  config.validate();
  if (cloud.dim() != config.p + 1) {
    throw DomainError("reference cloud dimension does not match p");
  }
  if (fixed_k && (*fixed_k < 1 || *fixed_k > config.k_max)) {
    throw DomainError("fixed k must lie in [1, k_max]");
  }
  std::uniform_real_distribution<double> box(-kMaxCost, kMaxCost);
  Eigen::MatrixXd costs;
  std::vector<int> labels(cloud.size());
  for (std::size_t attempt = 0; attempt < config.rejection_budget; ++attempt) {
    const std::size_t k = fixed_k ? *fixed_k : sample_k(config, rng);
    std::vector<UnitVector> atoms;
    std::vector<double> psi;
    atoms.reserve(k);
    for (std::size_t j = 0; j < k; ++j) atoms.push_back(sample_uniform_sphere(config.p, rng));
    for (std::size_t j = 0; j < k; ++j) psi.push_back(box(rng));
    const auto [lo, hi] = std::minmax_element(psi.begin(), psi.end());
    if (*hi - *lo > kMaxCost) {
      continue; // some cell is provably empty
    }
    TargetMeasure measure(std::move(atoms), std::move(psi));
    kernels::cost_table(cloud.points(), measure.atom_matrix(), costs);
    kernels::assign(costs, measure.psi(), labels);
    const auto counts = kernels::count_labels(labels, k);
    if (std::any_of(counts.begin(), counts.end(), [](std::size_t c) { return c == 0; })) {
      continue;
    }
    RotationMatrix rotation = sample_haar_rotation(config.p, rng);
    return ModelState{std::move(measure), std::move(rotation), sample_initial_kappa(config, rng)};
  }
  throw RejectionBudgetExceeded("no feasible prior draw after " + std::to_string(config.rejection_budget) +
                                " attempts");
}

DirectPriorDraw sample_prior_direct(const PriorConfig& config, std::size_t k, double alpha,
                                    const ReferenceCloud& cloud, Rng& rng, const DualSolveOptions& options) {
  config.validate();
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("Dirichlet parameter must lie in (0, 1)");
  }
  if (k < 1) {
    throw DomainError("k must be >= 1");
  }
  std::vector<UnitVector> atoms;
  for (std::size_t j = 0; j < k; ++j) atoms.push_back(sample_uniform_sphere(config.p, rng));

  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> weights(k);
  double total = 0.0;
  do {
    total = 0.0;
    for (double& w : weights) {
      w = gamma(rng);
      total += w;
    }
  } while (!(total > 0.0) ||
           std::any_of(weights.begin(), weights.end(), [](double w) { return !(w > 0.0); }));
  for (double& w : weights) w /= total;

  std::vector<double> psi = solve_dual_potentials(atoms, weights, cloud, options);

  // Weights below the cloud resolution can leave a cell empty; lift such a potential
  // just past its lower bound so the cell captures its best cloud point.
  Eigen::MatrixXd costs;
  kernels::cost_table(cloud.points(), TargetMeasure(atoms, psi).atom_matrix(), costs);
  std::vector<int> labels(cloud.size());
  for (std::size_t round = 0; round <= k; ++round) {
    kernels::assign(costs, psi, labels);
    const auto counts = kernels::count_labels(labels, k);
    const auto empty = std::find(counts.begin(), counts.end(), std::size_t{0});
    if (empty == counts.end()) {
      TargetMeasure measure(std::move(atoms), std::move(psi));
      RotationMatrix rotation = sample_haar_rotation(config.p, rng);
      return {ModelState{std::move(measure), std::move(rotation), sample_initial_kappa(config, rng)},
              std::move(weights)};
    }
    const auto j = static_cast<std::size_t>(empty - counts.begin());
    const kernels::HoldOutScan scan = kernels::hold_out_scan(costs, psi, static_cast<int>(j));
    psi[j] = scan.min_gap + 1e-12 * std::max(1.0, std::abs(scan.min_gap));
  }
  throw NotConverged("could not make every Laguerre cell nonempty for the drawn weights");
}

Dataset simulate_dataset(const ModelState& state, std::size_t n, Rng& rng) {
  const int p = state.dim() - 1;
  kernels::PointMatrix xs(p + 1, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    xs.col(static_cast<Eigen::Index>(i)) = sample_uniform_sphere(p, rng).coords();
  }
  const kernels::PointMatrix means = predict_means(state, xs);
  kernels::PointMatrix ys(p + 1, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    const VmfParams params(UnitVector::normalized(means.col(col)), state.kappa);
    ys.col(col) = vmf_sample(params, rng).coords();
  }
  return Dataset(std::move(xs), std::move(ys));
}

void validate_state(const ModelState& state, const ReferenceCloud& cloud) {
  if (!(state.kappa > 0.0) || !std::isfinite(state.kappa)) {
    throw DomainError("kappa must be positive and finite");
  }
  if (!state.measure) {
    return;
  }
  if (state.measure->dim() != state.dim()) {
    throw DomainError("measure and rotation dimensions differ");
  }
  if (!state.measure->within_potential_bounds()) {
    throw DomainError("dual potentials violate the prior bounds");
  }
  if (!is_feasible(*state.measure, cloud)) {
    throw DomainError("target measure has an empty Laguerre cell");
  }
}

} // namespace fmsos
