#include "fmsos/semidiscrete_ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fmsos/errors.hpp"

namespace fmsos {

TargetMeasure::TargetMeasure(std::vector<UnitVector> atoms, std::vector<double> psi)
    : atoms_(std::move(atoms)), psi_(std::move(psi)) {
  if (atoms_.empty()) {
    throw DomainError("target measure needs at least one atom");
  }
  if (atoms_.size() != psi_.size()) {
    throw DomainError("atoms and potentials differ in length");
  }
  for (std::size_t j = 0; j < atoms_.size(); ++j) {
    check_same_dim(atoms_[0], atoms_[j]);
    if (!std::isfinite(psi_[j])) {
      throw DomainError("dual potential must be finite");
    }
    for (std::size_t l = 0; l < j; ++l) {
      if (geodesic_distance(atoms_[j], atoms_[l]) <= 1e-9) {
        throw DomainError("atoms " + std::to_string(l) + " and " + std::to_string(j) + " coincide");
      }
    }
  }
}

kernels::PointMatrix TargetMeasure::atom_matrix() const {
  kernels::PointMatrix m(dim(), static_cast<Eigen::Index>(size()));
  for (std::size_t j = 0; j < size(); ++j) {
    m.col(static_cast<Eigen::Index>(j)) = atoms_[j].coords();
  }
  return m;
}

bool TargetMeasure::within_potential_bounds(double tol) const {
  const auto [lo, hi] = std::minmax_element(psi_.begin(), psi_.end());
  return *lo >= -kMaxCost - tol && *hi <= kMaxCost + tol && (*hi - *lo) <= kMaxCost + tol;
}

TargetMeasure TargetMeasure::with_psi(std::size_t j, double value) const {
  std::vector<double> psi = psi_;
  psi.at(j) = value;
  return TargetMeasure(atoms_, std::move(psi));
}

TargetMeasure TargetMeasure::with_atom(std::size_t j, UnitVector z) const {
  std::vector<UnitVector> atoms = atoms_;
  atoms.at(j) = std::move(z);
  return TargetMeasure(std::move(atoms), psi_);
}

TargetMeasure TargetMeasure::with_added(UnitVector z, double psi) const {
  std::vector<UnitVector> atoms = atoms_;
  std::vector<double> ps = psi_;
  atoms.push_back(std::move(z));
  ps.push_back(psi);
  return TargetMeasure(std::move(atoms), std::move(ps));
}

TargetMeasure TargetMeasure::without(std::size_t j) const {
  if (size() < 2) {
    throw DomainError("cannot remove the last atom of a measure");
  }
  std::vector<UnitVector> atoms = atoms_;
  std::vector<double> ps = psi_;
  atoms.erase(atoms.begin() + static_cast<std::ptrdiff_t>(j));
  ps.erase(ps.begin() + static_cast<std::ptrdiff_t>(j));
  return TargetMeasure(std::move(atoms), std::move(ps));
}

TargetMeasure TargetMeasure::shifted(double c) const {
  std::vector<double> ps = psi_;
  for (double& v : ps) v += c;
  return TargetMeasure(atoms_, std::move(ps));
}

ReferenceCloud::ReferenceCloud(kernels::PointMatrix points, std::uint64_t seed)
    : points_(std::move(points)), seed_(seed) {
  if (points_.cols() < 1 || points_.rows() < 2) {
    throw DomainError("reference cloud needs at least one point in dimension >= 2");
  }
  for (Eigen::Index i = 0; i < points_.cols(); ++i) {
    if (std::abs(points_.col(i).norm() - 1.0) > 1e-12) {
      throw DomainError("reference cloud point " + std::to_string(i) + " is not a unit vector");
    }
  }
}

ReferenceCloud ReferenceCloud::sample(int p, std::size_t m, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  kernels::PointMatrix pts(p + 1, static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    pts.col(static_cast<Eigen::Index>(i)) = sample_uniform_sphere(p, rng).coords();
  }
  return ReferenceCloud(std::move(pts), seed);
}

std::size_t transport_map_eval(const TargetMeasure& measure, const UnitVector& x) {
  std::size_t best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < measure.size(); ++j) {
    const double v = cost(x, measure.atom(j)) - measure.psi(j);
    if (v < best_val) {
      best_val = v;
      best = j;
    }
  }
  return best;
}

std::size_t voronoi_assign(std::span<const UnitVector> atoms, const UnitVector& x) {
  if (atoms.empty()) {
    throw DomainError("voronoi_assign needs at least one atom");
  }
  std::size_t best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    const double v = cost(x, atoms[j]);
    if (v < best_val) {
      best_val = v;
      best = j;
    }
  }
  return best;
}

std::vector<int> assign_points(const TargetMeasure& measure, const kernels::PointMatrix& points,
                               kernels::Exec exec) {
  Eigen::MatrixXd costs;
  kernels::cost_table(points, measure.atom_matrix(), costs, exec);
  std::vector<int> labels(static_cast<std::size_t>(points.cols()));
  kernels::assign(costs, measure.psi(), labels, exec);
  return labels;
}

std::vector<std::size_t> cell_counts(const TargetMeasure& measure, const ReferenceCloud& cloud,
                                     kernels::Exec exec) {
  if (cloud.dim() != measure.dim()) {
    throw DomainError("cloud and measure live on spheres of different dimension");
  }
  const std::vector<int> labels = assign_points(measure, cloud.points(), exec);
  return kernels::count_labels(labels, measure.size());
}

std::vector<double> cell_mass_estimate(const TargetMeasure& measure, const ReferenceCloud& cloud,
                                       kernels::Exec exec) {
  const auto counts = cell_counts(measure, cloud, exec);
  std::vector<double> mass(counts.size());
  const double m = static_cast<double>(cloud.size());
  for (std::size_t j = 0; j < counts.size(); ++j) {
    mass[j] = static_cast<double>(counts[j]) / m;
  }
  return mass;
}

bool is_feasible(const TargetMeasure& measure, const ReferenceCloud& cloud, kernels::Exec exec) {
  const auto counts = cell_counts(measure, cloud, exec);
  return std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
}

FeasibleInterval conditional_feasible_bounds(const Eigen::MatrixXd& costs, std::span<const double> psi,
                                             std::size_t j, kernels::Exec exec) {
  const auto k = static_cast<std::size_t>(costs.cols());
  if (j >= k) {
    throw DomainError("atom index out of range");
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (k == 1) {
    return {-inf, inf};
  }
  const kernels::HoldOutScan scan = kernels::hold_out_scan(costs, psi, static_cast<int>(j), exec);
  double upper = inf;
  for (std::size_t l = 0; l < k; ++l) {
    if (l == j) continue;
    // An empty U_l makes the max over it -inf: no value of psi_j rescues cell l.
    upper = std::min(upper, scan.max_gap_by_cell[l]);
  }
  const FeasibleInterval out{scan.min_gap, upper};
  if (!(out.lower < out.upper)) {
    throw EmptyInterval(out.lower, out.upper);
  }
  return out;
}

FeasibleInterval conditional_feasible_interval(const Eigen::MatrixXd& costs, std::span<const double> psi,
                                               std::size_t j, kernels::Exec exec) {
  const FeasibleInterval raw = conditional_feasible_bounds(costs, psi, j, exec);
  const FeasibleInterval boxed{std::max(raw.lower, -kMaxCost), std::min(raw.upper, kMaxCost)};
  if (!(boxed.lower < boxed.upper)) {
    throw EmptyInterval(boxed.lower, boxed.upper);
  }
  return boxed;
}

FeasibleInterval conditional_feasible_bounds(const TargetMeasure& measure, std::size_t j,
                                             const ReferenceCloud& cloud) {
  Eigen::MatrixXd costs;
  kernels::cost_table(cloud.points(), measure.atom_matrix(), costs);
  return conditional_feasible_bounds(costs, measure.psi(), j);
}

FeasibleInterval conditional_feasible_interval(const TargetMeasure& measure, std::size_t j,
                                               const ReferenceCloud& cloud) {
  Eigen::MatrixXd costs;
  kernels::cost_table(cloud.points(), measure.atom_matrix(), costs);
  return conditional_feasible_interval(costs, measure.psi(), j);
}

namespace {

void check_probs(std::span<const double> probs, std::size_t k) {
  if (probs.size() != k) {
    throw DomainError("target probabilities and atoms differ in length");
  }
  double sum = 0.0;
  for (double v : probs) {
    if (!(v > 0.0)) {
      throw DomainError("target probabilities must be positive");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw DomainError("target probabilities must sum to 1");
  }
}

kernels::PointMatrix pack(std::span<const UnitVector> atoms) {
  kernels::PointMatrix m(atoms.front().dim(), static_cast<Eigen::Index>(atoms.size()));
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    m.col(static_cast<Eigen::Index>(j)) = atoms[j].coords();
  }
  return m;
}

// Phi on a precomputed cost table; also fills the cell counts at psi.
double objective_from_costs(const Eigen::MatrixXd& costs, std::span<const double> psi,
                            std::span<const double> probs, std::vector<std::size_t>& counts) {
  const Eigen::Index m = costs.rows();
  const Eigen::Index k = costs.cols();
  counts.assign(static_cast<std::size_t>(k), 0);
  double integral = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::Index best = 0;
    double best_val = costs(i, 0) - psi[0];
    for (Eigen::Index j = 1; j < k; ++j) {
      const double v = costs(i, j) - psi[j];
      if (v < best_val) {
        best_val = v;
        best = j;
      }
    }
    integral += best_val;
    ++counts[static_cast<std::size_t>(best)];
  }
  double linear = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    linear += psi[j] * probs[j];
  }
  return integral / static_cast<double>(m) + linear;
}

} // namespace

double dual_objective(std::span<const UnitVector> atoms, std::span<const double> psi,
                      std::span<const double> target_probs, const ReferenceCloud& cloud) {
  if (atoms.empty() || psi.size() != atoms.size()) {
    throw DomainError("atoms and potentials differ in length");
  }
  check_probs(target_probs, atoms.size());
  Eigen::MatrixXd costs;
  kernels::cost_table(cloud.points(), pack(atoms), costs);
  std::vector<std::size_t> counts;
  return objective_from_costs(costs, psi, target_probs, counts);
}

std::vector<double> solve_dual_potentials(std::span<const UnitVector> atoms, std::span<const double> target_probs,
                                          const ReferenceCloud& cloud, const DualSolveOptions& options) {
  if (atoms.empty()) {
    throw DomainError("solve_dual_potentials needs at least one atom");
  }
  const std::size_t k = atoms.size();
  check_probs(target_probs, k);
  Eigen::MatrixXd costs;
  kernels::cost_table(cloud.points(), pack(atoms), costs);
  const double m = static_cast<double>(cloud.size());

  std::vector<double> psi(k, 0.0);
  std::vector<std::size_t> counts;
  double phi = objective_from_costs(costs, psi, target_probs, counts);
  double step = options.initial_step;

  auto max_residual = [&](const std::vector<std::size_t>& c) {
    double r = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      r = std::max(r, std::abs(static_cast<double>(c[j]) / m - target_probs[j]));
    }
    return r;
  };

  std::vector<double> trial(k);
  std::vector<std::size_t> trial_counts;
  for (int iter = 0; iter < options.max_iter; ++iter) {
    if (max_residual(counts) <= options.tol) {
      const double gauge = psi[k - 1];
      for (double& v : psi) v -= gauge;
      return psi;
    }
    for (std::size_t j = 0; j < k; ++j) {
      trial[j] = psi[j] + step * (target_probs[j] - static_cast<double>(counts[j]) / m);
    }
    const double gauge = trial[k - 1];
    for (double& v : trial) v -= gauge;
    const double trial_phi = objective_from_costs(costs, trial, target_probs, trial_counts);
    if (trial_phi < phi) {
      step *= 0.5;
      continue;
    }
    psi.swap(trial);
    counts.swap(trial_counts);
    phi = trial_phi;
  }
  throw NotConverged("dual potential ascent did not reach tolerance " + std::to_string(options.tol) + " in " +
                     std::to_string(options.max_iter) + " iterations");
}

} // namespace fmsos
