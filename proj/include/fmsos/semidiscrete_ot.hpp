#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fmsos/kernels.hpp"
#include "fmsos/sphere.hpp"

namespace fmsos {

/// Discrete target measure: atoms z_1..z_k with dual potentials psi_1..psi_k.
/// Cell masses are implied by the Laguerre tessellation of the source measure.
///
/// The constructor checks structure (k >= 1, shared dimension, distinct atoms,
/// finite potentials). The prior box and range bounds on psi are reported by
/// `within_potential_bounds` because measures outside them are legitimate
/// inputs to feasibility checks.
class TargetMeasure {
public:
  TargetMeasure(std::vector<UnitVector> atoms, std::vector<double> psi);

  std::size_t size() const { return atoms_.size(); }
  int dim() const { return atoms_.front().dim(); }
  const std::vector<UnitVector>& atoms() const { return atoms_; }
  const UnitVector& atom(std::size_t j) const { return atoms_.at(j); }
  const std::vector<double>& psi() const { return psi_; }
  double psi(std::size_t j) const { return psi_.at(j); }

  /// Atoms packed as columns of a (p+1) x k matrix.
  kernels::PointMatrix atom_matrix() const;

  /// psi_j in [-pi^2/2, pi^2/2] for all j and max psi - min psi <= pi^2/2 (with slack `tol`).
  bool within_potential_bounds(double tol = 1e-9) const;

  TargetMeasure with_psi(std::size_t j, double value) const;
  TargetMeasure with_atom(std::size_t j, UnitVector z) const;
  TargetMeasure with_added(UnitVector z, double psi) const;
  TargetMeasure without(std::size_t j) const;
  TargetMeasure shifted(double c) const;

private:
  std::vector<UnitVector> atoms_;
  std::vector<double> psi_;
};

/// Frozen Monte Carlo sample of the uniform source measure.
class ReferenceCloud {
public:
  ReferenceCloud(kernels::PointMatrix points, std::uint64_t seed);
  static ReferenceCloud sample(int p, std::size_t m, std::uint64_t seed);

  std::size_t size() const { return static_cast<std::size_t>(points_.cols()); }
  int dim() const { return static_cast<int>(points_.rows()); }
  const kernels::PointMatrix& points() const { return points_; }
  std::uint64_t seed() const { return seed_; }

private:
  kernels::PointMatrix points_;
  std::uint64_t seed_;
};

/// Open interval (lower, upper) of admissible values for one potential.
struct FeasibleInterval {
  double lower;
  double upper;

  double length() const { return upper - lower; }
  bool contains(double v) const { return v > lower && v < upper; }
};

/// Index of the atom minimizing c(x, z_j) - psi_j; ties go to the lowest index.
std::size_t transport_map_eval(const TargetMeasure& measure, const UnitVector& x);

/// Nearest-atom rule (Laguerre with constant potentials).
std::size_t voronoi_assign(std::span<const UnitVector> atoms, const UnitVector& x);

/// Cell index for every column of `points`.
std::vector<int> assign_points(const TargetMeasure& measure, const kernels::PointMatrix& points,
                               kernels::Exec exec = kernels::Exec::kParallel);

std::vector<std::size_t> cell_counts(const TargetMeasure& measure, const ReferenceCloud& cloud,
                                     kernels::Exec exec = kernels::Exec::kParallel);

/// Fraction of cloud points in each Laguerre cell; sums to 1.
std::vector<double> cell_mass_estimate(const TargetMeasure& measure, const ReferenceCloud& cloud,
                                       kernels::Exec exec = kernels::Exec::kParallel);

/// True iff every Laguerre cell receives at least one cloud point.
bool is_feasible(const TargetMeasure& measure, const ReferenceCloud& cloud,
                 kernels::Exec exec = kernels::Exec::kParallel);

/// Cloud-approximated bounds on psi_j keeping every cell nonempty, before the
/// prior box is applied. With k = 1 the bounds are (-inf, +inf).
/// Throws EmptyInterval when the bounds cross (some other cell is already empty).
FeasibleInterval conditional_feasible_bounds(const Eigen::MatrixXd& costs, std::span<const double> psi,
                                             std::size_t j, kernels::Exec exec = kernels::Exec::kParallel);

/// Bounds intersected with [-pi^2/2, pi^2/2]; throws EmptyInterval if the result is empty.
FeasibleInterval conditional_feasible_interval(const Eigen::MatrixXd& costs, std::span<const double> psi,
                                               std::size_t j, kernels::Exec exec = kernels::Exec::kParallel);

FeasibleInterval conditional_feasible_bounds(const TargetMeasure& measure, std::size_t j,
                                             const ReferenceCloud& cloud);
FeasibleInterval conditional_feasible_interval(const TargetMeasure& measure, std::size_t j,
                                               const ReferenceCloud& cloud);

/// Cloud-averaged Kantorovich dual objective
///   Phi(psi) = mean_x min_j (c(x, z_j) - psi_j) + sum_j psi_j nu_j.
/// Concave in psi with supergradient nu - G(psi).
double dual_objective(std::span<const UnitVector> atoms, std::span<const double> psi,
                      std::span<const double> target_probs, const ReferenceCloud& cloud);

struct DualSolveOptions {
  double tol = 1e-3;
  int max_iter = 2000;
  double initial_step = 1.0;
};

/// Damped ascent on Phi until every cell mass is within `tol` of its target
/// (max-norm). The result is gauge-fixed so the last potential is 0.
/// Throws NotConverged after max_iter iterations.
std::vector<double> solve_dual_potentials(std::span<const UnitVector> atoms, std::span<const double> target_probs,
                                          const ReferenceCloud& cloud, const DualSolveOptions& options = {});

} // namespace fmsos
