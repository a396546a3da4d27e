#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "fmsos/kernels.hpp"
#include "fmsos/model.hpp"
#include "fmsos/random.hpp"
#include "fmsos/rjmcmc.hpp"
#include "fmsos/semidiscrete_ot.hpp"

namespace fmsos {

/// A map S^p -> S^p evaluated on a batch of points (columns in, columns out).
using SphereMap = std::function<kernels::PointMatrix(const kernels::PointMatrix&)>;

SphereMap as_map(const ModelState& state);
/// Transport map x -> S_nu(x) without a rotation.
SphereMap as_map(const TargetMeasure& measure);
SphereMap pointwise(std::function<UnitVector(const UnitVector&)> f);

struct MapDistanceEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_points = 0;
};

/// d~(f1, f2) = sqrt(mean_x d(f1(x), f2(x))^2) over `n_points` uniform draws;
/// the standard error of the mean square is carried through the square root by the delta method.
MapDistanceEstimate integrated_l2_distance(const SphereMap& f1, const SphereMap& f2, std::size_t n_points, int p,
                                           Rng& rng);
MapDistanceEstimate integrated_l2_distance(const SphereMap& f1, const SphereMap& f2,
                                           const kernels::PointMatrix& probes);

/// d^(f1, f2) = sqrt(mean_x (1 - f1(x)^T f2(x))).
MapDistanceEstimate dhat_distance(const SphereMap& f1, const SphereMap& f2, std::size_t n_points, int p, Rng& rng);
MapDistanceEstimate dhat_distance(const SphereMap& f1, const SphereMap& f2, const kernels::PointMatrix& probes);

struct WeightedAtoms {
  std::vector<UnitVector> atoms;
  std::vector<double> weights;
};

struct TransportPlan {
  double cost = 0.0;
  Eigen::MatrixXd coupling; // rows: source atoms, cols: target atoms
};

/// Exact optimal transport between finitely supported measures with geodesic ground cost.
/// Throws DomainError unless weights are positive and each set sums to 1 (within 1e-9).
TransportPlan optimal_transport_plan(const WeightedAtoms& mu, const WeightedAtoms& nu);
double wasserstein1_discrete(const WeightedAtoms& mu, const WeightedAtoms& nu);

/// Weighted atoms of a target measure, weights from its cell masses on `cloud`.
WeightedAtoms weighted_atoms(const TargetMeasure& measure, const ReferenceCloud& cloud);

struct StabilityProbe {
  double d_tilde = 0.0; // integrated L2 distance between the two transport maps
  double w1 = 0.0;      // W1 between the two measures
};

/// Both quantities for a pair of feasible measures; the cloud serves as the uniform
/// sample for the map distance and for the cell weights.
StabilityProbe stability_probe(const TargetMeasure& measure1, const TargetMeasure& measure2,
                               const ReferenceCloud& cloud);

struct HeldOutScore {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Per-record average log density on `test`, summarized across trace records.
HeldOutScore held_out_log_likelihood(const ChainTrace& trace, const Dataset& test);

/// Posterior mean and standard deviation of d~(f_record, truth) over trace records,
/// computed on a fixed probe set.
struct PosteriorDistance {
  double mean = 0.0;
  double sd = 0.0;
  std::vector<double> per_record;
};
PosteriorDistance posterior_map_distance(const ChainTrace& trace, const ModelState& truth,
                                         const kernels::PointMatrix& probes);

/// Uniform probe points (p+1) x n.
kernels::PointMatrix uniform_points(int p, std::size_t n, Rng& rng);

} // namespace fmsos
