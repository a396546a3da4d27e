#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fmsos/kernels.hpp"
#include "fmsos/random.hpp"
#include "fmsos/rotation.hpp"
#include "fmsos/semidiscrete_ot.hpp"
#include "fmsos/sphere.hpp"

namespace fmsos {

/// Parameters of the regression map f = R o S_nu and the response concentration.
///
/// An empty `measure` denotes the rotation-only model f(x) = R x (the transport
/// component removed); it is used by the baseline sampler mode.
struct ModelState {
  std::optional<TargetMeasure> measure;
  RotationMatrix rotation;
  double kappa;

  int dim() const { return rotation.dim(); }
  std::size_t k() const { return measure ? measure->size() : 0; }
};

struct PriorConfig {
  double lambda = 3.0;           // zero-truncated Poisson rate for k
  int p = 2;                     // sphere dimension
  std::size_t cloud_size = 10000;
  std::size_t k_max = 100;
  std::size_t rejection_budget = 100000;
  double kappa_init_low = 1.0;   // initial kappa ~ Uniform(low, high) under the flat prior
  double kappa_init_high = 200.0;

  void validate() const;
};

/// Covariate/response pairs stored column-wise.
class Dataset {
public:
  Dataset(kernels::PointMatrix x, kernels::PointMatrix y);
  static Dataset empty(int ambient_dim);

  std::size_t size() const { return static_cast<std::size_t>(x_.cols()); }
  int dim() const { return static_cast<int>(x_.rows()); }
  const kernels::PointMatrix& x() const { return x_; }
  const kernels::PointMatrix& y() const { return y_; }
  UnitVector x(std::size_t i) const;
  UnitVector y(std::size_t i) const;

  Dataset subset(const std::vector<std::size_t>& indices) const;
  Dataset concatenated(const Dataset& other) const;

private:
  kernels::PointMatrix x_;
  kernels::PointMatrix y_;
};

/// log of the zero-truncated Poisson(lambda) pmf at k; -inf outside [1, k_max].
/// The k_max cap only truncates the support, so ratios between admissible k are exact.
double log_prior_k(std::size_t k, double lambda, std::size_t k_max);

UnitVector regression_map_eval(const ModelState& state, const UnitVector& x);

/// f(x_i) for every column of `points`.
kernels::PointMatrix predict_means(const ModelState& state, const kernels::PointMatrix& points);

/// sum_i log g(y_i; f(x_i), kappa), including the kappa-dependent normalizer.
double log_likelihood(const ModelState& state, const Dataset& data);

/// Draw from the dual-formulation prior by joint rejection: k, atoms and box-uniform
/// potentials are redrawn together until every Laguerre cell is nonempty on `cloud`.
/// With `fixed_k` only atoms and potentials are redrawn.
ModelState sample_prior_dual(const PriorConfig& config, const ReferenceCloud& cloud, Rng& rng,
                             std::optional<std::size_t> fixed_k = std::nullopt);

/// Direct prior: uniform atoms, Dirichlet(alpha, ..., alpha) weights realized through
/// solve_dual_potentials. Also returns the drawn weights.
struct DirectPriorDraw {
  ModelState state;
  std::vector<double> weights;
};
DirectPriorDraw sample_prior_direct(const PriorConfig& config, std::size_t k, double alpha,
                                    const ReferenceCloud& cloud, Rng& rng, const DualSolveOptions& options = {});

/// x_i uniform on S^p, y_i ~ vMF(f(x_i), kappa).
Dataset simulate_dataset(const ModelState& state, std::size_t n, Rng& rng);

/// Throws DomainError unless the state satisfies its invariants on `cloud`.
void validate_state(const ModelState& state, const ReferenceCloud& cloud);

} // namespace fmsos
