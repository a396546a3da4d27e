#pragma once

#include <vector>

#include "fmsos/kernels.hpp"
#include "fmsos/model.hpp"
#include "fmsos/random.hpp"
#include "fmsos/rjmcmc.hpp"

namespace fmsos {

struct SphericalKMeans {
  kernels::PointMatrix centers; // unit columns
  std::vector<int> labels;
  double objective = 0.0;       // sum_i y_i . center(label_i)
};

/// k-means++ seeding followed by Lloyd iterations on cosine similarity; best of `restarts`.
SphericalKMeans spherical_kmeans(const kernels::PointMatrix& points, std::size_t k, Rng& rng,
                                 std::size_t restarts = 4, std::size_t iters = 50);

/// Potentials whose Laguerre assignment on the rows of `costs` reproduces `labels` as
/// far as possible (relaxation passes over misassigned points; best pass kept).
std::vector<double> fit_potentials_to_labels(const Eigen::MatrixXd& costs, const std::vector<int>& labels,
                                             std::size_t k, std::size_t passes = 60);

/// Maximum-likelihood vMF concentration for mean resultant length `rbar` on S^{dim-1}.
double kappa_from_resultant(double rbar, int dim);

struct ClusteredInitOptions {
  std::size_t k_low = 2;
  std::size_t k_high = 8;
  std::size_t rotation_candidates = 100;
  std::size_t refine_steps = 600;
};

/// Data-driven starting state. Responses are clustered for each k in [k_low, k_high];
/// for a rotation R the atoms are R^T (cluster centers) and the potentials are fitted so
/// covariate cells reproduce the response clusters. R is found by random search plus
/// local refinement. Across k the candidate with the best BIC is returned, after dropping
/// atoms whose cells are empty on `cloud` and moving potentials inside the prior bounds.
/// Falls back to initial_state when `data` has fewer than 2 * k_low points.
ModelState clustered_initial_state(const SamplerConfig& config, const ReferenceCloud& cloud, const Dataset& data,
                                   Rng& rng, const ClusteredInitOptions& options = {});

} // namespace fmsos
