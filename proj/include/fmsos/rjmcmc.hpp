#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "fmsos/model.hpp"
#include "fmsos/random.hpp"
#include "fmsos/semidiscrete_ot.hpp"

namespace fmsos {

enum class MoveType { kAtom = 0, kPsi = 1, kBirth = 2, kDeath = 3, kNone = 4 };

const char* move_name(MoveType move);
MoveType move_from_name(const std::string& name);

/// Probabilities of the four target-measure moves.
struct MoveProbabilities {
  double q_atom = 0.25;
  double q_psi = 0.25;
  double q_add = 0.25;
  double q_remove = 0.25;

  void validate() const;
  /// Probabilities actually used at `k` atoms: q_remove is dropped and the rest
  /// renormalized at k = 1; q_add is folded into q_atom at k = k_max.
  MoveProbabilities effective(std::size_t k, std::size_t k_max) const;
};

/// Form of the Type I / birth / death acceptance ratios.
///  kBalanced: Metropolis-Hastings ratios for the rejection-sampled prior
///             (interval lengths enter as proposal densities, new potentials
///             carry the 1/pi^2 box density).
///  kPrinted:  the ratios in the form commonly quoted for this sampler, with
///             the interval lengths inverted and no box density.
enum class RatioForm { kBalanced, kPrinted };

struct SamplerConfig {
  MoveProbabilities move_probs;
  double sigma_eps = 0.05;       // rotation proposal scale
  double sigma_kappa = 5.0;      // kappa random-walk scale
  double kappa_vmf_atom = 200.0; // atom perturbation concentration
  std::size_t iters = 20000;
  std::size_t burn_in = 5000;
  std::size_t thin = 5;
  std::uint64_t seed = 1;
  PriorConfig prior;
  RatioForm ratio_form = RatioForm::kBalanced;
  bool rotation_only = false;  // baseline f(x) = R x: only R and kappa are sampled
  bool update_rotation = true;
  bool update_kappa = true;
  // Tempered burn-in: for the first anneal_iters iterations the likelihood enters
  // acceptance ratios raised to beta, which rises geometrically from anneal_start to 1.
  std::size_t anneal_iters = 0;
  double anneal_start = 0.01;

  void validate() const;
  std::size_t expected_records() const { return (iters - burn_in) / thin; }
};

/// One kept iteration of the chain.
struct TraceRecord {
  std::size_t iteration = 0;
  double kappa = 0.0;
  double log_likelihood = 0.0;
  Eigen::MatrixXd rotation;
  std::vector<Eigen::VectorXd> atoms; // empty for the rotation-only model
  std::vector<double> psi;
  MoveType move = MoveType::kNone;   // target-measure move attempted this iteration
  bool accepted = false;
  double interval_lower = std::numeric_limits<double>::quiet_NaN();
  double interval_upper = std::numeric_limits<double>::quiet_NaN();

  std::size_t k() const { return atoms.size(); }
  ModelState to_state() const;
};

struct MoveStats {
  std::array<std::size_t, 6> proposed{}; // atom, psi, birth, death, rotation, kappa
  std::array<std::size_t, 6> accepted{};
  double rate(std::size_t slot) const {
    return proposed[slot] == 0 ? 0.0 : static_cast<double>(accepted[slot]) / static_cast<double>(proposed[slot]);
  }
};

struct ChainTrace {
  int dim = 3;
  bool rotation_only = false;
  std::vector<std::pair<std::string, std::string>> header; // resolved configuration, echoed to files
  std::vector<TraceRecord> records;
  MoveStats stats;
};

/// Outcome of a single update.
struct StepResult {
  MoveType move = MoveType::kNone;
  bool proposed = false;     // false when the move was not applicable (e.g. death at k = 1)
  bool accepted = false;
  double log_ratio = -std::numeric_limits<double>::infinity();
  double log_lik_delta = 0.0;
  std::size_t index = 0;     // affected atom
  FeasibleInterval forward{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  FeasibleInterval reverse{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
};

/// log A for adding an atom to a k-atom measure; `interval_length` is |S| of the new potential.
double log_birth_ratio(double log_lik_delta, std::size_t k, double interval_length, const SamplerConfig& config);
/// log A for removing an atom from a k-atom measure; `interval_length` is |S| of the removed potential.
double log_death_ratio(double log_lik_delta, std::size_t k, double interval_length, const SamplerConfig& config);
/// log A for moving atom j; lengths are the boxed conditional intervals before and after the move.
double log_atom_ratio(double log_lik_delta, double current_length, double proposed_length, RatioForm form);

/// Metropolis-within-Gibbs / reversible-jump sampler over (nu, R, kappa).
///
/// Caches the cloud-by-atom and data-by-atom cost tables and per-cell response
/// sums, so rotation and kappa updates cost O(p^2) and target-measure moves O((m + n) k).
class Sampler {
public:
  Sampler(SamplerConfig config, const ReferenceCloud& cloud, const Dataset& data, ModelState init);

  const ModelState& state() const { return state_; }
  double log_likelihood() const { return log_lik_; }
  const SamplerConfig& config() const { return config_; }

  StepResult step_rotation(Rng& rng);
  StepResult step_rotation_with(const Eigen::VectorXd& eps, Rng& rng);
  StepResult step_kappa(Rng& rng);
  StepResult step_atom_perturb(Rng& rng);
  StepResult step_psi_perturb(Rng& rng);
  /// Type II move on a given component with a given proposed value (must lie in its interval).
  StepResult step_psi_to(std::size_t j, double value, Rng& rng);
  StepResult step_birth(Rng& rng);
  StepResult step_death(Rng& rng);
  /// Death of a chosen atom; used to replay reverse moves.
  StepResult step_death_of(std::size_t j, Rng& rng);

  /// One iteration: a target-measure move chosen by the move probabilities,
  /// then the rotation and kappa updates.
  StepResult sweep(Rng& rng, MoveStats* stats = nullptr);

  TraceRecord snapshot(std::size_t iteration, const StepResult& nu_move) const;

  /// Likelihood exponent used in acceptance decisions (1 = the posterior).
  void set_inverse_temperature(double beta);
  double inverse_temperature() const { return beta_; }

private:
  bool accept(const StepResult& res, Rng& rng);
  void rebuild_caches();
  double inner_product(const Eigen::MatrixXd& rotation) const; // sum_i y_i^T f(x_i) for this rotation
  Eigen::MatrixXd cell_moment(const std::vector<int>& labels, const Eigen::MatrixXd& atoms) const;
  double log_lik_from_moment(const Eigen::MatrixXd& moment, double kappa) const;

  SamplerConfig config_;
  const ReferenceCloud& cloud_;
  const Dataset& data_;
  ModelState state_;

  Eigen::MatrixXd cloud_costs_; // m x k
  Eigen::MatrixXd data_costs_;  // n x k
  std::vector<int> data_labels_;
  Eigen::MatrixXd moment_;      // sum_i y_i f0(x_i)^T with f0 the map before rotation
  double log_norm_ = 0.0;       // n log C(kappa)
  double log_lik_ = 0.0;
  double beta_ = 1.0;
};

/// Runs `config.iters` sweeps from `init`, keeping every `thin`-th state after burn-in.
ChainTrace run_chain(const ModelState& init, const SamplerConfig& config, const ReferenceCloud& cloud,
                     const Dataset& data, Rng& rng);

/// Starting state: best of `candidates` prior draws by likelihood (a single draw when
/// the dataset is empty), with kappa ~ Uniform(low, high).
ModelState initial_state(const SamplerConfig& config, const ReferenceCloud& cloud, const Dataset& data, Rng& rng,
                         std::size_t candidates = 1);

} // namespace fmsos
