#include "fmsos/rjmcmc.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fmsos/errors.hpp"
#include "fmsos/vmf.hpp"

namespace fmsos {
namespace {

const double kLogBoxWidth = 2.0 * std::log(std::numbers::pi); // log |box| = log(pi^2)
constexpr std::size_t kSlotRotation = 4;
constexpr std::size_t kSlotKappa = 5;

double frobenius(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a.array() * b.array()).sum(); }

} // namespace

const char* move_name(MoveType move) {
  switch (move) {
  case MoveType::kAtom: return "atom";
  case MoveType::kPsi: return "psi";
  case MoveType::kBirth: return "birth";
  case MoveType::kDeath: return "death";
  case MoveType::kNone: return "none";
  }
  return "none";
}

MoveType move_from_name(const std::string& name) {
  if (name == "atom") return MoveType::kAtom;
  if (name == "psi") return MoveType::kPsi;
  if (name == "birth") return MoveType::kBirth;
  if (name == "death") return MoveType::kDeath;
  if (name == "none") return MoveType::kNone;
  throw DomainError("unknown move type '" + name + "'");
}

void MoveProbabilities::validate() const {
  if (q_atom < 0.0 || q_psi < 0.0 || q_add < 0.0 || q_remove < 0.0) {
    throw ConfigError("move probabilities must be nonnegative");
  }
  if (std::abs(q_atom + q_psi + q_add + q_remove - 1.0) > 1e-9) {
    throw ConfigError("move probabilities must sum to 1");
  }
}

MoveProbabilities MoveProbabilities::effective(std::size_t k, std::size_t k_max) const {
  MoveProbabilities out = *this;
  if (k >= k_max) {
    out.q_atom += out.q_add;
    out.q_add = 0.0;
  }
  if (k <= 1) {
    out.q_remove = 0.0;
    const double total = out.q_atom + out.q_psi + out.q_add;
    if (total > 0.0) {
      out.q_atom /= total;
      out.q_psi /= total;
      out.q_add /= total;
    }
  }
  return out;
}

void SamplerConfig::validate() const {
  move_probs.validate();
  prior.validate();
  if (!(sigma_eps > 0.0) || !(sigma_kappa > 0.0) || !(kappa_vmf_atom > 0.0)) {
    throw ConfigError("proposal scales must be positive");
  }
  if (!(iters > burn_in)) {
    throw ConfigError("iters must exceed burn_in");
  }
  if (thin < 1) {
    throw ConfigError("thin must be >= 1");
  }
  if (anneal_iters > burn_in) {
    throw ConfigError("anneal_iters must not exceed burn_in");
  }
  if (!(anneal_start > 0.0 && anneal_start <= 1.0)) {
    throw ConfigError("anneal_start must lie in (0, 1]");
  }
}

ModelState TraceRecord::to_state() const {
  RotationMatrix r = RotationMatrix::from_matrix(rotation, 1e-9);
  if (atoms.empty()) {
    return ModelState{std::nullopt, std::move(r), kappa};
  }
  std::vector<UnitVector> zs;
  zs.reserve(atoms.size());
  for (const auto& a : atoms) zs.push_back(UnitVector::from_unit(a, 1e-9));
  return ModelState{TargetMeasure(std::move(zs), psi), std::move(r), kappa};
}

double log_birth_ratio(double log_lik_delta, std::size_t k, double interval_length, const SamplerConfig& config) {
  const auto& prior = config.prior;
  const MoveProbabilities from = config.move_probs.effective(k, prior.k_max);
  const MoveProbabilities to = config.move_probs.effective(k + 1, prior.k_max);
  const double log_prior = log_prior_k(k + 1, prior.lambda, prior.k_max) - log_prior_k(k, prior.lambda, prior.k_max);
  const double log_q = std::log(to.q_remove) - std::log(from.q_add);
  if (config.ratio_form == RatioForm::kPrinted) {
    return log_lik_delta + log_prior + log_q - std::log(static_cast<double>(k + 1)) - std::log(interval_length);
  }
  return log_lik_delta + log_prior + log_q + std::log(interval_length) - kLogBoxWidth;
}

double log_death_ratio(double log_lik_delta, std::size_t k, double interval_length, const SamplerConfig& config) {
  const auto& prior = config.prior;
  const MoveProbabilities from = config.move_probs.effective(k, prior.k_max);
  const MoveProbabilities to = config.move_probs.effective(k - 1, prior.k_max);
  const double log_prior = log_prior_k(k - 1, prior.lambda, prior.k_max) - log_prior_k(k, prior.lambda, prior.k_max);
  const double log_q = std::log(to.q_add) - std::log(from.q_remove);
  if (config.ratio_form == RatioForm::kPrinted) {
    return log_lik_delta + log_prior + log_q + std::log(interval_length) + std::log(static_cast<double>(k));
  }
  return log_lik_delta + log_prior + log_q - std::log(interval_length) + kLogBoxWidth;
}

double log_atom_ratio(double log_lik_delta, double current_length, double proposed_length, RatioForm form) {
  if (form == RatioForm::kPrinted) {
    return log_lik_delta + std::log(current_length) - std::log(proposed_length);
  }
  return log_lik_delta + std::log(proposed_length) - std::log(current_length);
}

Sampler::Sampler(SamplerConfig config, const ReferenceCloud& cloud, const Dataset& data, ModelState init)
    : config_(std::move(config)), cloud_(cloud), data_(data), state_(std::move(init)) {
  config_.validate();
  if (cloud_.dim() != state_.dim() || data_.dim() != state_.dim()) {
    throw DomainError("cloud, data and state dimensions differ");
  }
  if (config_.rotation_only) {
    state_.measure.reset();
  } else if (!state_.measure) {
    throw DomainError("transport sampler needs an initial target measure");
  }
  validate_state(state_, cloud_);
  if (state_.k() > config_.prior.k_max) {
    throw DomainError("initial state exceeds k_max");
  }
  rebuild_caches();
}

void Sampler::rebuild_caches() {
  const int d = state_.dim();
  data_labels_.assign(data_.size(), 0);
  if (state_.measure) {
    const auto atoms = state_.measure->atom_matrix();
    kernels::cost_table(cloud_.points(), atoms, cloud_costs_);
    kernels::cost_table(data_.x(), atoms, data_costs_);
    if (data_.size() > 0) kernels::assign(data_costs_, state_.measure->psi(), data_labels_);
    moment_ = cell_moment(data_labels_, atoms);
  } else {
    moment_ = data_.size() > 0 ? Eigen::MatrixXd(data_.y() * data_.x().transpose()) : Eigen::MatrixXd::Zero(d, d);
  }
  log_norm_ = data_.size() == 0 ? 0.0 : static_cast<double>(data_.size()) * vmf_log_normalizer(d, state_.kappa);
  log_lik_ = log_lik_from_moment(moment_, state_.kappa);
}

Eigen::MatrixXd Sampler::cell_moment(const std::vector<int>& labels, const Eigen::MatrixXd& atoms) const {
  const int d = state_.dim();
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(d, atoms.cols());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    sums.col(labels[i]) += data_.y().col(static_cast<Eigen::Index>(i));
  }
  return sums * atoms.transpose();
}

double Sampler::log_lik_from_moment(const Eigen::MatrixXd& moment, double kappa) const {
  if (data_.size() == 0) return 0.0;
  const double norm = kappa == state_.kappa ? log_norm_
                                            : static_cast<double>(data_.size()) * vmf_log_normalizer(state_.dim(), kappa);
  return norm + kappa * frobenius(state_.rotation.matrix(), moment);
}

double Sampler::inner_product(const Eigen::MatrixXd& rotation) const { return frobenius(rotation, moment_); }

void Sampler::set_inverse_temperature(double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("inverse temperature must lie in (0, 1]");
  beta_ = beta;
}

bool Sampler::accept(const StepResult& res, Rng& rng) {
  // Only the likelihood part of the ratio is tempered.
  const double log_ratio = beta_ == 1.0 ? res.log_ratio : res.log_ratio - (1.0 - beta_) * res.log_lik_delta;
  if (log_ratio >= 0.0) return true;
  if (!(log_ratio > -std::numeric_limits<double>::infinity())) return false;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return std::log(u(rng)) < log_ratio;
}

StepResult Sampler::step_rotation(Rng& rng) {
  std::normal_distribution<double> normal(0.0, config_.sigma_eps);
  Eigen::VectorXd eps(skew_param_count(state_.dim()));
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps[i] = normal(rng);
  return step_rotation_with(eps, rng);
}

StepResult Sampler::step_rotation_with(const Eigen::VectorXd& eps, Rng& rng) {
  StepResult res;
  res.proposed = true;
  RotationMatrix proposal = skew_exponential_step(state_.rotation, eps);
  const double delta =
      data_.size() == 0 ? 0.0 : state_.kappa * (inner_product(proposal.matrix()) - inner_product(state_.rotation.matrix()));
  res.log_lik_delta = delta;
  res.log_ratio = delta; // symmetric proposal, Haar prior
  if (accept(res, rng)) {
    state_.rotation = std::move(proposal);
    log_lik_ += delta;
    res.accepted = true;
  }
  return res;
}

StepResult Sampler::step_kappa(Rng& rng) {
  StepResult res;
  res.proposed = true;
  std::normal_distribution<double> normal(0.0, config_.sigma_kappa);
  const double proposal = state_.kappa + normal(rng);
  if (!(proposal > 0.0)) {
    return res; // outside the flat prior's support
  }
  double new_norm = 0.0;
  double delta = 0.0;
  if (data_.size() > 0) {
    new_norm = static_cast<double>(data_.size()) * vmf_log_normalizer(state_.dim(), proposal);
    delta = (new_norm - log_norm_) + (proposal - state_.kappa) * inner_product(state_.rotation.matrix());
  }
  res.log_lik_delta = delta;
  res.log_ratio = delta;
  if (accept(res, rng)) {
    state_.kappa = proposal;
    log_norm_ = new_norm;
    log_lik_ += delta;
    res.accepted = true;
  }
  return res;
}

StepResult Sampler::step_atom_perturb(Rng& rng) {
  StepResult res;
  res.move = MoveType::kAtom;
  if (!state_.measure) return res;
  const TargetMeasure& measure = *state_.measure;
  const std::size_t k = measure.size();
  std::uniform_int_distribution<std::size_t> pick(0, k - 1);
  const std::size_t j = pick(rng);
  res.index = j;
  res.proposed = true;

  const FeasibleInterval current = conditional_feasible_interval(cloud_costs_, measure.psi(), j);
  const UnitVector z_new = vmf_sample(VmfParams(measure.atom(j), config_.kappa_vmf_atom), rng);
  for (std::size_t l = 0; l < k; ++l) {
    if (l != j && geodesic_distance(z_new, measure.atom(l)) <= 1e-9) return res;
  }

  const auto col = static_cast<Eigen::Index>(j);
  Eigen::VectorXd saved_cloud = cloud_costs_.col(col);
  kernels::cost_column(cloud_.points(), z_new.coords(), cloud_costs_.col(col));
  FeasibleInterval proposed{};
  try {
    proposed = conditional_feasible_interval(cloud_costs_, measure.psi(), j);
  } catch (const EmptyInterval&) {
    cloud_costs_.col(col) = saved_cloud;
    return res;
  }
  std::uniform_real_distribution<double> u(proposed.lower, proposed.upper);
  const double psi_new = u(rng);

  TargetMeasure next = measure.with_atom(j, z_new).with_psi(j, psi_new);
  const auto atoms = next.atom_matrix();
  Eigen::VectorXd saved_data = data_costs_.col(col);
  std::vector<int> labels(data_.size());
  Eigen::MatrixXd moment = moment_;
  if (data_.size() > 0) {
    kernels::cost_column(data_.x(), z_new.coords(), data_costs_.col(col));
    kernels::assign(data_costs_, next.psi(), labels);
    moment = cell_moment(labels, atoms);
  }
  const double new_lik = log_lik_from_moment(moment, state_.kappa);
  res.forward = proposed;
  res.reverse = current;
  res.log_lik_delta = new_lik - log_lik_;
  res.log_ratio = log_atom_ratio(res.log_lik_delta, current.length(), proposed.length(), config_.ratio_form);
  if (accept(res, rng)) {
    state_.measure = std::move(next);
    data_labels_ = std::move(labels);
    moment_ = std::move(moment);
    log_lik_ = new_lik;
    res.accepted = true;
  } else {
    cloud_costs_.col(col) = saved_cloud;
    data_costs_.col(col) = saved_data;
  }
  return res;
}

StepResult Sampler::step_psi_perturb(Rng& rng) {
  if (!state_.measure) {
    StepResult res;
    res.move = MoveType::kPsi;
    return res;
  }
  std::uniform_int_distribution<std::size_t> pick(0, state_.measure->size() - 1);
  const std::size_t j = pick(rng);
  const FeasibleInterval interval = conditional_feasible_interval(cloud_costs_, state_.measure->psi(), j);
  std::uniform_real_distribution<double> u(interval.lower, interval.upper);
  return step_psi_to(j, u(rng), rng);
}

StepResult Sampler::step_psi_to(std::size_t j, double value, Rng& rng) {
  StepResult res;
  res.move = MoveType::kPsi;
  if (!state_.measure) return res;
  res.index = j;
  res.proposed = true;
  const FeasibleInterval interval = conditional_feasible_interval(cloud_costs_, state_.measure->psi(), j);
  if (!interval.contains(value)) {
    throw DomainError("proposed potential lies outside its conditional feasible interval");
  }
  res.forward = interval;
  res.reverse = interval;
  TargetMeasure next = state_.measure->with_psi(j, value);
  std::vector<int> labels(data_.size());
  Eigen::MatrixXd moment = moment_;
  if (data_.size() > 0) {
    kernels::assign(data_costs_, next.psi(), labels);
    moment = cell_moment(labels, next.atom_matrix());
  }
  const double new_lik = log_lik_from_moment(moment, state_.kappa);
  res.log_lik_delta = new_lik - log_lik_;
  res.log_ratio = res.log_lik_delta;
  if (accept(res, rng)) {
    state_.measure = std::move(next);
    data_labels_ = std::move(labels);
    moment_ = std::move(moment);
    log_lik_ = new_lik;
    res.accepted = true;
  }
  return res;
}

StepResult Sampler::step_birth(Rng& rng) {
  StepResult res;
  res.move = MoveType::kBirth;
  if (!state_.measure) return res;
  const TargetMeasure& measure = *state_.measure;
  const std::size_t k = measure.size();
  if (k >= config_.prior.k_max) return res;
  res.proposed = true;
  res.index = k;

  const UnitVector z_new = sample_uniform_sphere(state_.dim() - 1, rng);
  for (std::size_t l = 0; l < k; ++l) {
    if (geodesic_distance(z_new, measure.atom(l)) <= 1e-9) return res;
  }
  Eigen::MatrixXd costs(cloud_costs_.rows(), static_cast<Eigen::Index>(k + 1));
  costs.leftCols(static_cast<Eigen::Index>(k)) = cloud_costs_;
  kernels::cost_column(cloud_.points(), z_new.coords(), costs.col(static_cast<Eigen::Index>(k)));
  std::vector<double> psi = measure.psi();
  psi.push_back(0.0);
  FeasibleInterval interval{};
  try {
    interval = conditional_feasible_interval(costs, psi, k);
  } catch (const EmptyInterval&) {
    return res;
  }
  std::uniform_real_distribution<double> u(interval.lower, interval.upper);
  psi.back() = u(rng);

  TargetMeasure next = measure.with_added(z_new, psi.back());
  const auto atoms = next.atom_matrix();
  Eigen::MatrixXd data_costs;
  std::vector<int> labels(data_.size());
  Eigen::MatrixXd moment = moment_;
  if (data_.size() > 0) {
    data_costs.resize(data_costs_.rows(), static_cast<Eigen::Index>(k + 1));
    data_costs.leftCols(static_cast<Eigen::Index>(k)) = data_costs_;
    kernels::cost_column(data_.x(), z_new.coords(), data_costs.col(static_cast<Eigen::Index>(k)));
    kernels::assign(data_costs, next.psi(), labels);
    moment = cell_moment(labels, atoms);
  } else {
    data_costs.resize(0, static_cast<Eigen::Index>(k + 1));
  }
  const double new_lik = log_lik_from_moment(moment, state_.kappa);
  res.forward = interval;
  res.reverse = interval;
  res.log_lik_delta = new_lik - log_lik_;
  res.log_ratio = log_birth_ratio(res.log_lik_delta, k, interval.length(), config_);
  if (accept(res, rng)) {
    state_.measure = std::move(next);
    cloud_costs_ = std::move(costs);
    data_costs_ = std::move(data_costs);
    data_labels_ = std::move(labels);
    moment_ = std::move(moment);
    log_lik_ = new_lik;
    res.accepted = true;
  }
  return res;
}

StepResult Sampler::step_death(Rng& rng) {
  if (!state_.measure || state_.measure->size() < 2) {
    StepResult res;
    res.move = MoveType::kDeath;
    return res;
  }
  std::uniform_int_distribution<std::size_t> pick(0, state_.measure->size() - 1);
  return step_death_of(pick(rng), rng);
}

StepResult Sampler::step_death_of(std::size_t j, Rng& rng) {
  StepResult res;
  res.move = MoveType::kDeath;
  if (!state_.measure || state_.measure->size() < 2) return res;
  const TargetMeasure& measure = *state_.measure;
  const std::size_t k = measure.size();
  if (j >= k) throw DomainError("atom index out of range");
  res.proposed = true;
  res.index = j;

  // Interval the reverse birth would draw psi_j from; the same scan tells us
  // which cells survive the removal.
  const kernels::HoldOutScan scan = kernels::hold_out_scan(cloud_costs_, measure.psi(), static_cast<int>(j));
  for (std::size_t l = 0; l < k; ++l) {
    if (l != j && scan.count_by_cell[l] == 0) {
      throw std::logic_error("removing an atom emptied another Laguerre cell");
    }
  }
  const FeasibleInterval interval = conditional_feasible_interval(cloud_costs_, measure.psi(), j);

  TargetMeasure next = measure.without(j);
  const auto keep = [&](const Eigen::MatrixXd& src) {
    Eigen::MatrixXd out(src.rows(), static_cast<Eigen::Index>(k - 1));
    Eigen::Index c = 0;
    for (std::size_t l = 0; l < k; ++l) {
      if (l == j) continue;
      out.col(c++) = src.col(static_cast<Eigen::Index>(l));
    }
    return out;
  };
  Eigen::MatrixXd costs = keep(cloud_costs_);
  Eigen::MatrixXd data_costs = keep(data_costs_);
  std::vector<int> labels(data_.size());
  Eigen::MatrixXd moment = moment_;
  if (data_.size() > 0) {
    kernels::assign(data_costs, next.psi(), labels);
    moment = cell_moment(labels, next.atom_matrix());
  }
  const double new_lik = log_lik_from_moment(moment, state_.kappa);
  res.forward = interval;
  res.reverse = interval;
  res.log_lik_delta = new_lik - log_lik_;
  res.log_ratio = log_death_ratio(res.log_lik_delta, k, interval.length(), config_);
  if (accept(res, rng)) {
    state_.measure = std::move(next);
    cloud_costs_ = std::move(costs);
    data_costs_ = std::move(data_costs);
    data_labels_ = std::move(labels);
    moment_ = std::move(moment);
    log_lik_ = new_lik;
    res.accepted = true;
  }
  return res;
}

StepResult Sampler::sweep(Rng& rng, MoveStats* stats) {
  StepResult nu_move;
  if (state_.measure) {
    const MoveProbabilities q = config_.move_probs.effective(state_.measure->size(), config_.prior.k_max);
    const double total = q.q_atom + q.q_psi + q.q_add + q.q_remove;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      const double r = u(rng);
      if (r < q.q_atom) {
        nu_move = step_atom_perturb(rng);
      } else if (r < q.q_atom + q.q_psi) {
        nu_move = step_psi_perturb(rng);
      } else if (r < q.q_atom + q.q_psi + q.q_add) {
        nu_move = step_birth(rng);
      } else {
        nu_move = step_death(rng);
      }
      if (stats && nu_move.move != MoveType::kNone) {
        const auto slot = static_cast<std::size_t>(nu_move.move);
        ++stats->proposed[slot];
        if (nu_move.accepted) ++stats->accepted[slot];
      }
    }
  }
  if (config_.update_rotation) {
    const StepResult r = step_rotation(rng);
    if (stats) {
      ++stats->proposed[kSlotRotation];
      if (r.accepted) ++stats->accepted[kSlotRotation];
    }
  }
  if (config_.update_kappa) {
    const StepResult r = step_kappa(rng);
    if (stats) {
      ++stats->proposed[kSlotKappa];
      if (r.accepted) ++stats->accepted[kSlotKappa];
    }
  }
  return nu_move;
}

TraceRecord Sampler::snapshot(std::size_t iteration, const StepResult& nu_move) const {
  TraceRecord rec;
  rec.iteration = iteration;
  rec.kappa = state_.kappa;
  rec.log_likelihood = log_lik_;
  rec.rotation = state_.rotation.matrix();
  if (state_.measure) {
    for (const auto& z : state_.measure->atoms()) rec.atoms.push_back(z.coords());
    rec.psi = state_.measure->psi();
  }
  rec.move = nu_move.move;
  rec.accepted = nu_move.accepted;
  rec.interval_lower = nu_move.forward.lower;
  rec.interval_upper = nu_move.forward.upper;
  return rec;
}

ChainTrace run_chain(const ModelState& init, const SamplerConfig& config, const ReferenceCloud& cloud,
                     const Dataset& data, Rng& rng) {
  Sampler sampler(config, cloud, data, init);
  ChainTrace trace;
  trace.dim = init.dim();
  trace.rotation_only = config.rotation_only;
  trace.records.reserve(config.expected_records());
  for (std::size_t t = 0; t < config.iters; ++t) {
    if (t < config.anneal_iters) {
      const double frac = static_cast<double>(t) / static_cast<double>(config.anneal_iters);
      sampler.set_inverse_temperature(std::pow(config.anneal_start, 1.0 - frac));
    } else if (t == config.anneal_iters) {
      sampler.set_inverse_temperature(1.0);
    }
    const StepResult nu_move = sampler.sweep(rng, &trace.stats);
    if (t >= config.burn_in && (t - config.burn_in + 1) % config.thin == 0) {
      trace.records.push_back(sampler.snapshot(t, nu_move));
    }
  }
  return trace;
}

ModelState initial_state(const SamplerConfig& config, const ReferenceCloud& cloud, const Dataset& data, Rng& rng,
                         std::size_t candidates) {
  ModelState best = sample_prior_dual(config.prior, cloud, rng);
  if (config.rotation_only) best.measure.reset();
  if (data.size() == 0 || candidates <= 1) return best;
  double best_lik = log_likelihood(best, data);
  for (std::size_t c = 1; c < candidates; ++c) {
    ModelState s = sample_prior_dual(config.prior, cloud, rng);
    if (config.rotation_only) s.measure.reset();
    s.kappa = best.kappa;
    const double lik = log_likelihood(s, data);
    if (lik > best_lik) {
      best_lik = lik;
      best = std::move(s);
    }
  }
  return best;
}

} // namespace fmsos
