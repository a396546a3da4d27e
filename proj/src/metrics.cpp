#include "fmsos/metrics.hpp"

#include <cmath>

#include "fmsos/errors.hpp"
#include "fmsos/vmf.hpp"

namespace fmsos {
namespace {

struct MeanAndError {
  double mean;
  double std_error;
};

MeanAndError mean_and_error(const Eigen::VectorXd& v) {
  const auto n = static_cast<double>(v.size());
  const double mean = v.mean();
  if (v.size() < 2) return {mean, 0.0};
  const double var = (v.array() - mean).square().sum() / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

MapDistanceEstimate root_of(const MeanAndError& ms, std::size_t n) {
  MapDistanceEstimate out;
  out.n_points = n;
  out.value = std::sqrt(std::max(ms.mean, 0.0));
  out.std_error = out.value > 0.0 ? ms.std_error / (2.0 * out.value) : 0.0;
  return out;
}

void check_maps_output(const kernels::PointMatrix& a, const kernels::PointMatrix& b,
                       const kernels::PointMatrix& probes) {
  if (a.rows() != b.rows() || a.cols() != probes.cols() || b.cols() != probes.cols()) {
    throw DomainError("maps returned outputs of inconsistent shape");
  }
}

} // namespace

SphereMap as_map(const ModelState& state) {
  return [state](const kernels::PointMatrix& pts) { return predict_means(state, pts); };
}

SphereMap as_map(const TargetMeasure& measure) {
  return [measure](const kernels::PointMatrix& pts) {
    const std::vector<int> labels = assign_points(measure, pts);
    const auto atoms = measure.atom_matrix();
    kernels::PointMatrix out(pts.rows(), pts.cols());
    for (Eigen::Index i = 0; i < pts.cols(); ++i) out.col(i) = atoms.col(labels[static_cast<std::size_t>(i)]);
    return out;
  };
}

SphereMap pointwise(std::function<UnitVector(const UnitVector&)> f) {
  return [f = std::move(f)](const kernels::PointMatrix& pts) {
    kernels::PointMatrix out(pts.rows(), pts.cols());
    for (Eigen::Index i = 0; i < pts.cols(); ++i) {
      out.col(i) = f(UnitVector::normalized(pts.col(i))).coords();
    }
    return out;
  };
}

kernels::PointMatrix uniform_points(int p, std::size_t n, Rng& rng) {
  kernels::PointMatrix pts(p + 1, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    pts.col(static_cast<Eigen::Index>(i)) = sample_uniform_sphere(p, rng).coords();
  }
  return pts;
}

MapDistanceEstimate integrated_l2_distance(const SphereMap& f1, const SphereMap& f2,
                                           const kernels::PointMatrix& probes) {
  if (probes.cols() == 0) throw DomainError("need at least one probe point");
  const kernels::PointMatrix a = f1(probes);
  const kernels::PointMatrix b = f2(probes);
  check_maps_output(a, b, probes);
  Eigen::VectorXd sq(probes.cols());
  for (Eigen::Index i = 0; i < probes.cols(); ++i) {
    const double theta = chord_angle(a.col(i), b.col(i));
    sq[i] = theta * theta;
  }
  return root_of(mean_and_error(sq), static_cast<std::size_t>(probes.cols()));
}

MapDistanceEstimate integrated_l2_distance(const SphereMap& f1, const SphereMap& f2, std::size_t n_points, int p,
                                           Rng& rng) {
  return integrated_l2_distance(f1, f2, uniform_points(p, n_points, rng));
}

MapDistanceEstimate dhat_distance(const SphereMap& f1, const SphereMap& f2, const kernels::PointMatrix& probes) {
  if (probes.cols() == 0) throw DomainError("need at least one probe point");
  const kernels::PointMatrix a = f1(probes);
  const kernels::PointMatrix b = f2(probes);
  check_maps_output(a, b, probes);
  Eigen::VectorXd gap(probes.cols());
  for (Eigen::Index i = 0; i < probes.cols(); ++i) {
    gap[i] = 1.0 - clamped_dot(a.col(i), b.col(i));
  }
  return root_of(mean_and_error(gap), static_cast<std::size_t>(probes.cols()));
}

MapDistanceEstimate dhat_distance(const SphereMap& f1, const SphereMap& f2, std::size_t n_points, int p, Rng& rng) {
  return dhat_distance(f1, f2, uniform_points(p, n_points, rng));
}

WeightedAtoms weighted_atoms(const TargetMeasure& measure, const ReferenceCloud& cloud) {
  // Atoms whose cell misses the cloud carry no mass and are left out.
  const std::vector<double> mass = cell_mass_estimate(measure, cloud);
  WeightedAtoms out;
  for (std::size_t j = 0; j < mass.size(); ++j) {
    if (mass[j] > 0.0) {
      out.atoms.push_back(measure.atom(j));
      out.weights.push_back(mass[j]);
    }
  }
  return out;
}

StabilityProbe stability_probe(const TargetMeasure& measure1, const TargetMeasure& measure2,
                               const ReferenceCloud& cloud) {
  StabilityProbe out;
  out.d_tilde = integrated_l2_distance(as_map(measure1), as_map(measure2), cloud.points()).value;
  out.w1 = wasserstein1_discrete(weighted_atoms(measure1, cloud), weighted_atoms(measure2, cloud));
  return out;
}

HeldOutScore held_out_log_likelihood(const ChainTrace& trace, const Dataset& test) {
  if (trace.records.empty()) throw DomainError("held-out scoring needs a nonempty trace");
  if (test.size() == 0) throw DomainError("held-out scoring needs a nonempty test set");
  Eigen::VectorXd per_record(static_cast<Eigen::Index>(trace.records.size()));
  for (std::size_t r = 0; r < trace.records.size(); ++r) {
    const ModelState state = trace.records[r].to_state();
    per_record[static_cast<Eigen::Index>(r)] = log_likelihood(state, test) / static_cast<double>(test.size());
  }
  const MeanAndError me = mean_and_error(per_record);
  return {me.mean, me.std_error};
}

PosteriorDistance posterior_map_distance(const ChainTrace& trace, const ModelState& truth,
                                         const kernels::PointMatrix& probes) {
  if (trace.records.empty()) throw DomainError("posterior distance needs a nonempty trace");
  const kernels::PointMatrix truth_out = predict_means(truth, probes);
  PosteriorDistance out;
  out.per_record.reserve(trace.records.size());
  for (const auto& rec : trace.records) {
    const kernels::PointMatrix est = predict_means(rec.to_state(), probes);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < probes.cols(); ++i) {
      const double theta = chord_angle(est.col(i), truth_out.col(i));
      acc += theta * theta;
    }
    out.per_record.push_back(std::sqrt(acc / static_cast<double>(probes.cols())));
  }
  const Eigen::Map<const Eigen::VectorXd> v(out.per_record.data(), static_cast<Eigen::Index>(out.per_record.size()));
  out.mean = v.mean();
  out.sd = v.size() > 1 ? std::sqrt((v.array() - out.mean).square().sum() / static_cast<double>(v.size() - 1)) : 0.0;
  return out;
}

} // namespace fmsos
