#include "fmsos/kernels.hpp"

#include <algorithm>
#include <limits>
#include <omp.h>

#include "fmsos/errors.hpp"
#include "fmsos/sphere.hpp"

namespace fmsos::kernels {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_psi(const Eigen::MatrixXd& costs, std::span<const double> psi) {
  if (static_cast<Eigen::Index>(psi.size()) != costs.cols()) {
    throw DomainError("potential vector length does not match the number of atoms");
  }
}

inline int argmin_row(const Eigen::MatrixXd& costs, std::span<const double> psi, Eigen::Index i) {
  int best = 0;
  double best_val = costs(i, 0) - psi[0];
  for (Eigen::Index j = 1; j < costs.cols(); ++j) {
    const double v = costs(i, j) - psi[j];
    if (v < best_val) {
      best_val = v;
      best = static_cast<int>(j);
    }
  }
  return best;
}

// Returns (best l != j, reduced cost of best); best = -1 when k == 1.
inline std::pair<int, double> argmin_row_except(const Eigen::MatrixXd& costs, std::span<const double> psi,
                                                Eigen::Index i, int j) {
  int best = -1;
  double best_val = kInf;
  for (Eigen::Index l = 0; l < costs.cols(); ++l) {
    if (l == j) continue;
    const double v = costs(i, l) - psi[l];
    if (v < best_val) {
      best_val = v;
      best = static_cast<int>(l);
    }
  }
  return {best, best_val};
}

} // namespace

void cost_table_serial(const PointMatrix& points, const PointMatrix& atoms, Eigen::MatrixXd& costs) {
  const Eigen::Index m = points.cols();
  const Eigen::Index k = atoms.cols();
  costs.resize(m, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      costs(i, j) = cost_from_dot(points.col(i).dot(atoms.col(j)));
    }
  }
}

void cost_table_omp(const PointMatrix& points, const PointMatrix& atoms, Eigen::MatrixXd& costs) {
  const Eigen::Index m = points.cols();
  const Eigen::Index k = atoms.cols();
  costs.resize(m, k);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      costs(i, j) = cost_from_dot(points.col(i).dot(atoms.col(j)));
    }
  }
}

void cost_table(const PointMatrix& points, const PointMatrix& atoms, Eigen::MatrixXd& costs, Exec exec) {
  if (points.rows() != atoms.rows()) {
    throw DomainError("points and atoms live on spheres of different dimension");
  }
  if (exec == Exec::kSerial) {
    cost_table_serial(points, atoms, costs);
  } else {
    cost_table_omp(points, atoms, costs);
  }
}

void cost_column(const PointMatrix& points, const Eigen::VectorXd& atom, Eigen::Ref<Eigen::VectorXd> out,
                 Exec exec) {
  const Eigen::Index m = points.cols();
  if (points.rows() != atom.size() || out.size() != m) {
    throw DomainError("cost_column dimension mismatch");
  }
  if (exec == Exec::kSerial) {
    for (Eigen::Index i = 0; i < m; ++i) {
      out[i] = cost_from_dot(points.col(i).dot(atom));
    }
    return;
  }
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < m; ++i) {
    out[i] = cost_from_dot(points.col(i).dot(atom));
  }
}

void assign_serial(const Eigen::MatrixXd& costs, std::span<const double> psi, std::span<int> labels) {
  for (Eigen::Index i = 0; i < costs.rows(); ++i) {
    labels[i] = argmin_row(costs, psi, i);
  }
}

void assign_omp(const Eigen::MatrixXd& costs, std::span<const double> psi, std::span<int> labels) {
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < costs.rows(); ++i) {
    labels[i] = argmin_row(costs, psi, i);
  }
}

void assign(const Eigen::MatrixXd& costs, std::span<const double> psi, std::span<int> labels, Exec exec) {
  check_psi(costs, psi);
  if (static_cast<Eigen::Index>(labels.size()) != costs.rows()) {
    throw DomainError("label buffer has the wrong length");
  }
  if (costs.cols() == 0) {
    throw DomainError("cannot assign points to an empty atom set");
  }
  if (exec == Exec::kSerial) {
    assign_serial(costs, psi, labels);
  } else {
    assign_omp(costs, psi, labels);
  }
}

std::vector<std::size_t> count_labels(std::span<const int> labels, std::size_t k) {
  std::vector<std::size_t> counts(k, 0);
  for (int l : labels) {
    ++counts[static_cast<std::size_t>(l)];
  }
  return counts;
}

HoldOutScan hold_out_scan_serial(const Eigen::MatrixXd& costs, std::span<const double> psi, int j) {
  const auto k = static_cast<std::size_t>(costs.cols());
  HoldOutScan scan;
  scan.min_gap = kInf;
  scan.max_gap_by_cell.assign(k, -kInf);
  scan.count_by_cell.assign(k, 0);
  for (Eigen::Index i = 0; i < costs.rows(); ++i) {
    const auto [best, reduced] = argmin_row_except(costs, psi, i, j);
    if (best < 0) {
      scan.min_gap = -kInf;
      continue;
    }
    const double gap = costs(i, j) - reduced;
    scan.min_gap = std::min(scan.min_gap, gap);
    scan.max_gap_by_cell[best] = std::max(scan.max_gap_by_cell[best], gap);
    ++scan.count_by_cell[best];
  }
  return scan;
}

HoldOutScan hold_out_scan_omp(const Eigen::MatrixXd& costs, std::span<const double> psi, int j) {
  const auto k = static_cast<std::size_t>(costs.cols());
  HoldOutScan scan;
  scan.min_gap = kInf;
  scan.max_gap_by_cell.assign(k, -kInf);
  scan.count_by_cell.assign(k, 0);
#pragma omp parallel
  {
    double local_min = kInf;
    std::vector<double> local_max(k, -kInf);
    std::vector<std::size_t> local_count(k, 0);
#pragma omp for schedule(static) nowait
    for (Eigen::Index i = 0; i < costs.rows(); ++i) {
      const auto [best, reduced] = argmin_row_except(costs, psi, i, j);
      if (best < 0) {
        local_min = -kInf;
        continue;
      }
      const double gap = costs(i, j) - reduced;
      local_min = std::min(local_min, gap);
      local_max[best] = std::max(local_max[best], gap);
      ++local_count[best];
    }
#pragma omp critical
    {
      scan.min_gap = std::min(scan.min_gap, local_min);
      for (std::size_t l = 0; l < k; ++l) {
        scan.max_gap_by_cell[l] = std::max(scan.max_gap_by_cell[l], local_max[l]);
        scan.count_by_cell[l] += local_count[l];
      }
    }
  }
  return scan;
}

HoldOutScan hold_out_scan(const Eigen::MatrixXd& costs, std::span<const double> psi, int j, Exec exec) {
  check_psi(costs, psi);
  if (j < 0 || j >= costs.cols()) {
    throw DomainError("held-out atom index out of range");
  }
  return exec == Exec::kSerial ? hold_out_scan_serial(costs, psi, j) : hold_out_scan_omp(costs, psi, j);
}

} // namespace fmsos::kernels
