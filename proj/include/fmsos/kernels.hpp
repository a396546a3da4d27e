#pragma once

// Data-parallel scans over (points x atoms). Each kernel has a serial reference
// and an OpenMP variant; both produce identical results (reductions are min/max
// or integer counts, so thread order does not matter).

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

namespace fmsos::kernels {

enum class Exec { kSerial, kParallel };

/// Column-major matrix whose column i is a point on the sphere.
using PointMatrix = Eigen::MatrixXd;

/// costs(i, j) = c(points_i, atoms_j); `costs` is resized to m x k.
void cost_table_serial(const PointMatrix& points, const PointMatrix& atoms, Eigen::MatrixXd& costs);
void cost_table_omp(const PointMatrix& points, const PointMatrix& atoms, Eigen::MatrixXd& costs);
void cost_table(const PointMatrix& points, const PointMatrix& atoms, Eigen::MatrixXd& costs,
                Exec exec = Exec::kParallel);

/// Fills out(i) = c(points_i, atom).
void cost_column(const PointMatrix& points, const Eigen::VectorXd& atom,
                 Eigen::Ref<Eigen::VectorXd> out, Exec exec = Exec::kParallel);

/// labels[i] = argmin_j costs(i, j) - psi[j]; ties go to the lowest index.
void assign_serial(const Eigen::MatrixXd& costs, std::span<const double> psi, std::span<int> labels);
void assign_omp(const Eigen::MatrixXd& costs, std::span<const double> psi, std::span<int> labels);
void assign(const Eigen::MatrixXd& costs, std::span<const double> psi, std::span<int> labels,
            Exec exec = Exec::kParallel);

std::vector<std::size_t> count_labels(std::span<const int> labels, std::size_t k);

/// Scan with atom j held out. For every point i let
///   best_i = argmin_{l != j} costs(i, l) - psi[l]   (lowest index on ties)
///   gap_i  = costs(i, j) - (costs(i, best_i) - psi[best_i]).
/// Cell j is nonempty iff psi_j > min_i gap_i; cell l != j stays nonempty iff
/// psi_j < max_{i : best_i = l} gap_i.
struct HoldOutScan {
  double min_gap = 0.0;
  std::vector<double> max_gap_by_cell; // -inf for j and for cells with no points
  std::vector<std::size_t> count_by_cell;
};

HoldOutScan hold_out_scan_serial(const Eigen::MatrixXd& costs, std::span<const double> psi, int j);
HoldOutScan hold_out_scan_omp(const Eigen::MatrixXd& costs, std::span<const double> psi, int j);
HoldOutScan hold_out_scan(const Eigen::MatrixXd& costs, std::span<const double> psi, int j,
                          Exec exec = Exec::kParallel);

} // namespace fmsos::kernels
