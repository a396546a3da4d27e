// Serial reference vs OpenMP kernels on a reference-cloud sized problem.
// Run with OMP_NUM_THREADS set to compare scaling.
#include <benchmark/benchmark.h>

#include <vector>

#include "fmsos/kernels.hpp"
#include "fmsos/random.hpp"
#include "fmsos/sphere.hpp"

namespace {

using fmsos::kernels::Exec;
using fmsos::kernels::PointMatrix;

PointMatrix random_points(int p, std::size_t n, std::uint64_t seed) {
  fmsos::Rng rng = fmsos::make_rng(seed);
  PointMatrix out(p + 1, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) out.col(static_cast<Eigen::Index>(i)) = fmsos::sample_uniform_sphere(p, rng).coords();
  return out;
}

struct Problem {
  PointMatrix cloud;
  PointMatrix atoms;
  Eigen::MatrixXd costs;
  std::vector<double> psi;

  Problem(std::size_t m, std::size_t k) : cloud(random_points(2, m, 1)), atoms(random_points(2, k, 2)), psi(k) {
    fmsos::kernels::cost_table(cloud, atoms, costs, Exec::kSerial);
    fmsos::Rng rng = fmsos::make_rng(3);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (double& v : psi) v = u(rng);
  }
};

Exec exec_of(const benchmark::State& state) { return state.range(2) == 0 ? Exec::kSerial : Exec::kParallel; }

void BM_CostTable(benchmark::State& state) {
  Problem pr(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  Eigen::MatrixXd out;
  for (auto _ : state) {
    fmsos::kernels::cost_table(pr.cloud, pr.atoms, out, exec_of(state));
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}

void BM_Assign(benchmark::State& state) {
  Problem pr(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  std::vector<int> labels(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    fmsos::kernels::assign(pr.costs, pr.psi, labels, exec_of(state));
    benchmark::DoNotOptimize(labels.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}

void BM_HoldOutScan(benchmark::State& state) {
  Problem pr(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) {
    auto scan = fmsos::kernels::hold_out_scan(pr.costs, pr.psi, 0, exec_of(state));
    benchmark::DoNotOptimize(scan.min_gap);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}

// Args: cloud size, atoms, 0 = serial / 1 = OpenMP.
void kernel_args(benchmark::internal::Benchmark* b) {
  for (long m : {10000L, 100000L}) {
    for (long k : {5L, 20L}) {
      b->Args({m, k, 0});
      b->Args({m, k, 1});
    }
  }
}

} // namespace

BENCHMARK(BM_CostTable)->Apply(kernel_args)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Assign)->Apply(kernel_args)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_HoldOutScan)->Apply(kernel_args)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
