#include <benchmark/benchmark.h>

#include <cstddef>
#include <vector>

#include "monotest/bootstrap.hpp"
#include "monotest/limit_theory.hpp"
#include "monotest/models.hpp"
#include "monotest/rng.hpp"
#include "monotest/simulation.hpp"
#include "monotest/smooth_estimate.hpp"
#include "monotest/step_process.hpp"

using namespace monotest;

namespace {

const Interval kDom{0.0, 3.0};

std::vector<double> draw(std::size_t n, std::uint64_t seed) {
  RngStream rng = RngStream::from_seed(seed);
  return truncexp_sample(1.0, n, rng);
}

MonotoneStepEstimate grenander(const std::vector<double>& x) {
  return left_slopes(lcm(empirical_cdf(x, kDom)));
}

}  // namespace

static void BM_Lcm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const CumulativeProcess ecdf = empirical_cdf(draw(n, 1), kDom);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lcm(ecdf));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Lcm)->Arg(100)->Arg(1000)->Arg(10000)->Complexity();

static void BM_L1Distance(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const MonotoneStepEstimate f = grenander(draw(n, 2));
  const MonotoneStepEstimate g = grenander(draw(n, 3));
  for (auto _ : state) {
    benchmark::DoNotOptimize(l1_distance(f, g, kDom));
  }
}
BENCHMARK(BM_L1Distance)->Arg(100)->Arg(1000)->Arg(10000);

static void BM_SmoothEvaluate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const SmoothEstimate sm =
      SmoothEstimate::of_monotone(grenander(draw(n, 4)), 0.4, BoundaryCorrection::boundary_kernel);
  double t = 0.0;
  for (auto _ : state) {
    t += 0.003;
    if (t > 3.0) t -= 3.0;
    benchmark::DoNotOptimize(sm(t));
  }
}
BENCHMARK(BM_SmoothEvaluate)->Arg(100)->Arg(1000);

static void BM_SelectBandwidth(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::vector<double> x = draw(n, 5);
  const CumulativeProcess pooled = empirical_cdf(x, kDom);
  const MonotoneStepEstimate f = grenander(x);
  const std::vector<double> grid = default_bandwidth_grid(kDom);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        select_bandwidth(f, BoundaryCorrection::boundary_kernel, pooled, n, grid));
  }
}
BENCHMARK(BM_SelectBandwidth)->Arg(100)->Arg(300);

static void BM_BootstrapDensity(benchmark::State& state) {
  const std::vector<std::size_t> sizes{50, 50, 50};
  std::vector<double> pooled;
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    const auto x = draw(sizes[j], 6 + j);
    pooled.insert(pooled.end(), x.begin(), x.end());
  }
  const CalibratedCurve curve = make_density(
      SmoothEstimate::of_monotone(grenander(pooled), 0.4, BoundaryCorrection::boundary_kernel));
  const DensityReference ref = make_density_reference(curve, kDom);
  BootstrapConfig cfg;
  cfg.replications = static_cast<std::size_t>(state.range(0));
  cfg.bandwidth = 0.4;
  cfg.threads = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bootstrap_density(sizes, kDom, ref, cfg));
  }
}
BENCHMARK(BM_BootstrapDensity)->Arg(8)->Arg(64);

static void BM_ZetaSolver(benchmark::State& state) {
  RngStream rng = RngStream::from_seed(7);
  const BrownianGrid path = BrownianGrid::sample(5.0, 0.005, rng);
  for (auto _ : state) {
    const ZetaSolver solver(path);
    double acc = 0.0;
    for (int k = 0; k < 24; ++k) acc += solver.zeta(0.1 * static_cast<double>(k));
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_ZetaSolver);

BENCHMARK_MAIN();
