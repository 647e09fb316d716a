// Serial reference vs OpenMP kernels. Arg 0 selects the policy.
#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "mvt/kernels.hpp"
#include "mvt/transport.hpp"
#include "mvt/velocity_field.hpp"

using namespace mvt;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) == 0 ? Exec::serial : Exec::parallel; }

std::vector<Point> random_points(std::size_t n) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Point> pts(n);
  for (auto& p : pts) {
    p[0] = u(rng);
    p[1] = u(rng);
  }
  return pts;
}

GridDensity gaussian_grid(const Domain& d, int cells) {
  Point lo, hi;
  lo[0] = lo[1] = -3.0;
  hi[0] = hi[1] = 3.0;
  return grid_from_function(d, cells, lo, hi, 2.0,
                            [](const Point& x) { return std::exp(-0.5 * (x[0] * x[0] + x[1] * x[1])); });
}

void BM_advect_points(benchmark::State& st) {
  const auto d = make_domain(DomainKind::euclidean, 2);
  const auto v = make_field("rotation2d", {1.0}, d);
  const auto in = random_points(static_cast<std::size_t>(st.range(1)));
  std::vector<Point> out(in.size());
  for (auto _ : st) {
    kernels::advect_points(v, 0.0, 1.0, 1e-2, in, out, exec_of(st));
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(1));
}

void BM_trace_feet(benchmark::State& st) {
  const auto d = make_domain(DomainKind::euclidean, 2);
  const auto v = make_field("linear", {-0.5}, d);
  const auto g = gaussian_grid(d, static_cast<int>(st.range(1)));
  std::vector<FlowSample> feet(g.values.size());
  for (auto _ : st) {
    kernels::trace_feet(v, 1.0, 0.0, 1e-2, g, feet, exec_of(st));
    benchmark::DoNotOptimize(feet.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(feet.size()));
}

void BM_pushforward_density(benchmark::State& st) {
  const auto d = make_domain(DomainKind::euclidean, 2);
  const auto v = make_field("rotation2d", {1.0}, d);
  const auto g = gaussian_grid(d, static_cast<int>(st.range(1)));
  for (auto _ : st) benchmark::DoNotOptimize(pushforward_density(v, 0.0, 0.5, g, 1e-2, exec_of(st)));
}

}  // namespace

BENCHMARK(BM_advect_points)->ArgsProduct({{0, 1}, {1000, 20000}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_trace_feet)->ArgsProduct({{0, 1}, {64, 192}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pushforward_density)->ArgsProduct({{0, 1}, {64, 192}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
