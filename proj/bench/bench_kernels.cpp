// Serial reference against the OpenMP path for the sample sweeps that
// dominate the verification runs. Both paths return identical values, so the
// benchmark only reports time.

#include <benchmark/benchmark.h>

#include <random>

#include "hemiglue/deformation.hpp"
#include "hemiglue/functional.hpp"
#include "hemiglue/parallel.hpp"
#include "hemiglue/quadrature.hpp"
#include "hemiglue/sphere.hpp"

using namespace hemi;

namespace {

Exec policy(const benchmark::State& state) { return state.range(1) ? Exec::Parallel : Exec::Serial; }

std::vector<Point> ball_points(int n, std::size_t count) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-0.55, 0.55);
  std::vector<Point> out(count, Point(static_cast<std::size_t>(n)));
  for (Point& p : out)
    for (double& c : p) c = u(rng);
  return out;
}

void scalar_sweep(benchmark::State& state) {
  const MetricField g = round_metric(3);
  const auto pts = ball_points(3, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto r = index_map(pts.size(), [&](std::size_t i) { return scalar_curvature(g, pts[i]); }, policy(state));
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void deformed_scalar_sweep(benchmark::State& state) {
  const EtaSpec spec = choose_c(3);
  const MetricField g0 = family_g0(spec, 0.01);
  const auto pts = ball_points(3, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto r = index_map(pts.size(), [&](std::size_t i) { return scalar_curvature(g0, pts[i]); }, policy(state));
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void functional_on_hemisphere(benchmark::State& state) {
  const MetricField g = family_g0(choose_c(3), 0.01);
  const QuadratureRule hemisphere = hemisphere_rule(3, static_cast<int>(state.range(0)), 12, true);
  const QuadratureRule equator = equator_rule(3, 20, true);
  for (auto _ : state) benchmark::DoNotOptimize(functional_F(g, hemisphere, equator, policy(state)).value);
}

void q_at_nodes(benchmark::State& state) {
  const EtaSpec spec = choose_c(3);
  const auto pts = ball_points(3, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto r = index_map(pts.size(), [&](std::size_t i) { return compute_Q(spec, pts[i]).second; }, policy(state));
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(scalar_sweep)->ArgNames({"points", "parallel"})->ArgsProduct({{256, 2048}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(deformed_scalar_sweep)->ArgNames({"points", "parallel"})->ArgsProduct({{256}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(functional_on_hemisphere)->ArgNames({"radial", "parallel"})->ArgsProduct({{16, 32}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(q_at_nodes)->ArgNames({"points", "parallel"})->ArgsProduct({{64}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
