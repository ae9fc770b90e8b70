#include <benchmark/benchmark.h>

#include <cmath>

#include "patlab/phantom.hpp"
#include "patlab/poisson.hpp"
#include "patlab/reconstruct.hpp"
#include "patlab/wave.hpp"

using namespace patlab;

namespace {

InitialState disk_state(const Grid2D& g) {
  PhantomSpec spec;
  spec.features = {{0.45, 0.5, 0.2, 1.0}, {0.65, 0.35, 0.1, 0.5}};
  return make_pressure_phantom(spec, g);
}

SolverConfig short_run() {
  SolverConfig cfg;
  cfg.final_time = 1.0;
  return cfg;
}

}  // namespace

static void BM_Simulate(benchmark::State& state) {
  const Grid2D g = Grid2D::unit_square(static_cast<std::size_t>(state.range(0)));
  const WaveSpeed c = WaveSpeed::constant(g, 1.0, 0.9, 1.1);
  const auto gamma = BoundaryImpedance::uniform(g, 1.0);
  const InitialState s = disk_state(g);
  const SolverConfig cfg = short_run();
  const TimeStepping ts = cfl_timestep(g, c, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(forward_map(c, gamma, s, cfg));
  state.counters["node_steps/s"] = benchmark::Counter(
      static_cast<double>(g.size() * ts.n_steps), benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Simulate)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_Adjoint(benchmark::State& state) {
  const Grid2D g = Grid2D::unit_square(static_cast<std::size_t>(state.range(0)));
  const WaveSpeed c = WaveSpeed::constant(g, 1.0, 0.9, 1.1);
  const auto gamma = BoundaryImpedance::uniform(g, 1.0);
  const SolverConfig cfg = short_run();
  const BoundaryTrace m = forward_map(c, gamma, disk_state(g), cfg);
  for (auto _ : state) benchmark::DoNotOptimize(adjoint_simulate(m, c, gamma, cfg));
}
BENCHMARK(BM_Adjoint)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_SpeedGradient(benchmark::State& state) {
  const Grid2D g = Grid2D::unit_square(static_cast<std::size_t>(state.range(0)));
  const WaveSpeed c = WaveSpeed::constant(g, 1.0, 0.8, 1.2);
  const auto gamma = BoundaryImpedance::uniform(g, 1.0);
  SolverConfig cfg = short_run();
  cfg.reference_speed = 1.2;
  const InitialState s = disk_state(g);
  const BoundaryTrace m = forward_map(WaveSpeed::constant(g, 1.05, 0.8, 1.2), gamma, s, cfg);
  const BoundaryTrace residual = m - forward_map(c, gamma, s, cfg);
  const SpeedParametrization param(g, 4, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gradient_wavespeed(s.u0(), c, residual, gamma, cfg, param));
  }
}
BENCHMARK(BM_SpeedGradient)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_Poisson(benchmark::State& state) {
  const Grid2D g = Grid2D::unit_square(static_cast<std::size_t>(state.range(0)));
  const ScalarField2D f = ScalarField2D::from_function(g, [](double x, double y) {
    return std::sin(3.0 * x) * std::cos(2.0 * y) + x * y;
  });
  for (auto _ : state) benchmark::DoNotOptimize(poisson_dirichlet_solve(f));
}
BENCHMARK(BM_Poisson)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
