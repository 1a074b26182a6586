#include <benchmark/benchmark.h>

#include "vdpsync/classical.hpp"
#include "vdpsync/designer.hpp"
#include "vdpsync/wigner.hpp"

using namespace vdpsync;

namespace {

classical::ClassicalParams cparams() {
  return classical::ClassicalParams::from_dimensionless(1.0, 0.5, 1.5, 1.05);
}

fock::QuantumParams qparams(int dim = 40) {
  fock::QuantumParams p;
  p.kappa1 = 1.0;
  p.kappa2 = 0.05;
  p.dim = dim;
  return p;
}

void bm_classical_integrate_period(benchmark::State& state) {
  const auto p = cparams();
  const auto drive = classical::DrivingSignal::sinusoid(p.eps0, p.omega);
  for (auto _ : state) {
    auto traj = classical::integrate({0.1, 0.0}, drive, 1.0, 1e-4, p, {1e3, 1 << 20});
    benchmark::DoNotOptimize(traj.points.back());
  }
}
BENCHMARK(bm_classical_integrate_period);

void bm_classical_shooting(benchmark::State& state) {
  const auto p = cparams();
  const auto b = classical::find_branch_point(p, 50.125, 1e-3);
  const classical::PathBoundary boundary{0.0, b.point.y, b.y_slope};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        classical::shoot_gamma(0.0, b.point.x, boundary, 0.25, 1e-4, p));
  }
}
BENCHMARK(bm_classical_shooting);

void bm_master_rhs(benchmark::State& state) {
  const auto p = qparams(static_cast<int>(state.range(0)));
  const lindblad::LindbladEngine engine(p);
  const auto rho = fock::coherent_state({-1.0, 1.0}, p.dim);
  for (auto _ : state) {
    benchmark::DoNotOptimize(engine.rhs(rho.m, 1.0, 0.0));
  }
}
BENCHMARK(bm_master_rhs)->Arg(20)->Arg(40)->Arg(80);

void bm_propagate_unit_time(benchmark::State& state) {
  const auto p = qparams();
  const auto rho = fock::coherent_state({-1.0, 1.0}, p.dim);
  lindblad::PropagateOptions opts;
  opts.observable_stride = 1 << 20;
  const auto schedule = lindblad::ControlSchedule::constant(1.0, 0.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lindblad::propagate(rho, schedule, 1.0, p, opts));
  }
}
BENCHMARK(bm_propagate_unit_time);

void bm_trace_distance(benchmark::State& state) {
  const auto a = fock::coherent_state({-1.0, 1.0}, 40);
  const auto b = fock::coherent_state({0.5, -0.2}, 40);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lindblad::trace_distance(a, b));
  }
}
BENCHMARK(bm_trace_distance);

void bm_wigner_step(benchmark::State& state) {
  const auto p = qparams();
  wigner::PDEConfig cfg;
  cfg.points = static_cast<int>(state.range(0));
  cfg.half_width = 6.5;
  wigner::WignerSolver solver(p, cfg);
  auto grid = wigner::initialize_coherent({-1.0, 1.0}, cfg);
  for (auto _ : state) {
    solver.step(grid, 1.0, 0.0);
    benchmark::DoNotOptimize(grid.values.data());
  }
}
BENCHMARK(bm_wigner_step)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
