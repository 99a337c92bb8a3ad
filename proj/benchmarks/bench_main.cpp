#include <benchmark/benchmark.h>

#include "clsid/lti/discretize.hpp"
#include "clsid/lti/simulate.hpp"
#include "clsid/lti/state_space.hpp"
#include "clsid/nav/episode.hpp"
#include "clsid/planning/sqp_solver.hpp"
#include "clsid/plant/profile.hpp"
#include "clsid/plant/surrogate_plant.hpp"
#include "clsid/signals/signal.hpp"
#include "clsid/sysid/fit.hpp"

namespace {

using namespace clsid;

void BM_C2dZoh(benchmark::State& state) {
  const auto ss = tf_to_ss_ccf(nominal_core()[0]);
  for (auto _ : state) benchmark::DoNotOptimize(c2d_zoh(ss, 0.0005));
}
BENCHMARK(BM_C2dZoh);

void BM_PlantStep(benchmark::State& state) {
  SurrogatePlant plant(make_profile("cnn"), 0.0005);
  const Eigen::Vector4d cmd(0.5, 0.1, 0.98, 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(plant.step(cmd));
}
BENCHMARK(BM_PlantStep);

void BM_FitTf(benchmark::State& state) {
  SignalSpec spec;
  spec.kind = SignalKind::Chirp;
  spec.duration = static_cast<double>(state.range(0));
  spec.dt = 0.0005;
  spec.amplitude = {-0.5, 1.0};
  const auto u = generate(spec);
  const auto y = simulate_tf(nominal_core()[0], u, spec.dt);
  FitConfig cfg = default_structure(Channel::Vx);
  cfg.kstep = 0;
  for (auto _ : state) benchmark::DoNotOptimize(fit_tf(u, y, spec.dt, cfg));
}
BENCHMARK(BM_FitTf)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_NmpcSolve(benchmark::State& state) {
  const auto model = planner_model(nominal_core(), 0.5, 0.1);
  const NmpcParams params;
  const Scenario sc = arch_scenario();
  Eigen::Vector4d cruise = params.u_nominal;
  cruise(0) = 0.8;
  const auto prob = build_problem(sc, model, params, model.equilibrium(cruise), {2.0, 0.0, 0.0});
  for (auto _ : state) benchmark::DoNotOptimize(solve(prob));
}
BENCHMARK(BM_NmpcSolve)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
