#include <benchmark/benchmark.h>

#include "modsim/contextual.hpp"
#include "modsim/fluid.hpp"
#include "modsim/learning.hpp"
#include "modsim/policies.hpp"
#include "modsim/sim.hpp"

namespace {

modsim::EnvConfig duty_cycle_env(modsim::Period horizon) {
  using namespace modsim;
  EnvConfig env;
  env.horizon = horizon;
  env.types.push_back({0, 500, 0.05, CostDistribution::normal(-1.0, 1.0), {}});
  env.types.push_back({1, 500, 0.05, CostDistribution::normal(0.1, 1.0), {}});
  env.arrival_rates.push_back(Schedule::constant(0.2));
  env.arrival_rates.push_back(Schedule::constant(0.4));
  std::vector<ScheduleSegment> cap;
  for (Period start = 1; start <= horizon; start += 500) {
    cap.push_back({start, 9.0});
    cap.push_back({start + 400, 2.0});
  }
  env.capacity = Schedule(cap);
  env.r_max = 1.2;
  env.sigma_max = 1.0;
  return env;
}

void bm_run_bacid(benchmark::State& state) {
  modsim::EnvConfig env = duty_cycle_env(state.range(0));
  for (auto _ : state) {
    modsim::BacidPolicy policy(env);
    modsim::Trace trace = modsim::run(env, policy, 7);
    benchmark::DoNotOptimize(trace.posts.size());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_run_bacid)->Arg(10000)->Arg(50000)->Unit(benchmark::kMillisecond);

void bm_run_olbacid(benchmark::State& state) {
  modsim::EnvConfig env = duty_cycle_env(state.range(0));
  for (auto _ : state) {
    modsim::OlbacidPolicy policy(env);
    modsim::Trace trace = modsim::run(env, policy, 7);
    benchmark::DoNotOptimize(trace.posts.size());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_run_olbacid)->Arg(10000)->Unit(benchmark::kMillisecond);

void bm_fluid_solve(benchmark::State& state) {
  modsim::EnvConfig env = duty_cycle_env(50000);
  for (auto _ : state) {
    modsim::FluidSolution sol = modsim::solve_w_fluid(env, state.range(0));
    benchmark::DoNotOptimize(sol.objective);
  }
}
BENCHMARK(bm_fluid_solve)->Arg(1)->Arg(100)->Unit(benchmark::kMillisecond);

void bm_ridge_update(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  modsim::RidgeState ridge(dim, 1.0);
  Eigen::VectorXd phi = Eigen::VectorXd::Constant(dim, 1.0 / std::sqrt(dim));
  std::int64_t i = 0;
  for (auto _ : state) {
    ridge.update(phi, (i++ % 2) ? 1.0 : -1.0);
    benchmark::DoNotOptimize(ridge.theta_keep());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_ridge_update)->Arg(4)->Arg(16);

void bm_threshold_sim(benchmark::State& state) {
  for (auto _ : state) {
    double loss = modsim::threshold_sim_average_loss(100, 10, state.range(0), 3);
    benchmark::DoNotOptimize(loss);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_threshold_sim)->Arg(1000000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
