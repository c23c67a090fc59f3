#include <cmath>
#include <random>

#include <doctest.h>

#include "modsim/fluid.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace modsim;

namespace {

// Single type, lambda = 1, mu = 0.5, N = 1, costs +-1 equiprobable.
EnvConfig saturated_env(Period horizon, Period lifetime) {
  EnvConfig env;
  env.horizon = horizon;
  env.types.push_back(
      {0, lifetime, 0.5, CostDistribution::two_point(1.0, -1.0, 0.5), {}});
  env.arrival_rates.push_back(Schedule::constant(1.0));
  env.capacity = Schedule::constant(1.0);
  env.r_max = 1.0;
  env.sigma_max = 1.0;
  return env;
}

// Arrivals only while capacity is zero, capacity only after every lifetime
// has expired; unit idiosyncrasy rate.
EnvConfig disjoint_phases_env(Period horizon, Period lifetime) {
  EnvConfig env;
  env.horizon = horizon;
  env.types.push_back(
      {0, lifetime, 1.0, CostDistribution::two_point(2.0, -2.0, 0.5), {}});
  Period arrivals_end = (horizon - lifetime) / 2;      // inclusive
  Period capacity_start = (horizon + lifetime) / 2;    // first active period
  env.arrival_rates.push_back(Schedule({{1, 1.0}, {arrivals_end + 1, 0.0}}));
  env.capacity = Schedule({{1, 0.0}, {capacity_start, 1.0}});
  env.r_max = 2.0;
  env.sigma_max = 2.0;
  return env;
}

}  // namespace

TEST_CASE("saturated instance: per-period benchmark admits half") {
  EnvConfig env = saturated_env(2100, 100);
  FluidSolution sol = solve_w_fluid(env, 1);
  // a(t) = 0.5 every period, L*(1,T) = 0.5 * r * l * T.
  CHECK(sol.objective ==
        doctest::Approx(0.5 * 0.5 * 100.0 * 2100.0).epsilon(1e-12));
  for (const auto& win : sol.windows) {
    REQUIRE(win.admitted_mass.size() == 1);
    CHECK(win.admitted_mass[0] == doctest::Approx(0.5).epsilon(1e-12));
  }
  CHECK(sol.admit_probability(0, 1) == doctest::Approx(0.5));
}

TEST_CASE("disjoint phases: whole-horizon window erases the loss") {
  EnvConfig env = disjoint_phases_env(2100, 100);
  REQUIRE(validate_env(env).empty());
  FluidSolution loose = solve_w_fluid(env, env.horizon);
  CHECK(loose.objective == doctest::Approx(0.0).epsilon(1e-9));

  FluidSolution tight = solve_w_fluid(env, 1);
  // No period has both arrivals and capacity: every arrival is lost.
  double expected = 1.0 * 100.0 * static_cast<double>((2100 - 100) / 2);
  CHECK(tight.objective == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("objective recomputes from the stored masses") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 20; ++i) {
    EnvConfig env = testing::random_env(rng, 3, 60);
    FluidSolution sol = solve_w_fluid(env, 1 + Period(rng() % 5));
    double recomputed = 0.0;
    for (const auto& win : sol.windows) {
      for (int k = 0; k < env.num_types(); ++k) {
        CostMoments m = moments(env.types[k].dist);
        recomputed += m.idiosyncrasy_rate * double(env.types[k].lifetime) *
                      (win.arrival_mass[k] - win.admitted_mass[k]);
      }
      // Window capacity constraint holds.
      double budget = 0.0;
      for (Period t = win.t_begin; t <= win.t_end; ++t)
        budget += env.capacity_at(t);
      double used = 0.0;
      for (double s : win.slots) used += s;
      CHECK(used <= budget + 1e-9);
      for (int k = 0; k < env.num_types(); ++k)
        CHECK(win.admitted_mass[k] <=
              env.types[k].service_rate * win.slots[k] + 1e-9);
    }
    CHECK(sol.objective == doctest::Approx(recomputed).epsilon(1e-9));
  }
}

TEST_CASE("objective is nonincreasing in the window size") {
  std::mt19937_64 rng(37);
  for (int i = 0; i < 15; ++i) {
    EnvConfig env = testing::random_env(rng, 3, 40);
    double prev = solve_w_fluid(env, 1).objective;
    for (Period w : {Period(2), Period(5), env.horizon}) {
      if (w > env.horizon) continue;
      double cur = solve_w_fluid(env, w).objective;
      CHECK(cur <= prev + 1e-9);
      prev = cur;
    }
  }
}

TEST_CASE("greedy matches the exhaustive LP oracle on small instances") {
  std::mt19937_64 rng(41);
  int cases = 0;
  while (cases < 200) {
    EnvConfig env = testing::random_env(rng, 3, 6);
    Period w = 1 + Period(rng() % 3);
    if (w > env.horizon) continue;
    double greedy = solve_w_fluid(env, w).objective;
    double oracle = testing::brute_force_w_fluid(env, w);
    CHECK(greedy == doctest::Approx(oracle).epsilon(1e-6));
    ++cases;
  }
}

TEST_CASE("perturbing the greedy allocation never improves it") {
  std::mt19937_64 rng(43);
  for (int i = 0; i < 20; ++i) {
    EnvConfig env = testing::random_env(rng, 3, 30);
    FluidSolution sol = solve_w_fluid(env, 3);
    for (const auto& win : sol.windows) {
      const int num_types = env.num_types();
      std::vector<double> value(num_types);
      for (int k = 0; k < num_types; ++k) {
        CostMoments m = moments(env.types[k].dist);
        value[k] = m.idiosyncrasy_rate * double(env.types[k].lifetime);
      }
      auto admitted_value = [&](const std::vector<double>& slots) {
        double total = 0.0;
        for (int k = 0; k < num_types; ++k)
          total += value[k] * std::min(env.types[k].service_rate * slots[k],
                                       win.arrival_mass[k]);
        return total;
      };
      double base = admitted_value(win.slots);
      const double eps = 1e-4;
      for (int from = 0; from < num_types; ++from) {
        for (int to = 0; to < num_types; ++to) {
          if (from == to || win.slots[from] < eps) continue;
          std::vector<double> perturbed = win.slots;
          perturbed[from] -= eps;
          perturbed[to] += eps;
          CHECK(admitted_value(perturbed) <= base + 1e-9);
        }
      }
    }
  }
}

TEST_CASE("prefix objective accumulates window by window") {
  EnvConfig env = saturated_env(100, 10);
  FluidSolution sol = solve_w_fluid(env, 1);
  CHECK(sol.objective_prefix(0) == 0.0);
  CHECK(sol.objective_prefix(env.horizon) == doctest::Approx(sol.objective));
  // Uniform instance: loss accrues linearly one period at a time.
  CHECK(sol.objective_prefix(50) == doctest::Approx(0.5 * sol.objective));
  double prev = 0.0;
  for (Period t = 1; t <= env.horizon; ++t) {
    double cur = sol.objective_prefix(t);
    CHECK(cur >= prev - 1e-12);
    prev = cur;
  }
}

TEST_CASE("admission probabilities locate the right window") {
  EnvConfig env = disjoint_phases_env(2100, 100);
  FluidSolution whole = solve_w_fluid(env, env.horizon);
  // Whole-horizon window admits everything that arrives.
  CHECK(whole.admit_probability(0, 1) == doctest::Approx(1.0));
  CHECK(whole.admit_probability(0, 1000) == doctest::Approx(1.0));
  // Out-of-range periods admit nothing.
  CHECK(whole.admit_probability(0, 0) == 0.0);
  CHECK(whole.admit_probability(0, 9999) == 0.0);
  FluidSolution tight = solve_w_fluid(env, 1);
  CHECK(tight.admit_probability(0, 500) == 0.0);  // no same-period capacity
}

TEST_CASE("degenerate window sizes fault") {
  EnvConfig env = saturated_env(10, 5);
  CHECK_THROWS(solve_w_fluid(env, 0));
  CHECK_THROWS(solve_w_fluid(env, -3));
  // w beyond the horizon collapses to the whole-horizon window.
  FluidSolution sol = solve_w_fluid(env, 99);
  REQUIRE(sol.windows.size() == 1);
  CHECK(sol.windows[0].t_begin == 1);
  CHECK(sol.windows[0].t_end == 10);
}

TEST_CASE("average regret arithmetic") {
  EnvConfig env = saturated_env(100, 10);
  FluidSolution sol = solve_w_fluid(env, 1);
  CHECK(average_regret(sol.objective, sol, env.horizon) ==
        doctest::Approx(0.0));
  // Antitone in L*: windows weaken constraints, so regret can only grow.
  FluidSolution loose = solve_w_fluid(env, env.horizon);
  CHECK(average_regret(1000.0, loose, env.horizon) >=
        average_regret(1000.0, sol, env.horizon) - 1e-12);
}

TEST_CASE("threshold stationary loss closed form") {
  CHECK(threshold_stationary(100, 0) == doctest::Approx(50.0));
  CHECK(threshold_stationary(100, 1) == doctest::Approx(100.0 / 6.0));
  CHECK(threshold_stationary(9, 0) == doctest::Approx(4.5));

  for (Period lifetime : {Period(25), Period(100), Period(400)}) {
    double best = std::numeric_limits<double>::infinity();
    for (std::int64_t theta = 0; theta <= 10 * lifetime; ++theta)
      best = std::min(best, threshold_stationary(lifetime, theta));
    CHECK(best >= std::sqrt(double(lifetime)) / 6.0);
  }
}

TEST_CASE("threshold simulation tracks the closed form") {
  // Smoke version of the acceptance check: one lifetime, tight tolerance.
  Period lifetime = 25;
  std::int64_t theta = 5;
  double want = threshold_stationary(lifetime, theta);
  double total = 0.0;
  const int reps = 16;
  for (int r = 0; r < reps; ++r)
    total += threshold_sim_average_loss(lifetime, theta, 1000000, 900 + r);
  CHECK(total / reps == doctest::Approx(want).epsilon(0.02));
}
