#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "modsim/env.hpp"

namespace modsim {

/// One window of the fluid relaxation: totals over [t_begin, t_end].
struct FluidWindow {
  Period t_begin = 1;  // inclusive
  Period t_end = 1;    // inclusive
  std::vector<double> arrival_mass;   // sum of lambda_k(t) over the window
  std::vector<double> admitted_mass;  // optimal admitted mass per type
  std::vector<double> slots;          // reviewer-slots allocated per type
  double unadmitted_loss = 0.0;       // sum_k r_k*l_k*(arrival - admitted)
};

/// Optimal solution of the windowed fluid relaxation: a deterministic lower
/// benchmark where admitted mass within each window may not exceed the
/// service capacity allocated to its type in that window.
struct FluidSolution {
  Period window_size = 1;
  Period horizon = 0;
  std::vector<FluidWindow> windows;
  double objective = 0.0;  // total unadmitted idiosyncrasy loss

  /// Probability with which the benchmark admits a type-k arrival in
  /// period t (admitted mass spread proportionally to arrivals).
  double admit_probability(int k, Period t) const;
  /// Objective restricted to the first `t` periods. A window straddling t
  /// contributes its covered-period share; exact for w = 1.
  double objective_prefix(Period t) const;
};

/// Solve the width-w fluid relaxation exactly.
///
/// The relaxation minimizes over all partitions of the horizon into
/// windows of size at most w. Windows decouple given the partition, and
/// within one window the service constraints collapse to a reviewer-slot
/// budget solved by greedy fractional-knapsack allocation (value per slot
/// r_k*l_k*mu_k, capped by each type's arrival mass). The outer minimum
/// over partitions is a shortest-path DP over window endpoints: O(T*w)
/// window evaluations, or a single whole-horizon window when w >= T.
FluidSolution solve_w_fluid(const EnvConfig& env, Period w);

/// Average regret of a policy: mean realized loss per period minus the
/// fluid benchmark per period.
double average_regret(double mean_loss, const FluidSolution& fluid,
                      Period horizon);

/// Long-run average loss of the deterministic threshold policy that admits
/// while the queue is below `theta`, on the single-type instance with
/// arrival and service probability 1/2 and unit idiosyncrasy rate:
///   f(theta) = l/(4*theta+2) + (1/(2*theta+1)) * sum_{q<theta} min(q, l),
/// evaluated from the exact stationary distribution of the birth-death
/// chain (integer numerator over integer denominator).
double threshold_stationary(Period lifetime, std::int64_t theta);

/// Simulated counterpart of threshold_stationary: runs the queue chain for
/// `periods` steps and averages the per-period conditional loss
/// (1/2)*(l*1{Q=theta} + min(Q,l)*1{Q<theta}), i.e. the expectation of the
/// realized loss increment over the arrival coin given the queue state.
double threshold_sim_average_loss(Period lifetime, std::int64_t theta,
                                  std::int64_t periods, std::uint64_t seed);

void to_json(nlohmann::json& j, const FluidSolution& s);

}  // namespace modsim
