// Random environment/policy generators for property-style tests.
#pragma once

#include <memory>
#include <random>
#include <vector>

#include "modsim/env.hpp"
#include "modsim/policies.hpp"
#include "modsim/sim.hpp"

namespace modsim::testing {

/// Small random environment with valid invariants: K <= max_types types,
/// horizon <= max_horizon, random two-point/normal costs and a random
/// piecewise-constant capacity.
inline EnvConfig random_env(std::mt19937_64& rng, int max_types = 3,
                            Period max_horizon = 120) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  EnvConfig env;
  int num_types = 1 + static_cast<int>(rng() % max_types);
  env.horizon = 2 + static_cast<Period>(rng() % (max_horizon - 1));

  double n_max = 1.0 + static_cast<double>(rng() % 3);
  double lambda_budget = 1.0;
  for (int k = 0; k < num_types; ++k) {
    TypeParams tp;
    tp.type_id = k;
    tp.lifetime = 1 + static_cast<Period>(rng() % 40);
    tp.service_rate = (0.1 + 0.9 * unit(rng)) / n_max;
    if (rng() % 2) {
      double v_pos = 0.2 + unit(rng);
      double v_neg = -(0.2 + unit(rng));
      tp.dist = CostDistribution::two_point(v_pos, v_neg, unit(rng));
    } else {
      tp.dist = CostDistribution::normal(2.0 * unit(rng) - 1.0,
                                         0.3 + 0.7 * unit(rng));
    }
    env.types.push_back(tp);

    double lam = lambda_budget * unit(rng) * 0.8;
    lambda_budget -= lam;
    // Two-segment arrival schedule.
    Period split = 1 + static_cast<Period>(rng() % env.horizon);
    if (split > 1 && split < env.horizon && (rng() % 2)) {
      env.arrival_rates.push_back(
          Schedule({{1, lam}, {split, lam * unit(rng)}}));
    } else {
      env.arrival_rates.push_back(Schedule::constant(lam));
    }
  }
  Period cap_split = 1 + static_cast<Period>(rng() % env.horizon);
  if (cap_split > 1 && cap_split < env.horizon && (rng() % 2)) {
    env.capacity = Schedule(
        {{1, n_max}, {cap_split, static_cast<double>(rng() % (int(n_max) + 1))}});
  } else {
    env.capacity = Schedule::constant(n_max);
  }
  double worst_abs = 1.0, worst_sigma2 = 1.0;
  for (const auto& tp : env.types) {
    worst_abs = std::max(worst_abs, tp.dist.abs_mean());
    worst_sigma2 = std::max(worst_sigma2, tp.dist.sigma2);
  }
  env.r_max = worst_abs + 0.5;
  env.sigma_max = std::sqrt(worst_sigma2);
  env.U = 1.0;
  return env;
}

/// Adversarial-but-valid policy: random classification, random admission
/// (review/label respecting the capacity-one label queue), and a uniformly
/// random queued post as the schedule. Exercises engine invariants far from
/// the shipped policies' behavior.
class ChaosPolicy : public Policy {
 public:
  explicit ChaosPolicy(std::uint64_t seed) : rng_(seed) {}
  std::string name() const override { return "chaos"; }

  Decision decide(const SimState& state, const EnvConfig&,
                  const std::optional<Arrival>& arrival,
                  std::mt19937_64&) override {
    Decision d;
    if (arrival) {
      d.classify = (rng_() % 2) ? Classification::keep : Classification::remove;
      switch (rng_() % 3) {
        case 0: break;
        case 1: d.admit = AdmitTarget::review; break;
        case 2:
          d.admit = state.label_occupied() ? AdmitTarget::review
                                           : AdmitTarget::label;
          break;
      }
    }
    // Collect every schedulable post (queues plus this period's admission).
    std::vector<PostId> candidates;
    for (int k = 0; k < state.num_types(); ++k)
      for (const auto& entry : state.queue(k)) candidates.push_back(entry.post);
    if (state.label_occupied()) candidates.push_back(state.label_entry()->post);
    if (arrival && d.admit != AdmitTarget::none)
      candidates.push_back(arrival->post_id);
    if (!candidates.empty() && (rng_() % 4) != 0)
      d.schedule = candidates[rng_() % candidates.size()];
    return d;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace modsim::testing
