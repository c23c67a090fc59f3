#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "modsim/fluid.hpp"
#include "modsim/sim.hpp"

namespace modsim {

/// Queue view used for scheduling: per-type lengths and FIFO heads, with a
/// pending same-period review admission already applied (admission precedes
/// scheduling inside a period).
struct ScheduleView {
  std::vector<std::int64_t> len;
  std::vector<PostId> head;           // -1 when the type queue is empty
  std::vector<std::int64_t> head_seq;
};

ScheduleView make_schedule_view(const SimState& state,
                                const std::optional<Arrival>& pending_review);

/// MaxWeight: earliest post of the type maximizing mu_k * Q_k over types
/// with nonempty queues; ties go to the lowest type index. Empty system
/// gives no schedule.
std::optional<PostId> maxweight_schedule(const ScheduleView& view,
                                         const std::vector<double>& mu);

struct BacidParams {
  std::optional<double> beta;
  /// When the benchmark window w is known, beta = sqrt(w/(K*l_max));
  /// otherwise the default beta = 1/sqrt(K*l_max).
  std::optional<Period> window;
};

/// Balanced admission with known cost distributions: remove iff the mean
/// cost is positive, admit iff beta*r_k*l_k >= Q_k(t) (ties admit), and
/// schedule by MaxWeight.
class BacidPolicy : public Policy {
 public:
  BacidPolicy(const EnvConfig& env, const BacidParams& params = {});
  std::string name() const override { return "bacid"; }
  Decision decide(const SimState& state, const EnvConfig& env,
                  const std::optional<Arrival>& arrival,
                  std::mt19937_64& policy_rng) override;
  double beta() const { return beta_; }

 private:
  double beta_;
  std::vector<CostMoments> moments_;
  std::vector<double> mu_;
};

/// Classifies by the sign of the mean cost, never admits, never schedules.
class AiOnlyPolicy : public Policy {
 public:
  explicit AiOnlyPolicy(const EnvConfig& env);
  std::string name() const override { return "ai_only"; }
  Decision decide(const SimState&, const EnvConfig&,
                  const std::optional<Arrival>&, std::mt19937_64&) override;

 private:
  std::vector<CostMoments> moments_;
};

/// Admits every arrival; schedules by MaxWeight.
class HumanOnlyPolicy : public Policy {
 public:
  explicit HumanOnlyPolicy(const EnvConfig& env);
  std::string name() const override { return "human_only"; }
  Decision decide(const SimState& state, const EnvConfig& env,
                  const std::optional<Arrival>& arrival,
                  std::mt19937_64&) override;

 private:
  std::vector<CostMoments> moments_;
  std::vector<double> mu_;
};

/// Admits exactly the arrivals of one fixed type; schedules by MaxWeight.
class StaticTypePolicy : public Policy {
 public:
  StaticTypePolicy(const EnvConfig& env, int admitted_type);
  std::string name() const override;
  Decision decide(const SimState& state, const EnvConfig& env,
                  const std::optional<Arrival>& arrival,
                  std::mt19937_64&) override;

 private:
  int admitted_type_;
  std::vector<CostMoments> moments_;
  std::vector<double> mu_;
};

/// Admits a type-k arrival with probability a*_k(t)/lambda_k(t) taken from
/// the per-period fluid solution; congestion-unaware but schedule-aware of
/// the time-varying environment. Schedules by MaxWeight.
class DynamicFluidPolicy : public Policy {
 public:
  DynamicFluidPolicy(const EnvConfig& env, FluidSolution fluid);
  std::string name() const override { return "dynamic_fluid"; }
  Decision decide(const SimState& state, const EnvConfig& env,
                  const std::optional<Arrival>& arrival,
                  std::mt19937_64& policy_rng) override;

 private:
  FluidSolution fluid_;
  std::vector<CostMoments> moments_;
  std::vector<double> mu_;
};

}  // namespace modsim
