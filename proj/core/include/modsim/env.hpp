#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "modsim/cost_model.hpp"

namespace modsim {

using Period = std::int64_t;

/// One piece of a piecewise-constant schedule: `value` applies from period
/// `from_t` (1-based, inclusive) until the next segment starts.
struct ScheduleSegment {
  Period from_t = 1;
  double value = 0.0;
  friend bool operator==(const ScheduleSegment&, const ScheduleSegment&) = default;
};

/// Piecewise-constant time schedule. Segment starts must be strictly
/// increasing and the first must be 1, so every period is covered. Kept as
/// segments, not per-period arrays, so horizon 5e5 configs stay tiny.
class Schedule {
 public:
  Schedule() = default;
  explicit Schedule(std::vector<ScheduleSegment> segments)
      : segments_(std::move(segments)) {}
  static Schedule constant(double value) { return Schedule({{1, value}}); }

  double at(Period t) const;
  const std::vector<ScheduleSegment>& segments() const { return segments_; }
  std::vector<std::string> validate() const;

  friend bool operator==(const Schedule&, const Schedule&) = default;

 private:
  std::vector<ScheduleSegment> segments_;
};

struct TypeParams {
  int type_id = 0;
  Period lifetime = 1;        // periods a post keeps accruing cost
  double service_rate = 0.0;  // per-reviewer completion probability
  CostDistribution dist;
  std::vector<double> feature;  // optional; defaults to one-hot

  friend bool operator==(const TypeParams&, const TypeParams&) = default;
};

struct EnvConfig {
  Period horizon = 0;
  std::vector<Schedule> arrival_rates;  // one schedule per type
  Schedule capacity;                    // reviewer head-count N(t)
  std::vector<TypeParams> types;
  double r_max = 1.0;      // bound on E|c| over all types
  double sigma_max = 1.0;  // shared sub-Gaussian proxy sqrt(sigma2_max)
  double U = 1.0;          // bound on feature and parameter norms

  int num_types() const { return static_cast<int>(types.size()); }
  double arrival_rate(int k, Period t) const { return arrival_rates[k].at(t); }
  double total_arrival_rate(Period t) const;
  double capacity_at(Period t) const { return capacity.at(t); }
  Period max_lifetime() const;
  double max_capacity() const;
  /// Union of all schedule breakpoints, ascending, clipped to [1, horizon].
  std::vector<Period> breakpoints() const;
  /// Feature vector of type k; one-hot of dimension num_types() when the
  /// config does not supply features.
  std::vector<double> feature_of(int k) const;
  int feature_dim() const;

  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

struct Violation {
  std::string where;
  std::string what;
};

/// Checks every EnvConfig invariant and reports all violations with their
/// location. Violations are data, not faults.
std::vector<Violation> validate_env(const EnvConfig& env);

void to_json(nlohmann::json& j, const EnvConfig& env);
void from_json(const nlohmann::json& j, EnvConfig& env);

EnvConfig load_env_file(const std::string& path);

}  // namespace modsim
