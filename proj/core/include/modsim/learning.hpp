#pragma once

#include <optional>
#include <vector>

#include "modsim/policies.hpp"
#include "modsim/sim.hpp"

namespace modsim {

/// Running sample statistics of reviewed costs for one type.
struct TypeStats {
  std::int64_t n = 0;
  double sum_pos = 0.0;  // sum of c^+
  double sum_neg = 0.0;  // sum of -(c^-)

  void add(double cost) {
    ++n;
    if (cost > 0) sum_pos += cost;
    else sum_neg -= cost;
  }
  double r_hat_keep() const { return n == 0 ? 0.0 : sum_pos / double(n); }
  double r_hat_remove() const { return n == 0 ? 0.0 : sum_neg / double(n); }
  double h_hat() const { return r_hat_keep() - r_hat_remove(); }
};

struct ConfBounds {
  double h_lo = 0.0;
  double h_hi = 0.0;
  double r_bar = 0.0;
};

/// Confidence bounds for the mean cost and an upper confidence bound for
/// the idiosyncrasy rate:
///   h_lo/h_hi = h_hat -/+ sigma_max*sqrt(8 ln t / n), clipped to +-r_max
///   r_bar     = min(r_max, min(r_hat_keep, r_hat_remove)
///                          + 4*sigma_max*sqrt(ln t / n)).
/// With n = 0 the widths are infinite (a/0 = +inf) and the bounds collapse
/// to (-r_max, +r_max, r_max). No guard is applied at t = 1 (ln 1 = 0);
/// n is necessarily 0 there.
ConfBounds conf_bounds(const TypeStats& stats, Period t, double sigma_max,
                       double r_max);

struct LearningParams {
  std::optional<double> beta;
  std::optional<double> gamma;      // label-driven margin (olbacid only)
  std::optional<double> sigma_max;  // defaults to env.sigma_max
  std::optional<double> r_max;      // defaults to env.r_max
};

/// Optimism-only admission: classify by the sign of the sample mean, admit
/// iff beta * r_bar_k(t) * l_k >= Q_k(t), schedule by MaxWeight. Keeps no
/// label-driven queue at all, so its failure to collect labels for starved
/// types is structural. Types listed in `known_types` use their exact
/// moments in place of estimates (degenerate bounds).
class BacidUcbPolicy : public Policy {
 public:
  BacidUcbPolicy(const EnvConfig& env, const LearningParams& params = {},
                 std::vector<int> known_types = {});
  std::string name() const override { return "bacid_ucb"; }
  Decision decide(const SimState& state, const EnvConfig& env,
                  const std::optional<Arrival>& arrival,
                  std::mt19937_64&) override;
  void on_review(int type_id, double cost) override;

  ConfBounds bounds_for(int k, Period t) const;
  const TypeStats& stats(int k) const { return stats_[k]; }
  double beta() const { return beta_; }

 private:
  double beta_, sigma_max_, r_max_;
  std::vector<TypeStats> stats_;
  std::vector<std::optional<CostMoments>> known_;
  std::vector<double> mu_;
};

/// Optimistic admission plus a capacity-one label-driven queue: when the
/// confidence interval of a type's mean cost straddles (-gamma, gamma) and
/// the label queue is empty, the arrival is admitted for labeling and the
/// label queue is scheduled ahead of everything else (forced scheduling).
class OlbacidPolicy : public Policy {
 public:
  OlbacidPolicy(const EnvConfig& env, const LearningParams& params = {});
  std::string name() const override { return "olbacid"; }
  Decision decide(const SimState& state, const EnvConfig& env,
                  const std::optional<Arrival>& arrival,
                  std::mt19937_64&) override;
  void on_review(int type_id, double cost) override;

  ConfBounds bounds_for(int k, Period t) const;
  const TypeStats& stats(int k) const { return stats_[k]; }
  double beta() const { return beta_; }
  double gamma() const { return gamma_; }

 private:
  double beta_, gamma_, sigma_max_, r_max_;
  std::vector<TypeStats> stats_;
  std::vector<double> mu_;
};

}  // namespace modsim
