#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "modsim/learning.hpp"
#include "modsim/sim.hpp"

namespace modsim {

/// Ridge regression state over reviewed posts with two stacked targets,
/// the kept-cost c^+ and the raw negative part c^- of each reviewed cost.
///
/// theta_keep   solves (kI + sum phi phi^T) theta = sum phi c^+
/// theta_remove is the negation of the c^- column's solution, so that
///              phi^T theta_remove estimates the removal cost E[-(c^-)] >= 0.
///
/// The inverse is maintained by rank-one updates with a full re-solve every
/// 1024 updates; the drift against a fresh solve stays within 1e-9.
class RidgeState {
 public:
  RidgeState(int dim, double kappa);

  void update(const Eigen::VectorXd& phi, double cost);

  const Eigen::VectorXd& theta_keep() const { return theta_keep_; }
  const Eigen::VectorXd& theta_remove() const { return theta_remove_; }
  Eigen::VectorXd theta_mean() const { return theta_keep_ - theta_remove_; }

  /// ||phi||_{V^-1}, the elliptical norm driving confidence widths.
  double vinv_norm(const Eigen::VectorXd& phi) const;
  /// ||theta||_V, used by coverage checks.
  double v_norm(const Eigen::VectorXd& theta) const;

  std::int64_t data_count() const { return count_; }
  int dim() const { return dim_; }
  double kappa() const { return kappa_; }
  const Eigen::MatrixXd& design() const { return v_bar_; }

  /// Distance between the incrementally maintained inverse and a fresh
  /// factorization (max abs entry of V*V_inv - I); used by tests.
  double inverse_drift() const;

 private:
  void resolve();

  int dim_;
  double kappa_;
  std::int64_t count_ = 0;
  int updates_since_resolve_ = 0;
  Eigen::MatrixXd v_bar_;
  Eigen::MatrixXd v_inv_;
  Eigen::VectorXd b_keep_;  // sum phi c^+
  Eigen::VectorXd b_neg_;   // sum phi c^-  (entries <= 0 contributions)
  Eigen::VectorXd theta_keep_;
  Eigen::VectorXd theta_remove_;
};

/// Confidence radius for each ridge column at confidence level delta:
///   B_delta(n) = sigma_max * sqrt(2 d ln((1 + n U^2 / kappa)/delta))
///                + sqrt(kappa) * U,
/// where n counts reviewed posts.
double b_delta(std::int64_t data_count, int dim, double feature_bound,
               double kappa, double sigma_max, double delta);

/// Contextual confidence bounds at feature phi with radius B:
///   half-width of the mean-cost interval is 2*B*||phi||_{V^-1} (the two
///   column ellipsoids are independent, so the difference set has radius
///   2B exactly), and
///   r_bar = clip_{[0, r_max]}( min(phi' theta_keep, phi' theta_remove)
///                              + B*||phi||_{V^-1} )
/// because a max of min(f,g) over a product of ellipsoids splits into
/// min(max f, max g). The clip to [0, r_max] is a deliberate strengthening:
/// a negative admission rate is meaningless and the queue bounds rely on
/// r_bar <= r_max.
ConfBounds contextual_conf(const RidgeState& state, const Eigen::VectorXd& phi,
                           double b_radius, double r_max);

/// Types aggregated by scaled service rate; scheduling treats each group as
/// one queue with the group's minimum rate as proxy.
struct GroupPartition {
  std::vector<int> group_of;       // type -> group
  std::vector<double> proxy_rate;  // min member service rate per group
  double aggregation_gap = 0.0;    // max within-group N_max*(mu_k - proxy)

  int num_groups() const { return static_cast<int>(proxy_rate.size()); }
};

/// Segment types by N_max*mu_k into half-open intervals (0,zeta], (zeta,
/// 2*zeta], ...; empty groups are pruned and the gap is recomputed from the
/// actual members (so it is <= zeta, often smaller).
GroupPartition make_partition(const std::vector<TypeParams>& types,
                              double zeta, double n_max);

/// Type-aggregated MaxWeight: pick the group maximizing proxy rate times
/// total group queue length (ties to the lowest group id), then the
/// earliest-admitted waiting post across that group's types (FCFS within
/// the group).
std::optional<PostId> group_maxweight_schedule(const ScheduleView& view,
                                               const GroupPartition& partition);

struct ColbacidParams {
  std::optional<double> beta;   // default 1/sqrt(G*l_max)
  std::optional<double> gamma;  // default = beta
  std::optional<double> delta;  // default min(gamma, 0.5/T)
  std::optional<double> kappa;  // default max(1, U^2)
  std::optional<double> zeta;   // interval width when no explicit groups
  std::optional<std::vector<int>> groups;  // explicit type -> group map
  std::optional<double> sigma_max;
  std::optional<double> r_max;
  /// Optional dense feature matrix (one row per type) overriding the env's.
  std::optional<std::vector<std::vector<double>>> features;
};

/// Contextual learning with label-driven admission, group-level optimistic
/// admission (beta * r_bar_k * l_k >= group queue length) and
/// type-aggregated MaxWeight with FCFS inside each group.
class ColbacidPolicy : public Policy {
 public:
  ColbacidPolicy(const EnvConfig& env, const ColbacidParams& params = {});
  std::string name() const override { return "colbacid"; }
  Decision decide(const SimState& state, const EnvConfig& env,
                  const std::optional<Arrival>& arrival,
                  std::mt19937_64&) override;
  void on_review(int type_id, double cost) override;

  ConfBounds bounds_for(int k) const;
  const RidgeState& ridge() const { return ridge_; }
  const GroupPartition& partition() const { return partition_; }
  double beta() const { return beta_; }
  double gamma() const { return gamma_; }

 private:
  std::int64_t group_queue_len(const SimState& state, int g) const;

  GroupPartition partition_;
  double beta_, gamma_, delta_, kappa_, sigma_max_, r_max_, feature_bound_;
  std::vector<Eigen::VectorXd> features_;
  RidgeState ridge_;
  std::vector<double> mu_;
};

}  // namespace modsim
