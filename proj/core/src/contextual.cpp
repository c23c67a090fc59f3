#include "modsim/contextual.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace modsim {

RidgeState::RidgeState(int dim, double kappa)
    : dim_(dim),
      kappa_(kappa),
      v_bar_(Eigen::MatrixXd::Identity(dim, dim) * kappa),
      v_inv_(Eigen::MatrixXd::Identity(dim, dim) / kappa),
      b_keep_(Eigen::VectorXd::Zero(dim)),
      b_neg_(Eigen::VectorXd::Zero(dim)),
      theta_keep_(Eigen::VectorXd::Zero(dim)),
      theta_remove_(Eigen::VectorXd::Zero(dim)) {
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be > 0");
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
}

void RidgeState::update(const Eigen::VectorXd& phi, double cost) {
  if (!phi.allFinite() || !std::isfinite(cost))
    throw std::invalid_argument("non-finite ridge update");
  v_bar_.noalias() += phi * phi.transpose();
  // Sherman-Morrison rank-one update of the inverse.
  Eigen::VectorXd u = v_inv_ * phi;
  double denom = 1.0 + phi.dot(u);
  v_inv_.noalias() -= (u * u.transpose()) / denom;
  b_keep_ += phi * std::max(cost, 0.0);
  b_neg_ += phi * std::min(cost, 0.0);
  ++count_;
  if (++updates_since_resolve_ >= 1024) resolve();
  theta_keep_ = v_inv_ * b_keep_;
  theta_remove_ = -(v_inv_ * b_neg_);
}

void RidgeState::resolve() {
  v_inv_ = v_bar_.llt().solve(Eigen::MatrixXd::Identity(dim_, dim_));
  updates_since_resolve_ = 0;
}

double RidgeState::vinv_norm(const Eigen::VectorXd& phi) const {
  return std::sqrt(std::max(0.0, phi.dot(v_inv_ * phi)));
}

double RidgeState::v_norm(const Eigen::VectorXd& theta) const {
  return std::sqrt(std::max(0.0, theta.dot(v_bar_ * theta)));
}

double RidgeState::inverse_drift() const {
  return (v_bar_ * v_inv_ - Eigen::MatrixXd::Identity(dim_, dim_))
      .cwiseAbs()
      .maxCoeff();
}

double b_delta(std::int64_t data_count, int dim, double feature_bound,
               double kappa, double sigma_max, double delta) {
  if (!(delta > 0.0 && delta <= 1.0))
    throw std::invalid_argument("delta must lie in (0,1]");
  double log_term = std::log(
      (1.0 + static_cast<double>(data_count) * feature_bound * feature_bound /
                 kappa) /
      delta);
  return sigma_max * std::sqrt(2.0 * static_cast<double>(dim) * log_term) +
         std::sqrt(kappa) * feature_bound;
}

ConfBounds contextual_conf(const RidgeState& state, const Eigen::VectorXd& phi,
                           double b_radius, double r_max) {
  if (b_radius < 0.0) throw std::invalid_argument("negative radius");
  double w = state.vinv_norm(phi);
  double h_hat = phi.dot(state.theta_mean());
  ConfBounds b;
  b.h_lo = std::max(-r_max, h_hat - 2.0 * b_radius * w);
  b.h_hi = std::min(r_max, h_hat + 2.0 * b_radius * w);
  double center = std::min(phi.dot(state.theta_keep()),
                           phi.dot(state.theta_remove()));
  b.r_bar = std::clamp(center + b_radius * w, 0.0, r_max);
  return b;
}

GroupPartition make_partition(const std::vector<TypeParams>& types,
                              double zeta, double n_max) {
  if (!(zeta > 0.0 && zeta <= 1.0))
    throw std::invalid_argument("zeta must lie in (0,1]");
  const int num_types = static_cast<int>(types.size());
  // Interval index of (0, zeta], (zeta, 2*zeta], ... holding N_max*mu_k;
  // rates at or below zeta land in the first interval.
  std::vector<int> raw(num_types);
  int max_raw = 0;
  for (int k = 0; k < num_types; ++k) {
    double scaled = n_max * types[k].service_rate;
    int idx = scaled <= zeta ? 0
                             : static_cast<int>(std::ceil(scaled / zeta - 1e-12)) - 1;
    raw[k] = idx;
    max_raw = std::max(max_raw, idx);
  }
  std::vector<int> remap(max_raw + 1, -1);
  GroupPartition part;
  part.group_of.resize(num_types);
  for (int k = 0; k < num_types; ++k) {
    if (remap[raw[k]] < 0) {
      remap[raw[k]] = part.num_groups();
      part.proxy_rate.push_back(types[k].service_rate);
    }
    int g = remap[raw[k]];
    part.group_of[k] = g;
    part.proxy_rate[g] = std::min(part.proxy_rate[g], types[k].service_rate);
  }
  for (int k = 0; k < num_types; ++k) {
    double gap =
        n_max * (types[k].service_rate - part.proxy_rate[part.group_of[k]]);
    part.aggregation_gap = std::max(part.aggregation_gap, gap);
  }
  return part;
}

namespace {

std::vector<double> service_rates(const EnvConfig& env) {
  std::vector<double> mu;
  mu.reserve(env.types.size());
  for (const auto& tp : env.types) mu.push_back(tp.service_rate);
  return mu;
}

GroupPartition build_partition(const EnvConfig& env,
                               const ColbacidParams& params) {
  if (params.groups) {
    const auto& assignment = *params.groups;
    if (static_cast<int>(assignment.size()) != env.num_types())
      throw std::invalid_argument("group assignment size mismatch");
    int num_groups = 0;
    for (int g : assignment) {
      if (g < 0) throw std::invalid_argument("negative group id");
      num_groups = std::max(num_groups, g + 1);
    }
    GroupPartition part;
    part.group_of = assignment;
    part.proxy_rate.assign(num_groups, 1.0);
    std::vector<bool> seen(num_groups, false);
    for (int k = 0; k < env.num_types(); ++k) {
      int g = assignment[k];
      part.proxy_rate[g] = seen[g] ? std::min(part.proxy_rate[g],
                                              env.types[k].service_rate)
                                   : env.types[k].service_rate;
      seen[g] = true;
    }
    for (int g = 0; g < num_groups; ++g)
      if (!seen[g]) throw std::invalid_argument("empty group in assignment");
    double n_max = env.max_capacity();
    for (int k = 0; k < env.num_types(); ++k)
      part.aggregation_gap = std::max(
          part.aggregation_gap,
          n_max * (env.types[k].service_rate - part.proxy_rate[assignment[k]]));
    return part;
  }
  double zeta = params.zeta.value_or(1.0);
  return make_partition(env.types, zeta, env.max_capacity());
}

std::vector<Eigen::VectorXd> build_features(const EnvConfig& env,
                                            const ColbacidParams& params) {
  std::vector<Eigen::VectorXd> out;
  if (params.features) {
    const auto& rows = *params.features;
    if (static_cast<int>(rows.size()) != env.num_types())
      throw std::invalid_argument("feature matrix needs one row per type");
    for (const auto& row : rows)
      out.push_back(Eigen::Map<const Eigen::VectorXd>(
          row.data(), static_cast<Eigen::Index>(row.size())));
  } else {
    for (int k = 0; k < env.num_types(); ++k) {
      std::vector<double> row = env.feature_of(k);
      out.push_back(Eigen::Map<const Eigen::VectorXd>(
          row.data(), static_cast<Eigen::Index>(row.size())));
    }
  }
  for (const auto& phi : out)
    if (phi.size() != out.front().size())
      throw std::invalid_argument("inconsistent feature dimensions");
  return out;
}

}  // namespace

ColbacidPolicy::ColbacidPolicy(const EnvConfig& env,
                               const ColbacidParams& params)
    : partition_(build_partition(env, params)),
      sigma_max_(params.sigma_max.value_or(env.sigma_max)),
      r_max_(params.r_max.value_or(env.r_max)),
      feature_bound_(env.U),
      features_(build_features(env, params)),
      ridge_(static_cast<int>(features_.front().size()),
             params.kappa.value_or(std::max(1.0, env.U * env.U))),
      mu_(service_rates(env)) {
  double g_lmax = static_cast<double>(partition_.num_groups()) *
                  static_cast<double>(env.max_lifetime());
  beta_ = params.beta.value_or(1.0 / std::sqrt(g_lmax));
  gamma_ = params.gamma.value_or(beta_);
  double horizon = std::max<double>(1.0, static_cast<double>(env.horizon));
  delta_ = params.delta.value_or(std::min(gamma_, 0.5 / horizon));
  kappa_ = ridge_.kappa();
  if (!(delta_ > 0.0 && delta_ < 1.0))
    throw std::invalid_argument("delta must lie in (0,1)");
}

std::int64_t ColbacidPolicy::group_queue_len(const SimState& state,
                                             int g) const {
  std::int64_t total = 0;
  for (int k = 0; k < state.num_types(); ++k)
    if (partition_.group_of[k] == g) total += state.queue_len(k);
  return total;
}

ConfBounds ColbacidPolicy::bounds_for(int k) const {
  double radius = b_delta(ridge_.data_count(), ridge_.dim(), feature_bound_,
                          kappa_, sigma_max_, delta_);
  return contextual_conf(ridge_, features_[k], radius, r_max_);
}

std::optional<PostId> group_maxweight_schedule(
    const ScheduleView& view, const GroupPartition& partition) {
  const int num_groups = partition.num_groups();
  std::vector<std::int64_t> group_len(num_groups, 0);
  for (int k = 0; k < static_cast<int>(view.len.size()); ++k)
    group_len[partition.group_of[k]] += view.len[k];
  int best = -1;
  double best_weight = 0.0;
  for (int g = 0; g < num_groups; ++g) {
    if (group_len[g] == 0) continue;
    double weight = partition.proxy_rate[g] * static_cast<double>(group_len[g]);
    if (best < 0 || weight > best_weight) {  // ties keep the lowest group id
      best = g;
      best_weight = weight;
    }
  }
  if (best < 0) return std::nullopt;
  PostId pick = -1;
  std::int64_t pick_seq = 0;
  for (int k = 0; k < static_cast<int>(view.len.size()); ++k) {
    if (partition.group_of[k] != best || view.head[k] < 0) continue;
    if (pick < 0 || view.head_seq[k] < pick_seq) {
      pick = view.head[k];
      pick_seq = view.head_seq[k];
    }
  }
  return pick;
}

Decision ColbacidPolicy::decide(const SimState& state, const EnvConfig& env,
                                const std::optional<Arrival>& arrival,
                                std::mt19937_64&) {
  Decision d;
  std::optional<Arrival> pending_review;
  bool label_admitted = false;
  if (arrival) {
    int k = arrival->type_id;
    double h_hat = features_[k].dot(ridge_.theta_mean());
    d.classify = h_hat > 0.0 ? Classification::remove : Classification::keep;
    ConfBounds b = bounds_for(k);
    if (b.h_lo < -gamma_ && gamma_ < b.h_hi && !state.label_occupied()) {
      d.admit = AdmitTarget::label;
      label_admitted = true;
    } else if (beta_ * b.r_bar * static_cast<double>(env.types[k].lifetime) >=
               static_cast<double>(
                   group_queue_len(state, partition_.group_of[k]))) {
      d.admit = AdmitTarget::review;
      pending_review = arrival;
    }
  }
  if (state.label_occupied())
    d.schedule = state.label_entry()->post;
  else if (label_admitted)
    d.schedule = arrival->post_id;
  else
    d.schedule = group_maxweight_schedule(
        make_schedule_view(state, pending_review), partition_);
  return d;
}

void ColbacidPolicy::on_review(int type_id, double cost) {
  ridge_.update(features_[type_id], cost);
}

}  // namespace modsim
