#include "modsim/learning.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace modsim {

ConfBounds conf_bounds(const TypeStats& stats, Period t, double sigma_max,
                       double r_max) {
  ConfBounds b;
  if (stats.n == 0) {
    b.h_lo = -r_max;
    b.h_hi = r_max;
    b.r_bar = r_max;
    return b;
  }
  double log_t = std::log(static_cast<double>(t));
  double n = static_cast<double>(stats.n);
  double width_h = sigma_max * std::sqrt(8.0 * log_t / n);
  b.h_lo = std::max(-r_max, stats.h_hat() - width_h);
  b.h_hi = std::min(r_max, stats.h_hat() + width_h);
  double width_r = 4.0 * sigma_max * std::sqrt(log_t / n);
  b.r_bar = std::min(
      r_max, std::min(stats.r_hat_keep(), stats.r_hat_remove()) + width_r);
  return b;
}

namespace {

double default_beta(const EnvConfig& env) {
  return 1.0 / std::sqrt(static_cast<double>(env.num_types()) *
                         static_cast<double>(env.max_lifetime()));
}

std::vector<double> service_rates(const EnvConfig& env) {
  std::vector<double> mu;
  mu.reserve(env.types.size());
  for (const auto& tp : env.types) mu.push_back(tp.service_rate);
  return mu;
}

}  // namespace

BacidUcbPolicy::BacidUcbPolicy(const EnvConfig& env,
                               const LearningParams& params,
                               std::vector<int> known_types)
    : beta_(params.beta.value_or(default_beta(env))),
      sigma_max_(params.sigma_max.value_or(env.sigma_max)),
      r_max_(params.r_max.value_or(env.r_max)),
      stats_(env.num_types()),
      known_(env.num_types()),
      mu_(service_rates(env)) {
  for (int k : known_types) {
    if (k < 0 || k >= env.num_types())
      throw std::invalid_argument("known type out of range");
    known_[k] = moments(env.types[k].dist);
  }
}

ConfBounds BacidUcbPolicy::bounds_for(int k, Period t) const {
  if (known_[k]) {
    return ConfBounds{known_[k]->mean_cost, known_[k]->mean_cost,
                      known_[k]->idiosyncrasy_rate};
  }
  return conf_bounds(stats_[k], t, sigma_max_, r_max_);
}

Decision BacidUcbPolicy::decide(const SimState& state, const EnvConfig& env,
                                const std::optional<Arrival>& arrival,
                                std::mt19937_64&) {
  Decision d;
  std::optional<Arrival> pending;
  if (arrival) {
    int k = arrival->type_id;
    double h_hat = known_[k] ? known_[k]->mean_cost : stats_[k].h_hat();
    d.classify = h_hat > 0.0 ? Classification::remove : Classification::keep;
    double r_bar = bounds_for(k, state.t()).r_bar;
    if (beta_ * r_bar * static_cast<double>(env.types[k].lifetime) >=
        static_cast<double>(state.queue_len(k))) {
      d.admit = AdmitTarget::review;
      pending = arrival;
    }
  }
  d.schedule = maxweight_schedule(make_schedule_view(state, pending), mu_);
  return d;
}

void BacidUcbPolicy::on_review(int type_id, double cost) {
  stats_[type_id].add(cost);
}

OlbacidPolicy::OlbacidPolicy(const EnvConfig& env, const LearningParams& params)
    : beta_(params.beta.value_or(default_beta(env))),
      gamma_(params.gamma.value_or(params.beta.value_or(default_beta(env)))),
      sigma_max_(params.sigma_max.value_or(env.sigma_max)),
      r_max_(params.r_max.value_or(env.r_max)),
      stats_(env.num_types()),
      mu_(service_rates(env)) {}

ConfBounds OlbacidPolicy::bounds_for(int k, Period t) const {
  return conf_bounds(stats_[k], t, sigma_max_, r_max_);
}

Decision OlbacidPolicy::decide(const SimState& state, const EnvConfig& env,
                               const std::optional<Arrival>& arrival,
                               std::mt19937_64&) {
  Decision d;
  std::optional<Arrival> pending_review;
  bool label_admitted = false;
  if (arrival) {
    int k = arrival->type_id;
    d.classify = stats_[k].h_hat() > 0.0 ? Classification::remove
                                         : Classification::keep;
    ConfBounds b = bounds_for(k, state.t());
    // Label-driven admission needs strict uncertainty on both sides of the
    // margin and an empty label queue.
    if (b.h_lo < -gamma_ && gamma_ < b.h_hi && !state.label_occupied()) {
      d.admit = AdmitTarget::label;
      label_admitted = true;
    } else if (beta_ * b.r_bar * static_cast<double>(env.types[k].lifetime) >=
               static_cast<double>(state.queue_len(k))) {
      d.admit = AdmitTarget::review;
      pending_review = arrival;
    }
  }
  // Forced scheduling: the label queue post (possibly admitted this very
  // period) preempts MaxWeight.
  if (state.label_occupied())
    d.schedule = state.label_entry()->post;
  else if (label_admitted)
    d.schedule = arrival->post_id;
  else
    d.schedule = maxweight_schedule(make_schedule_view(state, pending_review), mu_);
  return d;
}

void OlbacidPolicy::on_review(int type_id, double cost) {
  stats_[type_id].add(cost);
}

}  // namespace modsim
