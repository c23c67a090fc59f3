#include "modsim/policies.hpp"

#include <cmath>
#include <stdexcept>

namespace modsim {

namespace {

std::vector<CostMoments> all_moments(const EnvConfig& env) {
  std::vector<CostMoments> m;
  m.reserve(env.types.size());
  for (const auto& tp : env.types) m.push_back(moments(tp.dist));
  return m;
}

std::vector<double> service_rates(const EnvConfig& env) {
  std::vector<double> mu;
  mu.reserve(env.types.size());
  for (const auto& tp : env.types) mu.push_back(tp.service_rate);
  return mu;
}

Classification classify_by_mean(double mean_cost) {
  return mean_cost > 0.0 ? Classification::remove : Classification::keep;
}

}  // namespace

ScheduleView make_schedule_view(const SimState& state,
                                const std::optional<Arrival>& pending_review) {
  const int num_types = state.num_types();
  ScheduleView view;
  view.len.resize(num_types);
  view.head.assign(num_types, -1);
  view.head_seq.assign(num_types, 0);
  for (int k = 0; k < num_types; ++k) {
    view.len[k] = state.queue_len(k);
    if (!state.queue(k).empty()) {
      view.head[k] = state.queue(k).front().post;
      view.head_seq[k] = state.queue(k).front().seq;
    }
  }
  if (pending_review) {
    int k = pending_review->type_id;
    if (view.len[k] == 0) {
      view.head[k] = pending_review->post_id;
      view.head_seq[k] = state.next_seq();
    }
    view.len[k] += 1;
  }
  return view;
}

std::optional<PostId> maxweight_schedule(const ScheduleView& view,
                                         const std::vector<double>& mu) {
  int best = -1;
  double best_weight = 0.0;
  for (int k = 0; k < static_cast<int>(view.len.size()); ++k) {
    if (view.len[k] == 0) continue;
    double weight = mu[k] * static_cast<double>(view.len[k]);
    if (best < 0 || weight > best_weight) {  // ties keep the lowest index
      best = k;
      best_weight = weight;
    }
  }
  if (best < 0) return std::nullopt;
  return view.head[best];
}

BacidPolicy::BacidPolicy(const EnvConfig& env, const BacidParams& params)
    : moments_(all_moments(env)), mu_(service_rates(env)) {
  double k_lmax = static_cast<double>(env.num_types()) *
                  static_cast<double>(env.max_lifetime());
  if (params.beta) {
    beta_ = *params.beta;
  } else if (params.window) {
    beta_ = std::sqrt(static_cast<double>(*params.window) / k_lmax);
  } else {
    beta_ = 1.0 / std::sqrt(k_lmax);
  }
  if (!(beta_ > 0.0)) throw std::invalid_argument("beta must be > 0");
}

Decision BacidPolicy::decide(const SimState& state, const EnvConfig& env,
                             const std::optional<Arrival>& arrival,
                             std::mt19937_64&) {
  Decision d;
  std::optional<Arrival> pending;
  if (arrival) {
    int k = arrival->type_id;
    d.classify = classify_by_mean(moments_[k].mean_cost);
    double weight = beta_ * moments_[k].idiosyncrasy_rate *
                    static_cast<double>(env.types[k].lifetime);
    if (weight >= static_cast<double>(state.queue_len(k))) {
      d.admit = AdmitTarget::review;
      pending = arrival;
    }
  }
  d.schedule = maxweight_schedule(make_schedule_view(state, pending), mu_);
  return d;
}

AiOnlyPolicy::AiOnlyPolicy(const EnvConfig& env) : moments_(all_moments(env)) {}

Decision AiOnlyPolicy::decide(const SimState&, const EnvConfig&,
                              const std::optional<Arrival>& arrival,
                              std::mt19937_64&) {
  Decision d;
  if (arrival) d.classify = classify_by_mean(moments_[arrival->type_id].mean_cost);
  return d;
}

HumanOnlyPolicy::HumanOnlyPolicy(const EnvConfig& env)
    : moments_(all_moments(env)), mu_(service_rates(env)) {}

Decision HumanOnlyPolicy::decide(const SimState& state, const EnvConfig&,
                                 const std::optional<Arrival>& arrival,
                                 std::mt19937_64&) {
  Decision d;
  std::optional<Arrival> pending;
  if (arrival) {
    d.classify = classify_by_mean(moments_[arrival->type_id].mean_cost);
    d.admit = AdmitTarget::review;
    pending = arrival;
  }
  d.schedule = maxweight_schedule(make_schedule_view(state, pending), mu_);
  return d;
}

StaticTypePolicy::StaticTypePolicy(const EnvConfig& env, int admitted_type)
    : admitted_type_(admitted_type),
      moments_(all_moments(env)),
      mu_(service_rates(env)) {
  if (admitted_type < 0 || admitted_type >= env.num_types())
    throw std::invalid_argument("static policy: no such type");
}

std::string StaticTypePolicy::name() const {
  return "static_" + std::to_string(admitted_type_ + 1);
}

Decision StaticTypePolicy::decide(const SimState& state, const EnvConfig&,
                                  const std::optional<Arrival>& arrival,
                                  std::mt19937_64&) {
  Decision d;
  std::optional<Arrival> pending;
  if (arrival) {
    d.classify = classify_by_mean(moments_[arrival->type_id].mean_cost);
    if (arrival->type_id == admitted_type_) {
      d.admit = AdmitTarget::review;
      pending = arrival;
    }
  }
  d.schedule = maxweight_schedule(make_schedule_view(state, pending), mu_);
  return d;
}

DynamicFluidPolicy::DynamicFluidPolicy(const EnvConfig& env, FluidSolution fluid)
    : fluid_(std::move(fluid)),
      moments_(all_moments(env)),
      mu_(service_rates(env)) {
  if (fluid_.windows.empty() && env.horizon > 0)
    throw std::invalid_argument("dynamic policy needs a fluid solution");
}

Decision DynamicFluidPolicy::decide(const SimState& state, const EnvConfig&,
                                    const std::optional<Arrival>& arrival,
                                    std::mt19937_64& policy_rng) {
  Decision d;
  std::optional<Arrival> pending;
  if (arrival) {
    int k = arrival->type_id;
    d.classify = classify_by_mean(moments_[k].mean_cost);
    double p = fluid_.admit_probability(k, state.t());
    if (p >= 1.0 || (p > 0.0 && uniform01(policy_rng) < p)) {
      d.admit = AdmitTarget::review;
      pending = arrival;
    }
  }
  d.schedule = maxweight_schedule(make_schedule_view(state, pending), mu_);
  return d;
}

}  // namespace modsim
