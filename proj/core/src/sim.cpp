#include "modsim/sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace modsim {

void StreamHash::mix_double(double x) { mix(std::bit_cast<std::uint64_t>(x)); }

std::int64_t SimState::total_queue_len() const {
  std::int64_t total = label_entry_.has_value() ? 1 : 0;
  for (const auto& q : review_queues_) total += static_cast<std::int64_t>(q.size());
  return total;
}

Simulator::Simulator(const EnvConfig& env, Policy& policy, std::uint64_t seed)
    : env_(env), policy_(policy), streams_(seed), state_(env.num_types()) {
  trace_.env = env;
  trace_.seed = seed;
  trace_.policy_name = policy.name();
  trace_.periods.reserve(static_cast<std::size_t>(std::max<Period>(env.horizon, 0)));
  trace_.queue_len_begin.reserve(
      static_cast<std::size_t>(std::max<Period>(env.horizon, 0)) *
      static_cast<std::size_t>(env.num_types()));
  moments_.reserve(env.types.size());
  for (const auto& tp : env.types) moments_.push_back(moments(tp.dist));
}

void Simulator::step() {
  const Period t = state_.t_;
  PeriodRecord rec;
  rec.label_len_begin = state_.label_entry_.has_value() ? 1 : 0;
  for (int k = 0; k < state_.num_types(); ++k)
    trace_.queue_len_begin.push_back(
        static_cast<std::uint32_t>(state_.queue_len(k)));

  // (1) Arrival: one uniform per period; the same draw selects the type.
  double u_arrival = uniform01(streams_.arrival());
  env_hash_.mix_double(u_arrival);
  std::optional<Arrival> arrival;
  double acc = 0.0;
  for (int k = 0; k < env_.num_types() && !arrival; ++k) {
    acc += env_.arrival_rate(k, t);
    if (u_arrival < acc)
      arrival = Arrival{k, static_cast<PostId>(trace_.posts.size())};
  }

  // (2) Cost of the arriving post, drawn whether or not it gets admitted.
  if (arrival) {
    double cost = sample_cost(env_.types[arrival->type_id].dist, streams_.cost());
    env_hash_.mix_double(cost);
    Post post;
    post.id = arrival->post_id;
    post.type_id = arrival->type_id;
    post.arrival_period = t;
    post.true_cost = cost;
    trace_.posts.push_back(post);
    rec.arrival_type = arrival->type_id;
  }

  // (3) Policy decision for the whole period.
  Decision decision = policy_.decide(state_, env_, arrival, streams_.policy());

  if (decision.admit != AdmitTarget::none && !arrival)
    throw ContractViolation("admission decision without an arrival");

  if (arrival) {
    Post& post = trace_.posts.back();
    post.initial_class = decision.classify;
    rec.classify = decision.classify;
    rec.admit = decision.admit;
    if (decision.admit == AdmitTarget::review) {
      state_.review_queues_[arrival->type_id].push_back(
          {arrival->post_id, state_.next_seq_++});
      post.admitted = AdmitTarget::review;
    } else if (decision.admit == AdmitTarget::label) {
      if (state_.label_entry_.has_value())
        throw ContractViolation("label queue admission while occupied");
      state_.label_entry_ = QueueEntry{arrival->post_id, state_.next_seq_++};
      post.admitted = AdmitTarget::label;
    }
  }

  // (4) Service: one uniform per period regardless of scheduling, so the
  // service stream is identical across policies under one seed.
  double u_service = uniform01(streams_.service());
  env_hash_.mix_double(u_service);

  if (decision.schedule) {
    PostId target = *decision.schedule;
    rec.scheduled = target;
    bool from_label =
        state_.label_entry_.has_value() && state_.label_entry_->post == target;
    std::deque<QueueEntry>* queue = nullptr;
    std::deque<QueueEntry>::iterator it;
    if (!from_label) {
      if (target < 0 || target >= static_cast<PostId>(trace_.posts.size()))
        throw ContractViolation("scheduled post id does not exist");
      int k = trace_.posts[static_cast<std::size_t>(target)].type_id;
      queue = &state_.review_queues_[k];
      it = std::find_if(queue->begin(), queue->end(),
                        [&](const QueueEntry& e) { return e.post == target; });
      if (it == queue->end())
        throw ContractViolation("scheduled post is not waiting in any queue");
    }
    int k_sched = trace_.posts[static_cast<std::size_t>(target)].type_id;
    double p_complete = env_.capacity_at(t) * env_.types[k_sched].service_rate;
    if (u_service < p_complete) {
      Post& post = trace_.posts[static_cast<std::size_t>(target)];
      post.review_period = t;
      if (from_label)
        state_.label_entry_.reset();
      else
        queue->erase(it);
      state_.reviewed_count_[k_sched] += 1;
      state_.dataset_.push_back({target, k_sched, post.true_cost});
      rec.reviewed = target;
      policy_.on_review(k_sched, post.true_cost);
    }
  }

  state_.t_ += 1;
  trace_.periods.push_back(rec);
}

Trace Simulator::take_trace() {
  trace_.final_queued = state_.total_queue_len();
  trace_.env_stream_hash = env_hash_.state;
  return std::move(trace_);
}

Trace run(const EnvConfig& env, Policy& policy, std::uint64_t seed) {
  Simulator sim(env, policy, seed);
  while (!sim.done()) sim.step();
  return sim.take_trace();
}

double realized_loss(const Trace& trace) {
  const Period horizon = trace.horizon();
  double loss = 0.0;
  for (const Post& post : trace.posts) {
    bool clairvoyant_keeps = post.true_cost <= 0.0;
    bool kept = post.initial_class == Classification::keep;
    if (kept == clairvoyant_keeps) continue;
    Period lifetime = trace.env.types[post.type_id].lifetime;
    Period diverged = post.admitted == AdmitTarget::none
                          ? lifetime
                          : std::min(post.delay(horizon), lifetime);
    loss += std::abs(post.true_cost) * static_cast<double>(diverged);
  }
  return loss;
}

LossBreakdown loss_decomposition(const Trace& trace) {
  LossBreakdown out;
  const Period horizon = trace.horizon();
  std::vector<CostMoments> m;
  m.reserve(trace.env.types.size());
  for (const auto& tp : trace.env.types) m.push_back(moments(tp.dist));

  for (const Post& post : trace.posts) {
    const CostMoments& mo = m[static_cast<std::size_t>(post.type_id)];
    double lifetime = static_cast<double>(trace.env.types[post.type_id].lifetime);
    if (post.admitted == AdmitTarget::none) {
      out.idiosyncrasy += mo.idiosyncrasy_rate * lifetime;
      double chosen_rate = post.initial_class == Classification::keep
                               ? mo.keep_cost
                               : mo.remove_cost;
      out.classification += (chosen_rate - mo.idiosyncrasy_rate) * lifetime;
    } else {
      double diverged = static_cast<double>(
          std::min<Period>(post.delay(horizon),
                           trace.env.types[post.type_id].lifetime));
      out.delay += mo.idiosyncrasy_rate * diverged;
    }
  }
  return out;
}

LittleLawSides little_law_sides(const Trace& trace) {
  LittleLawSides sides;
  const Period horizon = trace.horizon();
  std::int64_t reviews = 0;
  for (const Post& post : trace.posts) {
    if (post.admitted == AdmitTarget::none) continue;
    sides.delay_sum += post.delay(horizon);
    if (post.reviewed()) ++reviews;
  }
  // Period-start snapshots for t = 2..T+1 equal the stored snapshots for
  // t = 2..T plus the final state; a reviewed post is absent from the
  // snapshot that follows its completion, hence the +reviews term.
  const int num_types = static_cast<int>(trace.env.types.size());
  for (Period t = 2; t <= horizon; ++t) {
    for (int k = 0; k < num_types; ++k)
      sides.queue_sum += trace.queue_len_at(t, k);
    sides.queue_sum += trace.periods[static_cast<std::size_t>(t - 1)].label_len_begin;
  }
  sides.queue_sum += trace.final_queued;
  sides.queue_sum += reviews;
  return sides;
}

std::vector<std::string> conservation_violations(const Trace& trace) {
  // Replays the period records and checks that every period-start queue
  // snapshot equals admissions minus completed reviews so far, per type,
  // and that the label queue never holds more than one post.
  std::vector<std::string> bad;
  const int num_types = static_cast<int>(trace.env.types.size());
  std::vector<std::int64_t> in_review(num_types, 0);
  bool label_outstanding = false;
  for (Period t = 1; t <= trace.horizon(); ++t) {
    const PeriodRecord& rec = trace.periods[static_cast<std::size_t>(t - 1)];
    for (int k = 0; k < num_types; ++k) {
      if (trace.queue_len_at(t, k) != static_cast<std::uint32_t>(in_review[k]))
        bad.push_back("review queue mismatch for type " + std::to_string(k) +
                      " at t=" + std::to_string(t));
    }
    if ((rec.label_len_begin != 0) != label_outstanding)
      bad.push_back("label queue mismatch at t=" + std::to_string(t));
    if (rec.admit == AdmitTarget::review) {
      in_review[rec.arrival_type] += 1;
    } else if (rec.admit == AdmitTarget::label) {
      if (label_outstanding)
        bad.push_back("label queue overflow at t=" + std::to_string(t));
      label_outstanding = true;
    }
    if (rec.reviewed >= 0) {
      const Post& post = trace.posts[static_cast<std::size_t>(rec.reviewed)];
      if (post.admitted == AdmitTarget::label)
        label_outstanding = false;
      else
        in_review[post.type_id] -= 1;
    }
  }
  std::int64_t left = label_outstanding ? 1 : 0;
  for (int k = 0; k < num_types; ++k) left += in_review[k];
  if (left != trace.final_queued)
    bad.push_back("final queue total mismatch");
  return bad;
}

}  // namespace modsim
