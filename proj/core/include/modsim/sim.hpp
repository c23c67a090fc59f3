#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modsim/env.hpp"
#include "modsim/rng.hpp"

namespace modsim {

using PostId = std::int64_t;
constexpr Period kNever = -1;

enum class Classification : std::uint8_t { keep = 1, remove = 0 };
enum class AdmitTarget : std::uint8_t { none = 0, review = 1, label = 2 };

/// A policy's decision for one period: classification of the arrival (if
/// any), which queue the arrival joins (review, label-driven, or none), and
/// the post scheduled for review this period.
struct Decision {
  Classification classify = Classification::keep;
  AdmitTarget admit = AdmitTarget::none;
  std::optional<PostId> schedule;
};

struct Post {
  PostId id = 0;
  int type_id = 0;
  Period arrival_period = 0;
  double true_cost = 0.0;
  Classification initial_class = Classification::keep;
  AdmitTarget admitted = AdmitTarget::none;
  Period review_period = kNever;  // completion period

  bool reviewed() const { return review_period != kNever; }
  /// D(j): label arrives in period arrival+D-1; T+1-arrival if never
  /// reviewed.
  Period delay(Period horizon) const {
    return reviewed() ? review_period - arrival_period + 1
                      : horizon + 1 - arrival_period;
  }
};

struct QueueEntry {
  PostId post = 0;
  std::int64_t seq = 0;  // global admission order
};

/// Mutable queueing state of one run.
class SimState {
 public:
  explicit SimState(int num_types)
      : review_queues_(num_types), reviewed_count_(num_types, 0) {}

  Period t() const { return t_; }
  int num_types() const { return static_cast<int>(review_queues_.size()); }

  std::int64_t queue_len(int k) const {
    return static_cast<std::int64_t>(review_queues_[k].size());
  }
  std::int64_t total_queue_len() const;
  const std::deque<QueueEntry>& queue(int k) const { return review_queues_[k]; }
  bool label_occupied() const { return label_entry_.has_value(); }
  const std::optional<QueueEntry>& label_entry() const { return label_entry_; }

  std::int64_t reviewed_count(int k) const { return reviewed_count_[k]; }
  /// Reviewed posts in completion order: (post id, type, cost).
  struct DataPoint {
    PostId post;
    int type_id;
    double cost;
  };
  const std::vector<DataPoint>& dataset() const { return dataset_; }
  std::int64_t next_seq() const { return next_seq_; }

 private:
  friend class Simulator;
  Period t_ = 1;
  std::vector<std::deque<QueueEntry>> review_queues_;
  std::optional<QueueEntry> label_entry_;
  std::vector<std::int64_t> reviewed_count_;
  std::vector<DataPoint> dataset_;
  std::int64_t next_seq_ = 0;
};

struct PeriodRecord {
  std::int32_t arrival_type = -1;  // -1 when no arrival
  Classification classify = Classification::keep;
  AdmitTarget admit = AdmitTarget::none;
  PostId scheduled = -1;
  PostId reviewed = -1;
  std::uint8_t label_len_begin = 0;  // |label queue| at period start
};

/// Complete, replayable record of one run.
struct Trace {
  EnvConfig env;
  std::uint64_t seed = 0;
  std::string policy_name;
  nlohmann::json policy_params;

  std::vector<Post> posts;            // every arrival, admitted or not
  std::vector<PeriodRecord> periods;  // one per period
  std::vector<std::uint32_t> queue_len_begin;  // T x K, period-start snapshot
  std::int64_t final_queued = 0;      // review+label posts left at the end
  std::uint64_t env_stream_hash = 0;  // fingerprint of env randomness

  Period horizon() const { return static_cast<Period>(periods.size()); }
  std::uint32_t queue_len_at(Period t, int k) const {
    return queue_len_begin[static_cast<std::size_t>(t - 1) * env.types.size() +
                           static_cast<std::size_t>(k)];
  }
};

struct Arrival {
  int type_id = 0;
  PostId post_id = 0;
};

/// Decision-maker interface. One instance per run; the engine calls
/// on_review at the end of the period a review completes, so the next
/// period's decide() sees the grown dataset.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual Decision decide(const SimState& state, const EnvConfig& env,
                          const std::optional<Arrival>& arrival,
                          std::mt19937_64& policy_rng) = 0;
  virtual void on_review(int /*type_id*/, double /*cost*/) {}
};

class ContractViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Drives the period loop. Sub-streams are consumed in a fixed order each
/// period: one arrival uniform, one cost draw when a post arrives, one
/// service uniform. Admission precedes scheduling within a period, so a
/// just-admitted post may be scheduled (and even reviewed) immediately.
class Simulator {
 public:
  Simulator(const EnvConfig& env, Policy& policy, std::uint64_t seed);

  /// Advances one period; appends to the trace under construction.
  void step();
  bool done() const { return state_.t_ > env_.horizon; }

  const SimState& state() const { return state_; }
  /// Finalizes and moves out the trace; the simulator is spent afterwards.
  Trace take_trace();

 private:
  const EnvConfig& env_;
  Policy& policy_;
  RunStreams streams_;
  StreamHash env_hash_;
  SimState state_;
  Trace trace_;
  std::vector<CostMoments> moments_;
};

Trace run(const EnvConfig& env, Policy& policy, std::uint64_t seed);

/// Realized loss against the omniscient clairvoyant that keeps exactly the
/// posts with non-positive cost. A post whose initial classification
/// matches the clairvoyant contributes nothing; a misclassified post
/// diverges for |c| per period until its review reverses the decision
/// (min(D, lifetime) periods) or, when never admitted, for its whole
/// lifetime.
double realized_loss(const Trace& trace);

struct LossBreakdown {
  double idiosyncrasy = 0.0;
  double delay = 0.0;
  double classification = 0.0;
};

/// Diagnostic decomposition using true moments; not available to policies.
LossBreakdown loss_decomposition(const Trace& trace);

/// Both sides of the queue-accounting identity
///   sum over admitted posts of D(j)
///     = sum over period-start queue snapshots (t = 2..T+1) + #reviews,
/// which must hold exactly on every trace.
struct LittleLawSides {
  std::int64_t delay_sum = 0;
  std::int64_t queue_sum = 0;
};
LittleLawSides little_law_sides(const Trace& trace);

/// Per-type conservation: every period-start snapshot must equal
/// admissions minus completed reviews so far (admitted = reviewed + still
/// queued at every t). Returns descriptions of any mismatches.
std::vector<std::string> conservation_violations(const Trace& trace);

}  // namespace modsim
