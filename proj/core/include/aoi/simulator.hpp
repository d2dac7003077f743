#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "aoi/model.hpp"
#include "aoi/rng.hpp"

namespace aoi {

// Exact running sum of pre-transition ages over all slots and agents.
using AgeSum = __int128;

struct PolicySpec {
  enum class Kind { ThresholdRandom, Index };
  Kind kind = Kind::ThresholdRandom;
  // Unscaled per-class slot thresholds; an agent is eligible iff its age is
  // strictly greater than its class threshold. ThresholdRandom only.
  std::vector<long long> thresholds;
  // Index policy schedules argmax p_c * h^(index_exponent + 1); the default 1
  // gives the p_c h^2 rule. Agents at age 0 carry weight 0 and are excluded;
  // exact weight ties are broken uniformly at random.
  double index_exponent = 1.0;
};

struct InitialAges {
  enum class Kind { Zero, Gaussian, Explicit };
  Kind kind = Kind::Zero;
  std::vector<long long> ages;  // Explicit only, one entry per agent

  static InitialAges zero() { return {}; }
  // round(max(0, normal(N/2, sqrt(N)))) per agent, drawn from the init stream.
  static InitialAges gaussian() { return {Kind::Gaussian, {}}; }
  static InitialAges explicit_list(std::vector<long long> v) {
    return {Kind::Explicit, std::move(v)};
  }
};

struct SimConfig {
  NetworkSpec network;
  PolicySpec policy;
  long long horizon = 0;
  std::uint64_t seed = 0;
  InitialAges initial_ages;
  AgeFunction age_function = AgeFunction::linear();
  // Apply the age function to h/N instead of raw slot counts.
  bool age_function_rescaled = true;
  // Delivered agents restart at age 1 instead of 0 on the following slot.
  bool reset_age_to_one = false;
  std::vector<long long> snapshot_slots;  // ascending, within [1, horizon]
};

struct OccupancySnapshot {
  long long slot = 0;
  long long num_agents = 0;
  std::vector<std::vector<double>> rescaled_ages;  // per class, ascending
};

// Fraction of all N agents that belong to class cls and have rescaled age
// <= hhat, so the total over classes tends to 1 as hhat grows.
double empirical_cdf(const OccupancySnapshot& snap, std::size_t cls, double hhat);

struct SimResult {
  long long horizon = 0;
  long long num_agents = 0;
  AgeSum age_sum = 0;      // sum of ages over slots 0..horizon-1, exact
  double agefn_sum = 0.0;  // same for the age function
  double avg_aoi = 0.0;    // age_sum / (horizon * N)
  double avg_agefn = 0.0;
  std::vector<OccupancySnapshot> snapshots;
};

// Slotted single-channel scheduling simulator. Each slot: metrics accumulate
// the pre-transition ages, the policy picks at most one agent, a Bernoulli
// channel draw decides delivery, the delivered agent's age restarts and every
// other age grows by one.
//
// Randomness protocol (fixed so that a run is reproducible from its seed and
// mirrorable by an independent implementation): three SplitMix64 streams are
// derived from the seed with tags 1 = selection, 2 = channel, 3 = initial
// ages. Per slot, the threshold policy consumes exactly one selection draw
// when at least one agent is eligible (uniform index into the eligible set
// listed in agent-id order); the index policy consumes one selection draw
// only when the maximal weight is shared by more than one agent (uniform
// index into the tied agents in id order). One channel draw (success iff
// u < p_c) is consumed iff an agent was scheduled. Agent ids are assigned
// class by class: class 0 occupies ids 0..N_0-1, then class 1, and so on.
//
// Ages are stored as last-reset slots, eligibility is tracked per class with
// a Fenwick tree over agent ids plus a pending queue ordered by reset slot,
// and the index policy keeps per-class queues of equal-age groups, so a slot
// costs O(C + log N) amortized regardless of N.
class Simulator {
 public:
  explicit Simulator(const SimConfig& cfg);

  // Scheduling decision for the current slot; returns the agent id or -1 for
  // an idle slot. Consumes selection randomness as documented above; step()
  // calls it internally, so call it directly only on a simulator you do not
  // intend to advance.
  long long policy_select();

  void step();

  long long slot() const { return slot_; }
  long long num_agents() const { return num_agents_; }
  long long age_of(long long agent) const { return slot_ - reset_slot_[agent]; }
  std::vector<long long> ages() const;

  AgeSum age_sum() const { return age_sum_; }
  double avg_aoi() const;
  // Includes the still-open cycles up to the current slot.
  double agefn_sum() const;
  double avg_agefn() const;

  OccupancySnapshot snapshot() const;

 private:
  struct Group {
    long long reset_slot;
    std::vector<int> members;  // local ids, ascending
  };

  // Order-statistics bitmap over one class's local agent ids.
  class Fenwick {
   public:
    void init(int n);
    void add(int i, int delta);
    int total() const { return total_; }
    int kth(int k) const;  // 0-based rank -> local id

   private:
    std::vector<int> tree_;
    int n_ = 0;
    int highbit_ = 0;
    int total_ = 0;
  };

  struct ClassState {
    long long offset = 0;
    int size = 0;
    long long threshold = 0;         // threshold policy
    Fenwick eligible;                // threshold policy
    std::deque<Group> pending;       // threshold policy, ascending reset_slot
    std::deque<Group> groups;        // index policy, ascending reset_slot
  };

  void promote_eligible();
  void apply_delivery(long long agent, std::size_t cls);
  double scaled_age_value(long long h) const;
  void ensure_prefix(long long upto) const;

  std::vector<ClassSpec> class_specs_;
  std::vector<ClassState> classes_;
  std::vector<int> class_of_;
  std::vector<long long> reset_slot_;  // age(i) = slot - reset_slot_[i]
  long long num_agents_ = 0;
  long long slot_ = 0;
  long long reset_offset_ = 1;  // 0 when reset_age_to_one
  bool threshold_policy_ = true;
  double weight_exponent_ = 2.0;

  SplitMix64 select_rng_;
  SplitMix64 channel_rng_;

  AgeSum age_sum_ = 0;
  long long sum_reset_ = 0;  // sum of reset_slot_ over agents
  double agefn_closed_ = 0.0;
  AgeFunction age_function_;
  bool age_function_rescaled_ = true;
  // prefix_[k] = sum_{j<k} V(j) with V applied per the rescaled flag.
  mutable std::vector<double> prefix_;
};

SimResult run(const SimConfig& cfg);

}  // namespace aoi
